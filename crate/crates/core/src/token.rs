//! Multi-token balance engine: right tokens (non-fungible) and their
//! fractional classes (fungible) in one contract instance.
//!
//! The id space is split by the top bit. Ids below 2^255 are right ids whose
//! supply is 0 or 1; setting the top bit of right `R` yields the fractional
//! class of `R`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::address::Address;
use crate::error::{Error, Result};
use crate::hash::{canonical_digest, Hash32};

const TOP_BIT: u8 = 0x80;

/// 256-bit token identifier stored big-endian.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TokenId(pub [u8; 32]);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenClass {
    Right,
    Fractional,
}

impl TokenId {
    pub fn from_u64(v: u64) -> TokenId {
        let mut out = [0u8; 32];
        out[24..].copy_from_slice(&v.to_be_bytes());
        TokenId(out)
    }

    pub fn class(&self) -> TokenClass {
        if self.0[0] & TOP_BIT != 0 {
            TokenClass::Fractional
        } else {
            TokenClass::Right
        }
    }

    pub fn is_right(&self) -> bool {
        self.class() == TokenClass::Right
    }

    pub fn is_fractional(&self) -> bool {
        self.class() == TokenClass::Fractional
    }

    /// `self + 2^255` for a right id.
    pub fn fractional(&self) -> Result<TokenId> {
        if !self.is_right() {
            return Err(Error::NonRightId);
        }
        let mut out = self.0;
        out[0] |= TOP_BIT;
        Ok(TokenId(out))
    }

    /// The right anchoring a fractional id (top bit cleared).
    pub fn right(&self) -> TokenId {
        let mut out = self.0;
        out[0] &= !TOP_BIT;
        TokenId(out)
    }

    /// 64 lowercase hex chars, zero padded.
    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl fmt::Display for TokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", self.to_hex())
    }
}

impl fmt::Debug for TokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = BigUint::from_bytes_be(&self.right().0);
        match self.class() {
            TokenClass::Right => write!(f, "Right({v})"),
            TokenClass::Fractional => write!(f, "Fractional({v})"),
        }
    }
}

impl FromStr for TokenId {
    type Err = Error;

    /// Accepts `0x`-prefixed hex, decimal, or `frac:<n>` for the fractional
    /// class of right `n`.
    fn from_str(s: &str) -> Result<Self> {
        if let Some(rest) = s.strip_prefix("frac:") {
            return rest.parse::<TokenId>()?.fractional();
        }
        let bad = || Error::Parse(format!("invalid token id `{s}`"));
        let value = match s.strip_prefix("0x") {
            Some(h) if !h.is_empty() => BigUint::parse_bytes(h.as_bytes(), 16).ok_or_else(bad)?,
            Some(_) => return Err(bad()),
            None => BigUint::parse_bytes(s.as_bytes(), 10).ok_or_else(bad)?,
        };
        let bytes = value.to_bytes_be();
        if bytes.len() > 32 {
            return Err(bad());
        }
        let mut out = [0u8; 32];
        out[32 - bytes.len()..].copy_from_slice(&bytes);
        Ok(TokenId(out))
    }
}

impl Serialize for TokenId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TokenId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One elementary balance change.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Movement {
    Mint { to: Address, id: TokenId, amount: u64 },
    Burn { from: Address, id: TokenId, amount: u64 },
    Transfer { from: Address, to: Address, id: TokenId, amount: u64 },
}

/// Balances, supplies and operator approvals of one contract instance.
///
/// Zero balances and zero supplies are never stored, so two ledgers holding
/// the same amounts serialize identically regardless of history.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenLedger {
    balances: BTreeMap<TokenId, BTreeMap<Address, u64>>,
    supply: BTreeMap<TokenId, u64>,
    approvals: BTreeSet<(Address, Address)>,
}

impl TokenLedger {
    pub fn balance(&self, acct: &Address, id: &TokenId) -> u64 {
        self.balances
            .get(id)
            .and_then(|m| m.get(acct))
            .copied()
            .unwrap_or(0)
    }

    /// Amounts in the order of `ids`.
    pub fn balance_of(&self, acct: &Address, ids: &[TokenId]) -> Vec<u64> {
        ids.iter().map(|id| self.balance(acct, id)).collect()
    }

    pub fn total_supply(&self, id: &TokenId) -> u64 {
        self.supply.get(id).copied().unwrap_or(0)
    }

    pub fn exists(&self, id: &TokenId) -> bool {
        self.total_supply(id) > 0
    }

    /// Holders of `id` with nonzero balances, in address order.
    pub fn holders(&self, id: &TokenId) -> impl Iterator<Item = (&Address, &u64)> {
        self.balances.get(id).into_iter().flat_map(|m| m.iter())
    }

    /// Token ids with nonzero supply.
    pub fn ids(&self) -> impl Iterator<Item = &TokenId> {
        self.supply.keys()
    }

    /// The single holder of a minted right, if any.
    pub fn owner_of(&self, id: &TokenId) -> Option<Address> {
        self.holders(id).next().map(|(a, _)| *a)
    }

    pub fn is_approved_for_all(&self, owner: &Address, operator: &Address) -> bool {
        self.approvals.contains(&(*owner, *operator))
    }

    /// `caller` may move `from`'s tokens.
    pub fn may_operate(&self, caller: &Address, from: &Address) -> bool {
        caller == from || self.is_approved_for_all(from, caller)
    }

    pub fn set_approval_for_all(&mut self, owner: Address, operator: Address, approved: bool) -> Result<()> {
        if owner == operator {
            return Err(Error::SelfApproval);
        }
        if operator.is_zero() {
            return Err(Error::ZeroAddress);
        }
        if approved {
            self.approvals.insert((owner, operator));
        } else {
            self.approvals.remove(&(owner, operator));
        }
        Ok(())
    }

    /// Operator-authorized batch transfer; all legs or none.
    pub fn safe_transfer_batch(
        &mut self,
        caller: &Address,
        from: Address,
        to: Address,
        ids: &[TokenId],
        amounts: &[u64],
    ) -> Result<()> {
        if !self.may_operate(caller, &from) {
            return Err(Error::NotAuthorized);
        }
        if ids.len() != amounts.len() {
            return Err(Error::LengthMismatch);
        }
        let moves: Vec<_> = ids
            .iter()
            .zip(amounts)
            .map(|(&id, &amount)| Movement::Transfer { from, to, id, amount })
            .collect();
        self.apply(&moves)
    }

    /// Applies `moves` in order, atomically.
    ///
    /// Each move is checked against the balances left by the moves before
    /// it. On any error the ledger is unchanged.
    pub fn apply(&mut self, moves: &[Movement]) -> Result<()> {
        let (balances, supply) = self.plan(moves)?;
        for ((id, acct), bal) in balances {
            let per_id = self.balances.entry(id).or_default();
            if bal == 0 {
                per_id.remove(&acct);
            } else {
                per_id.insert(acct, bal);
            }
            if per_id.is_empty() {
                self.balances.remove(&id);
            }
        }
        for (id, s) in supply {
            if s == 0 {
                self.supply.remove(&id);
            } else {
                self.supply.insert(id, s);
            }
        }
        Ok(())
    }

    /// Validates `moves` without mutating, returning the touched entries'
    /// final values.
    #[allow(clippy::type_complexity)]
    fn plan(&self, moves: &[Movement]) -> Result<(BTreeMap<(TokenId, Address), u64>, BTreeMap<TokenId, u64>)> {
        let mut balances: BTreeMap<(TokenId, Address), u64> = BTreeMap::new();
        let mut supply: BTreeMap<TokenId, u64> = BTreeMap::new();
        let bal = |b: &BTreeMap<(TokenId, Address), u64>, id: TokenId, a: Address| {
            b.get(&(id, a)).copied().unwrap_or_else(|| self.balance(&a, &id))
        };
        let sup = |s: &BTreeMap<TokenId, u64>, id: TokenId| s.get(&id).copied().unwrap_or_else(|| self.total_supply(&id));

        for mv in moves {
            match *mv {
                Movement::Mint { to, id, amount } => {
                    if to.is_zero() {
                        return Err(Error::ZeroAddress);
                    }
                    let new_supply = sup(&supply, id).checked_add(amount).ok_or(Error::Overflow)?;
                    if id.is_right() {
                        if amount != 1 {
                            return Err(Error::NonFungibleAmount);
                        }
                        if new_supply > 1 {
                            return Err(Error::AlreadyMinted);
                        }
                    }
                    let new_bal = bal(&balances, id, to).checked_add(amount).ok_or(Error::Overflow)?;
                    balances.insert((id, to), new_bal);
                    supply.insert(id, new_supply);
                }
                Movement::Burn { from, id, amount } => {
                    if id.is_right() && amount != 1 {
                        return Err(Error::NonFungibleAmount);
                    }
                    let held = bal(&balances, id, from);
                    if held < amount {
                        return Err(Error::InsufficientBalance);
                    }
                    balances.insert((id, from), held - amount);
                    supply.insert(id, sup(&supply, id) - amount);
                }
                Movement::Transfer { from, to, id, amount } => {
                    if to.is_zero() {
                        return Err(Error::ZeroAddress);
                    }
                    if id.is_right() && amount != 1 {
                        return Err(Error::NonFungibleAmount);
                    }
                    let held = bal(&balances, id, from);
                    if held < amount {
                        return Err(Error::InsufficientBalance);
                    }
                    balances.insert((id, from), held - amount);
                    let received = bal(&balances, id, to).checked_add(amount).ok_or(Error::Overflow)?;
                    balances.insert((id, to), received);
                }
            }
        }
        Ok((balances, supply))
    }

    /// Sum of all balances of `id`; equals [`total_supply`](Self::total_supply).
    pub fn balance_sum(&self, id: &TokenId) -> u128 {
        self.holders(id).map(|(_, &b)| b as u128).sum()
    }
}

/// Terms of a two-party swap inside one property contract.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SwapDescriptor {
    pub property: Address,
    pub party_a: Address,
    pub party_b: Address,
    pub legs_a: Vec<(TokenId, u64)>,
    pub legs_b: Vec<(TokenId, u64)>,
    pub value_a: u64,
    pub value_b: u64,
}

impl SwapDescriptor {
    /// Digest both parties consent to.
    pub fn digest(&self) -> Result<Hash32> {
        canonical_digest(self)
    }

    /// Token movements the swap performs: A's legs to B, then B's legs to A.
    pub fn movements(&self) -> Vec<Movement> {
        let a_to_b = self.legs_a.iter().map(|&(id, amount)| Movement::Transfer {
            from: self.party_a,
            to: self.party_b,
            id,
            amount,
        });
        let b_to_a = self.legs_b.iter().map(|&(id, amount)| Movement::Transfer {
            from: self.party_b,
            to: self.party_a,
            id,
            amount,
        });
        a_to_b.chain(b_to_a).collect()
    }
}
