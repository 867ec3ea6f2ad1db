//! Append-only hash-chained block log and the native currency ledger.
//!
//! Block hash layout (all integers big-endian):
//!
//! ```text
//! index:u64 || timestamp:u64 || nonce:u64 || prev_hash:[u8;32]
//!     || for each tx: len:u32 || tx bytes
//! ```
//!
//! Transaction bytes are the canonical JSON encoding of [`Transaction`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::address::Address;
use crate::error::{Error, Result};
use crate::hash::{canonical_json, Hash32};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum TxStatus {
    Success,
    Rejected(String),
}

impl TxStatus {
    pub fn is_success(&self) -> bool {
        matches!(self, TxStatus::Success)
    }
}

/// One applied (or rejected) call, as recorded in a block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Transaction {
    pub caller: Address,
    pub operation: String,
    pub params: serde_json::Value,
    pub attached_value: u64,
    pub result_status: TxStatus,
}

impl Transaction {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        canonical_json(self)
    }

    pub fn encode(&self) -> Result<String> {
        // canonical JSON is always valid UTF-8
        Ok(String::from_utf8(self.to_bytes()?).expect("json is utf-8"))
    }

    pub fn decode(raw: &str) -> Result<Transaction> {
        serde_json::from_str(raw).map_err(|e| Error::Parse(format!("transaction: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Block {
    pub index: u64,
    pub timestamp: u64,
    pub nonce: u64,
    /// Encoded transactions, in application order.
    pub data: Vec<String>,
    pub prev_hash: Hash32,
    pub hash: Hash32,
}

impl Block {
    /// Bytes fed to SHA-256 for this block's hash.
    pub fn hash_preimage(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(56 + self.data.iter().map(|d| d.len() + 4).sum::<usize>());
        buf.extend_from_slice(&self.index.to_be_bytes());
        buf.extend_from_slice(&self.timestamp.to_be_bytes());
        buf.extend_from_slice(&self.nonce.to_be_bytes());
        buf.extend_from_slice(self.prev_hash.as_bytes());
        for tx in &self.data {
            buf.extend_from_slice(&(tx.len() as u32).to_be_bytes());
            buf.extend_from_slice(tx.as_bytes());
        }
        buf
    }

    pub fn compute_hash(&self) -> Hash32 {
        Hash32(Sha256::digest(self.hash_preimage()).into())
    }

    pub fn transactions(&self) -> Result<Vec<Transaction>> {
        self.data.iter().map(|raw| Transaction::decode(raw)).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chain {
    blocks: Vec<Block>,
}

impl Chain {
    /// A chain holding only the genesis block.
    pub fn genesis(timestamp: u64) -> Chain {
        let mut chain = Chain::default();
        chain
            .push(Vec::new(), timestamp)
            .expect("genesis cannot regress");
        chain
    }

    /// Seals `txs` into a new block linked to the current tip.
    ///
    /// On an empty chain this produces the genesis block (index 0, zero
    /// previous hash). Authority checks live with the caller.
    pub fn push(&mut self, txs: Vec<String>, timestamp: u64) -> Result<&Block> {
        let (index, nonce, prev_hash) = match self.blocks.last() {
            None => (0, 0, Hash32::ZERO),
            Some(tip) => {
                if timestamp < tip.timestamp {
                    return Err(Error::TimestampRegression { got: timestamp, tip: tip.timestamp });
                }
                (tip.index + 1, tip.nonce + 1, tip.hash)
            }
        };
        let mut block = Block { index, timestamp, nonce, data: txs, prev_hash, hash: Hash32::ZERO };
        block.hash = block.compute_hash();
        self.blocks.push(block);
        Ok(self.blocks.last().expect("just pushed"))
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Mutable access, for tamper tests and repair tooling.
    pub fn blocks_mut(&mut self) -> &mut Vec<Block> {
        &mut self.blocks
    }

    pub fn tip(&self) -> Option<&Block> {
        self.blocks.last()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// True iff every hash recomputes and every link, index and nonce holds.
    pub fn verify(&self) -> bool {
        let mut prev: Option<&Block> = None;
        for (i, block) in self.blocks.iter().enumerate() {
            if block.index != i as u64 || block.compute_hash() != block.hash {
                return false;
            }
            let linked = match prev {
                None => block.prev_hash == Hash32::ZERO && block.nonce == 0,
                Some(p) => {
                    block.prev_hash == p.hash
                        && Some(block.nonce) == p.nonce.checked_add(1)
                        && block.timestamp >= p.timestamp
                }
            };
            if !linked {
                return false;
            }
            prev = Some(block);
        }
        true
    }
}

/// Native currency balances in indivisible units.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NativeLedger {
    balances: BTreeMap<Address, u64>,
}

impl NativeLedger {
    pub fn balance(&self, addr: &Address) -> u64 {
        self.balances.get(addr).copied().unwrap_or(0)
    }

    /// Mints new supply. The only path that changes the total.
    pub fn credit(&mut self, to: Address, amount: u64) -> Result<()> {
        if to.is_zero() {
            return Err(Error::ZeroAddress);
        }
        let bal = self.balance(&to).checked_add(amount).ok_or(Error::Overflow)?;
        self.set(to, bal);
        Ok(())
    }

    pub fn check_funds(&self, from: &Address, amount: u64) -> Result<()> {
        if self.balance(from) < amount {
            return Err(Error::InsufficientFunds);
        }
        Ok(())
    }

    /// Moves `amount` from `from` to `to`; leaves state untouched on error.
    pub fn transfer(&mut self, from: Address, to: Address, amount: u64) -> Result<()> {
        self.transfer_all(&[(from, to, amount)])
    }

    /// Checks a sequence of transfers against running balances without
    /// mutating. Commit the result with [`commit`](Self::commit).
    pub fn plan(&self, transfers: &[(Address, Address, u64)]) -> Result<NativePlan> {
        let mut touched: BTreeMap<Address, u64> = BTreeMap::new();
        for &(from, to, amount) in transfers {
            if from.is_zero() || to.is_zero() {
                return Err(Error::ZeroAddress);
            }
            let from_bal = touched.get(&from).copied().unwrap_or_else(|| self.balance(&from));
            if from_bal < amount {
                return Err(Error::InsufficientFunds);
            }
            touched.insert(from, from_bal - amount);
            let to_bal = touched.get(&to).copied().unwrap_or_else(|| self.balance(&to));
            touched.insert(to, to_bal.checked_add(amount).ok_or(Error::Overflow)?);
        }
        Ok(NativePlan(touched))
    }

    pub fn commit(&mut self, plan: NativePlan) {
        for (addr, bal) in plan.0 {
            self.set(addr, bal);
        }
    }

    /// Applies all transfers or none.
    pub fn transfer_all(&mut self, transfers: &[(Address, Address, u64)]) -> Result<()> {
        let plan = self.plan(transfers)?;
        self.commit(plan);
        Ok(())
    }

    pub fn total_supply(&self) -> u128 {
        self.balances.values().map(|&b| b as u128).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Address, &u64)> {
        self.balances.iter()
    }

    fn set(&mut self, addr: Address, bal: u64) {
        if bal == 0 {
            self.balances.remove(&addr);
        } else {
            self.balances.insert(addr, bal);
        }
    }
}

/// Validated native balance changes, produced by [`NativeLedger::plan`].
#[derive(Debug, Clone, PartialEq, Eq)]
#[must_use]
pub struct NativePlan(BTreeMap<Address, u64>);
