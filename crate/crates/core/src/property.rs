//! Per-property contract state: initialization, the merkle approval gate,
//! right and fractional minting, purchases, burning, pricing and earnings
//! distribution.
//!
//! Every operation either applies completely or returns an error with the
//! property (and the native ledger) unchanged.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::address::Address;
use crate::chain::NativeLedger;
use crate::error::{Error, Result};
use crate::factory::{Behavior, FactoryState};
use crate::hash::Hash32;
use crate::identity::{Registry, Role};
use crate::merkle::merkle_root;
use crate::metadata::{resolve_uri, Cid};
use crate::token::{Movement, SwapDescriptor, TokenId, TokenLedger};

/// Outside state a property call may read or, for native funds, write.
pub struct Env<'a> {
    pub registry: &'a Registry,
    pub native: &'a mut NativeLedger,
    pub factory: &'a FactoryState,
}

impl Env<'_> {
    fn behavior(&self) -> Result<Behavior> {
        self.factory.behavior()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Listing {
    pub price_per_unit: u64,
    pub seller: Address,
}

/// Result of an earnings distribution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Distribution {
    pub payouts: BTreeMap<Address, u64>,
    pub remainder: u64,
}

/// Pro-rata split of `total` over `holders`: each holder gets
/// `floor(balance * total / supply)`, the rest is the remainder.
pub fn compute_distribution<'a>(holders: impl IntoIterator<Item = (&'a Address, &'a u64)>, total: u64) -> Result<Distribution> {
    let holders: Vec<(Address, u64)> = holders.into_iter().map(|(a, b)| (*a, *b)).collect();
    let supply: u128 = holders.iter().map(|&(_, b)| b as u128).sum();
    if supply == 0 {
        return Err(Error::NotFractionalized);
    }
    let mut payouts = BTreeMap::new();
    let mut paid: u64 = 0;
    for (addr, bal) in holders {
        // bal <= supply, so the quotient is <= total and fits in u64
        let share = (bal as u128 * total as u128 / supply) as u64;
        paid += share;
        payouts.insert(addr, share);
    }
    Ok(Distribution { payouts, remainder: total - paid })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PropertyState {
    property_id: u64,
    address: Address,
    initialized: bool,
    treasury: Address,
    upgrader: Address,
    admin: Address,
    base_uri: String,
    contract_name: String,
    description: String,
    approval_root: Option<Hash32>,
    approved: bool,
    documents: Vec<Cid>,
    tokens: TokenLedger,
    listings: BTreeMap<TokenId, Listing>,
    next_right_index: u64,
}

impl PropertyState {
    /// A freshly deployed, not yet initialized proxy.
    pub fn new(property_id: u64, address: Address) -> Self {
        PropertyState {
            property_id,
            address,
            initialized: false,
            treasury: Address::ZERO,
            upgrader: Address::ZERO,
            admin: Address::ZERO,
            base_uri: String::new(),
            contract_name: String::new(),
            description: String::new(),
            approval_root: None,
            approved: false,
            documents: Vec::new(),
            tokens: TokenLedger::default(),
            listings: BTreeMap::new(),
            next_right_index: 1,
        }
    }

    pub fn initialize(
        &mut self,
        treasury: Address,
        upgrader: Address,
        admin: Address,
        uri: &str,
        contract_name: &str,
        description: &str,
    ) -> Result<()> {
        if self.initialized {
            return Err(Error::AlreadyInitialized);
        }
        if treasury.is_zero() || upgrader.is_zero() || admin.is_zero() {
            return Err(Error::ZeroAddress);
        }
        self.treasury = treasury;
        self.upgrader = upgrader;
        self.admin = admin;
        self.base_uri = uri.to_string();
        self.contract_name = contract_name.to_string();
        self.description = description.to_string();
        self.initialized = true;
        Ok(())
    }

    fn ensure_initialized(&self) -> Result<()> {
        if self.initialized {
            Ok(())
        } else {
            Err(Error::Uninitialized)
        }
    }

    pub fn property_id(&self) -> Result<u64> {
        self.ensure_initialized()?;
        Ok(self.property_id)
    }

    pub fn address(&self) -> Address {
        self.address
    }

    pub fn treasury(&self) -> Address {
        self.treasury
    }

    pub fn admin(&self) -> Address {
        self.admin
    }

    pub fn upgrader(&self) -> Address {
        self.upgrader
    }

    pub fn base_uri(&self) -> &str {
        &self.base_uri
    }

    pub fn contract_name(&self) -> &str {
        &self.contract_name
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn is_approved(&self) -> bool {
        self.approved
    }

    pub fn approval_root(&self) -> Option<Hash32> {
        self.approval_root
    }

    pub fn documents(&self) -> &[Cid] {
        &self.documents
    }

    pub fn tokens(&self) -> &TokenLedger {
        &self.tokens
    }

    pub fn listings(&self) -> &BTreeMap<TokenId, Listing> {
        &self.listings
    }

    pub fn listing(&self, id: &TokenId) -> Option<&Listing> {
        self.listings.get(id)
    }

    pub fn next_right_index(&self) -> u64 {
        self.next_right_index
    }

    pub fn total_supply(&self, id: &TokenId) -> u64 {
        self.tokens.total_supply(id)
    }

    pub fn exists(&self, id: &TokenId) -> bool {
        self.tokens.exists(id)
    }

    pub fn balance_of(&self, acct: &Address, ids: &[TokenId]) -> Vec<u64> {
        self.tokens.balance_of(acct, ids)
    }

    pub fn uri_of(&self, id: &TokenId) -> Result<String> {
        self.ensure_initialized()?;
        resolve_uri(&self.base_uri, id)
    }

    /// Merkle root over the registered documents' digests, in registration order.
    pub fn document_root(&self) -> Result<Hash32> {
        if self.documents.is_empty() {
            return Err(Error::NoDocuments);
        }
        let leaves: Vec<Hash32> = self.documents.iter().map(|c| *c.digest()).collect();
        Ok(merkle_root(&leaves)?)
    }

    /// Adds a stored document to the approval set. Closed once approved.
    pub fn register_document(&mut self, caller: &Address, registry: &Registry, cid: Cid) -> Result<()> {
        self.ensure_initialized()?;
        if *caller != self.admin && !registry.has_role(caller, Role::Administrator) {
            return Err(Error::NotAuthorized);
        }
        if self.approved {
            return Err(Error::AlreadyApproved);
        }
        if self.documents.contains(&cid) {
            return Err(Error::InvalidArgument(format!("document {cid} already registered")));
        }
        self.documents.push(cid);
        Ok(())
    }

    /// Approves the property when `parent_hash` equals the document root.
    pub fn approved_property(
        &mut self,
        caller: &Address,
        registry: &Registry,
        parent_hash: Hash32,
        prop_address: Address,
    ) -> Result<()> {
        self.ensure_initialized()?;
        if !registry.has_role(caller, Role::Administrator) {
            return Err(Error::NotAuthorized);
        }
        if prop_address != self.address {
            return Err(Error::WrongProperty);
        }
        if self.approved {
            return Err(Error::AlreadyApproved);
        }
        if self.document_root()? != parent_hash {
            return Err(Error::HashMismatch);
        }
        self.approved = true;
        self.approval_root = Some(parent_hash);
        Ok(())
    }

    fn require_minter(&self, caller: &Address, registry: &Registry) -> Result<()> {
        if *caller == self.admin || registry.has_role(caller, Role::Seller) {
            Ok(())
        } else {
            Err(Error::NotAuthorized)
        }
    }

    fn ensure_mintable(&self, factory: &FactoryState) -> Result<()> {
        factory.ensure_live()?;
        if !self.approved {
            return Err(Error::NotApproved);
        }
        Ok(())
    }

    /// Mints right `id` to the caller, sends the attached value to the
    /// treasury and lists the right at `price`.
    pub fn mint_nft(
        &mut self,
        env: &mut Env<'_>,
        caller: Address,
        id: TokenId,
        data: &[u8],
        price: u64,
        attached: u64,
    ) -> Result<(TokenId, u64)> {
        let (ids, amounts) = self.mint_batch_nfts(env, caller, &[id], &[1], data, &[price], attached)?;
        Ok((ids[0], amounts[0]))
    }

    /// Mints several rights at once; any failing element rejects the batch.
    #[allow(clippy::too_many_arguments)]
    pub fn mint_batch_nfts(
        &mut self,
        env: &mut Env<'_>,
        caller: Address,
        ids: &[TokenId],
        amounts: &[u64],
        _data: &[u8],
        prices: &[u64],
        attached: u64,
    ) -> Result<(Vec<TokenId>, Vec<u64>)> {
        self.ensure_initialized()?;
        self.require_minter(&caller, env.registry)?;
        self.ensure_mintable(env.factory)?;
        if ids.len() != amounts.len() || ids.len() != prices.len() {
            return Err(Error::LengthMismatch);
        }
        if ids.iter().any(|id| !id.is_right()) {
            return Err(Error::NonRightId);
        }
        if amounts.iter().any(|&a| a != 1) {
            return Err(Error::NonFungibleAmount);
        }
        let required = prices
            .iter()
            .try_fold(0u64, |acc, &p| acc.checked_add(p))
            .ok_or(Error::Overflow)?;
        if attached < required {
            return Err(Error::InsufficientPayment);
        }
        let payment = env.native.plan(&[(caller, self.treasury, attached)])?;
        let moves: Vec<_> = ids.iter().map(|&id| Movement::Mint { to: caller, id, amount: 1 }).collect();
        self.tokens.apply(&moves)?;
        env.native.commit(payment);

        for (&id, &price) in ids.iter().zip(prices) {
            self.listings.insert(id, Listing { price_per_unit: price, seller: caller });
            let next = id_low_u64(&id).and_then(|v| v.checked_add(1));
            if let Some(next) = next {
                self.next_right_index = self.next_right_index.max(next);
            }
        }
        Ok((ids.to_vec(), amounts.to_vec()))
    }

    /// Mints `units` fungible tokens of the right's fractional class to its
    /// owner and lists them at `price_per_unit`.
    pub fn mint_fractional(
        &mut self,
        env: &mut Env<'_>,
        caller: Address,
        right: TokenId,
        units: u64,
        price_per_unit: u64,
    ) -> Result<TokenId> {
        self.ensure_initialized()?;
        self.ensure_mintable(env.factory)?;
        let fractional = right.fractional()?;
        if units == 0 {
            return Err(Error::ZeroUnits);
        }
        if self.tokens.balance(&caller, &right) != 1 {
            return Err(Error::NotOwner);
        }
        if self.tokens.exists(&fractional) {
            return Err(Error::AlreadyFractionalized);
        }
        self.tokens.apply(&[Movement::Mint { to: caller, id: fractional, amount: units }])?;
        self.listings.insert(fractional, Listing { price_per_unit, seller: caller });
        Ok(fractional)
    }

    /// Owner transfer when the caller holds `amount` and sends it elsewhere;
    /// otherwise a purchase from the listing, paid with the attached value
    /// and delivered to `to`.
    #[allow(clippy::too_many_arguments)]
    pub fn transfer_nft(
        &mut self,
        env: &mut Env<'_>,
        caller: Address,
        to: Address,
        id: TokenId,
        amount: u64,
        _data: &[u8],
        attached: u64,
    ) -> Result<()> {
        self.ensure_initialized()?;
        if to.is_zero() {
            return Err(Error::ZeroAddress);
        }
        if to != caller && self.tokens.balance(&caller, &id) >= amount {
            if attached != 0 {
                return Err(Error::InvalidArgument("owner transfers carry no value".into()));
            }
            self.tokens.apply(&[Movement::Transfer { from: caller, to, id, amount }])?;
            self.prune_listing(&id);
            return Ok(());
        }

        let listing = self
            .listings
            .get(&id)
            .filter(|l| env.registry.is_active(&l.seller))
            .cloned()
            .ok_or(Error::NoListing)?;
        let cost = amount.checked_mul(listing.price_per_unit).ok_or(Error::Overflow)?;
        if attached < cost {
            return Err(Error::InsufficientPayment);
        }
        let charged = match env.behavior()? {
            Behavior::PropertyV1 => attached,
            Behavior::PropertyV2 => cost,
        };
        let payment = env.native.plan(&[(caller, listing.seller, charged)])?;
        self.tokens.apply(&[Movement::Transfer { from: listing.seller, to, id, amount }])?;
        env.native.commit(payment);
        self.prune_listing(&id);
        Ok(())
    }

    pub fn burn_nft(&mut self, caller: &Address, from: Address, id: TokenId, amount: u64) -> Result<()> {
        self.burn_batch_nfts(caller, from, &[id], &[amount])
    }

    pub fn burn_batch_nfts(&mut self, caller: &Address, from: Address, ids: &[TokenId], amounts: &[u64]) -> Result<()> {
        self.ensure_initialized()?;
        if !self.tokens.may_operate(caller, &from) {
            return Err(Error::NotAuthorized);
        }
        if ids.len() != amounts.len() {
            return Err(Error::LengthMismatch);
        }
        let mut scratch = self.tokens.clone();
        for (&id, &amount) in ids.iter().zip(amounts) {
            if id.is_right() && scratch.exists(&id.fractional()?) {
                return Err(Error::FractionalSupplyOutstanding);
            }
            scratch.apply(&[Movement::Burn { from, id, amount }])?;
        }
        self.tokens = scratch;
        for id in ids {
            self.prune_listing(id);
        }
        Ok(())
    }

    /// Reprices a listing, or opens one for a holder when none exists.
    pub fn set_price(&mut self, caller: &Address, id: TokenId, price_per_unit: u64) -> Result<()> {
        self.ensure_initialized()?;
        match self.listings.get_mut(&id) {
            Some(listing) if listing.seller == *caller => {
                listing.price_per_unit = price_per_unit;
                Ok(())
            }
            Some(_) => Err(Error::NotAuthorized),
            None => {
                if !self.tokens.exists(&id) {
                    return Err(Error::UnknownToken);
                }
                if self.tokens.balance(caller, &id) == 0 {
                    return Err(Error::NotAuthorized);
                }
                self.listings.insert(id, Listing { price_per_unit, seller: *caller });
                Ok(())
            }
        }
    }

    /// Splits `total` over the right's fractional holders; the remainder and
    /// any surplus attached value go to the treasury.
    pub fn distribute_earnings(
        &mut self,
        env: &mut Env<'_>,
        caller: Address,
        right: TokenId,
        total: u64,
        attached: u64,
    ) -> Result<Distribution> {
        self.ensure_initialized()?;
        let fractional = right.fractional()?;
        if self.tokens.owner_of(&right) != Some(caller) && caller != self.admin {
            return Err(Error::NotAuthorized);
        }
        if !self.tokens.exists(&fractional) {
            return Err(Error::NotFractionalized);
        }
        if attached < total {
            return Err(Error::InsufficientPayment);
        }
        let dist = compute_distribution(self.tokens.holders(&fractional), total)?;
        let mut transfers: Vec<_> = dist
            .payouts
            .iter()
            .filter(|(_, &p)| p > 0)
            .map(|(&h, &p)| (caller, h, p))
            .collect();
        let to_treasury = dist.remainder + (attached - total);
        transfers.push((caller, self.treasury, to_treasury));
        // the whole attached value must be covered, even parts that loop back
        env.native.check_funds(&caller, attached)?;
        env.native.transfer_all(&transfers)?;
        Ok(dist)
    }

    pub fn set_approval_for_all(&mut self, owner: Address, operator: Address, approved: bool) -> Result<()> {
        self.ensure_initialized()?;
        self.tokens.set_approval_for_all(owner, operator, approved)
    }

    pub fn safe_transfer_batch(
        &mut self,
        caller: &Address,
        from: Address,
        to: Address,
        ids: &[TokenId],
        amounts: &[u64],
    ) -> Result<()> {
        self.ensure_initialized()?;
        self.tokens.safe_transfer_batch(caller, from, to, ids, amounts)?;
        for id in ids {
            self.prune_listing(id);
        }
        Ok(())
    }

    /// Executes a consented swap: tokens and native values both ways.
    pub fn execute_swap(&mut self, native: &mut NativeLedger, swap: &SwapDescriptor) -> Result<()> {
        self.ensure_initialized()?;
        if swap.property != self.address {
            return Err(Error::WrongProperty);
        }
        let payment = native.plan(&[
            (swap.party_a, swap.party_b, swap.value_a),
            (swap.party_b, swap.party_a, swap.value_b),
        ])?;
        let moves = swap.movements();
        self.tokens.apply(&moves)?;
        native.commit(payment);
        for mv in moves {
            if let Movement::Transfer { id, .. } = mv {
                self.prune_listing(&id);
            }
        }
        Ok(())
    }

    /// Drops a listing whose seller no longer holds the token.
    fn prune_listing(&mut self, id: &TokenId) {
        if let Some(l) = self.listings.get(id) {
            if self.tokens.balance(&l.seller, id) == 0 {
                self.listings.remove(id);
            }
        }
    }
}

fn id_low_u64(id: &TokenId) -> Option<u64> {
    if id.0[..24].iter().any(|&b| b != 0) {
        return None;
    }
    Some(u64::from_be_bytes(id.0[24..].try_into().expect("8 bytes")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factory::ImplementationVersion;
    use crate::identity::AllowAll;

    struct Fixture {
        registry: Registry,
        native: NativeLedger,
        factory: FactoryState,
        prop: PropertyState,
        admin: Address,
        seller: Address,
        buyer: Address,
        treasury: Address,
    }

    impl Fixture {
        fn new() -> Self {
            let mut registry = Registry::default();
            let info = Cid::of(b"info");
            let admin = registry.bootstrap(b"admin", info).unwrap();
            let seller = registry.register(&admin, Role::Seller, b"seller", info, &AllowAll).unwrap();
            let buyer = registry.register(&admin, Role::Buyer, b"buyer", info, &AllowAll).unwrap();
            let mut factory = FactoryState::default();
            factory
                .initialize(ImplementationVersion::new(1, Behavior::PropertyV1), admin, admin)
                .unwrap();
            let treasury = Address([0x77; 20]);
            let mut prop = PropertyState::new(1, factory.next_proxy_address());
            prop.initialize(treasury, admin, admin, "ipfs://base/{id}.json", "Villa", "A villa").unwrap();
            let mut native = NativeLedger::default();
            native.credit(buyer, 10_000).unwrap();
            native.credit(seller, 10_000).unwrap();
            Fixture { registry, native, factory, prop, admin, seller, buyer, treasury }
        }

        fn env(&mut self) -> (Env<'_>, &mut PropertyState) {
            (Env { registry: &self.registry, native: &mut self.native, factory: &self.factory }, &mut self.prop)
        }

        fn approve(&mut self) {
            let doc = Cid::of(b"deed");
            self.prop.register_document(&self.admin, &self.registry, doc).unwrap();
            let root = *doc.digest();
            let addr = self.prop.address();
            self.prop.approved_property(&self.admin, &self.registry, root, addr).unwrap();
        }

        fn mint_right(&mut self, n: u64, price: u64) {
            let seller = self.seller;
            let (mut env, prop) = self.env();
            prop.mint_nft(&mut env, seller, TokenId::from_u64(n), b"", price, price).unwrap();
        }
    }

    #[test]
    fn initialize_once_and_uri() {
        let mut fx = Fixture::new();
        assert_eq!(
            fx.prop.initialize(fx.treasury, fx.admin, fx.admin, "x", "y", "z"),
            Err(Error::AlreadyInitialized)
        );
        assert_eq!(fx.prop.property_id(), Ok(1));
        let uri = fx.prop.uri_of(&TokenId::from_u64(2)).unwrap();
        assert_eq!(uri, format!("ipfs://base/{}2.json", "0".repeat(63)));
        let fresh = PropertyState::new(2, Address([3; 20]));
        assert_eq!(fresh.property_id(), Err(Error::Uninitialized));
        assert_eq!(fresh.uri_of(&TokenId::from_u64(1)), Err(Error::Uninitialized));
    }

    #[test]
    fn approval_gate() {
        let mut fx = Fixture::new();
        let addr = fx.prop.address();
        assert_eq!(
            fx.prop.approved_property(&fx.admin, &fx.registry, Hash32::ZERO, addr),
            Err(Error::NoDocuments)
        );
        let docs = [Cid::of(b"deed"), Cid::of(b"survey"), Cid::of(b"title")];
        for d in docs {
            fx.prop.register_document(&fx.admin, &fx.registry, d).unwrap();
        }
        let root = fx.prop.document_root().unwrap();
        let mut flipped = root;
        flipped.0[0] ^= 1;
        assert_eq!(fx.prop.approved_property(&fx.admin, &fx.registry, flipped, addr), Err(Error::HashMismatch));
        assert_eq!(
            fx.prop.approved_property(&fx.seller, &fx.registry, root, addr),
            Err(Error::NotAuthorized)
        );
        assert_eq!(
            fx.prop.approved_property(&fx.admin, &fx.registry, root, Address([1; 20])),
            Err(Error::WrongProperty)
        );
        assert!(!fx.prop.is_approved());
        fx.prop.approved_property(&fx.admin, &fx.registry, root, addr).unwrap();
        assert!(fx.prop.is_approved());
        assert_eq!(fx.prop.approval_root(), Some(root));
        assert_eq!(fx.prop.approved_property(&fx.admin, &fx.registry, root, addr), Err(Error::AlreadyApproved));
    }

    #[test]
    fn mint_requires_approval() {
        let mut fx = Fixture::new();
        let seller = fx.seller;
        let before = fx.prop.clone();
        let (mut env, prop) = fx.env();
        assert_eq!(prop.mint_nft(&mut env, seller, TokenId::from_u64(1), b"", 0, 0), Err(Error::NotApproved));
        assert_eq!(fx.prop, before);
    }

    #[test]
    fn mint_nft_cases() {
        let mut fx = Fixture::new();
        fx.approve();
        let (seller, buyer, treasury) = (fx.seller, fx.buyer, fx.treasury);
        let r1 = TokenId::from_u64(1);
        {
            let (mut env, prop) = fx.env();
            assert_eq!(prop.mint_nft(&mut env, seller, r1, b"", 0, 0), Ok((r1, 1)));
            assert_eq!(prop.mint_nft(&mut env, seller, r1, b"", 0, 0), Err(Error::AlreadyMinted));
            assert_eq!(prop.mint_nft(&mut env, buyer, TokenId::from_u64(2), b"", 0, 0), Err(Error::NotAuthorized));
            assert_eq!(
                prop.mint_nft(&mut env, seller, TokenId::from_u64(3), b"", 100, 99),
                Err(Error::InsufficientPayment)
            );
            assert_eq!(prop.mint_nft(&mut env, seller, r1.fractional().unwrap(), b"", 0, 0), Err(Error::NonRightId));
            prop.mint_nft(&mut env, seller, TokenId::from_u64(3), b"", 100, 100).unwrap();
        }
        assert_eq!(fx.prop.total_supply(&r1), 1);
        assert_eq!(fx.prop.tokens().owner_of(&r1), Some(seller));
        assert_eq!(fx.native.balance(&treasury), 100);
        assert_eq!(fx.native.balance(&seller), 9_900);
        assert_eq!(fx.prop.next_right_index(), 4);
    }

    #[test]
    fn batch_mint_is_atomic() {
        let mut fx = Fixture::new();
        fx.approve();
        fx.mint_right(2, 0);
        let seller = fx.seller;
        let before = fx.prop.clone();
        let ids: Vec<_> = (1..=3).map(TokenId::from_u64).collect();
        let (mut env, prop) = fx.env();
        assert_eq!(
            prop.mint_batch_nfts(&mut env, seller, &ids, &[1, 1, 1], b"", &[0, 0, 0], 0),
            Err(Error::AlreadyMinted)
        );
        assert_eq!(prop.mint_batch_nfts(&mut env, seller, &[], &[], b"", &[], 0), Ok((vec![], vec![])));
        assert_eq!(
            prop.mint_batch_nfts(&mut env, seller, &ids[..1], &[1, 1], b"", &[0], 0),
            Err(Error::LengthMismatch)
        );
        assert_eq!(fx.prop, before);
    }

    #[test]
    fn fractionalize_and_purchase() {
        let mut fx = Fixture::new();
        fx.approve();
        fx.mint_right(1, 0);
        let (seller, buyer) = (fx.seller, fx.buyer);
        let r1 = TokenId::from_u64(1);
        let f1 = r1.fractional().unwrap();
        {
            let (mut env, prop) = fx.env();
            assert_eq!(prop.mint_fractional(&mut env, seller, r1, 0, 3), Err(Error::ZeroUnits));
            assert_eq!(prop.mint_fractional(&mut env, buyer, r1, 10, 3), Err(Error::NotOwner));
            assert_eq!(prop.mint_fractional(&mut env, seller, r1, 1000, 3), Ok(f1));
            assert_eq!(prop.mint_fractional(&mut env, seller, r1, 1000, 3), Err(Error::AlreadyFractionalized));
            assert_eq!(
                prop.transfer_nft(&mut env, buyer, buyer, f1, 200, b"", 599),
                Err(Error::InsufficientPayment)
            );
            prop.transfer_nft(&mut env, buyer, buyer, f1, 200, b"", 600).unwrap();
        }
        assert_eq!(fx.prop.total_supply(&f1), 1000);
        assert_eq!(fx.prop.balance_of(&buyer, &[f1]), vec![200]);
        assert_eq!(fx.native.balance(&seller), 10_600);
        assert_eq!(fx.native.balance(&buyer), 9_400);
        assert_eq!(fx.prop.tokens().owner_of(&r1), Some(seller));
    }

    #[test]
    fn owner_gift_moves_no_value() {
        let mut fx = Fixture::new();
        fx.approve();
        fx.mint_right(1, 0);
        let (seller, buyer) = (fx.seller, fx.buyer);
        let r1 = TokenId::from_u64(1);
        let native_before = fx.native.clone();
        let (mut env, prop) = fx.env();
        prop.transfer_nft(&mut env, seller, buyer, r1, 1, b"", 0).unwrap();
        assert_eq!(fx.prop.tokens().owner_of(&r1), Some(buyer));
        assert_eq!(fx.native, native_before);
        // seller's listing went with the token
        assert!(fx.prop.listing(&r1).is_none());
    }

    #[test]
    fn set_price_rules() {
        let mut fx = Fixture::new();
        fx.approve();
        fx.mint_right(1, 0);
        let (seller, buyer) = (fx.seller, fx.buyer);
        let r1 = TokenId::from_u64(1);
        let f1 = {
            let (mut env, prop) = fx.env();
            prop.mint_fractional(&mut env, seller, r1, 100, 3).unwrap()
        };
        assert_eq!(fx.prop.set_price(&buyer, f1, 1), Err(Error::NotAuthorized));
        assert_eq!(fx.prop.set_price(&seller, TokenId::from_u64(9), 1), Err(Error::UnknownToken));
        fx.prop.set_price(&seller, f1, 5).unwrap();
        let (mut env, prop) = fx.env();
        assert_eq!(prop.transfer_nft(&mut env, buyer, buyer, f1, 10, b"", 30), Err(Error::InsufficientPayment));
        prop.transfer_nft(&mut env, buyer, buyer, f1, 10, b"", 50).unwrap();
        prop.set_price(&seller, f1, 0).unwrap();
        prop.transfer_nft(&mut env, buyer, buyer, f1, 10, b"", 0).unwrap();
        assert_eq!(prop.balance_of(&buyer, &[f1]), vec![20]);
    }

    #[test]
    fn burn_rules() {
        let mut fx = Fixture::new();
        fx.approve();
        fx.mint_right(1, 0);
        fx.mint_right(2, 0);
        let (seller, buyer) = (fx.seller, fx.buyer);
        let r1 = TokenId::from_u64(1);
        let f2 = {
            let (mut env, prop) = fx.env();
            prop.mint_fractional(&mut env, seller, TokenId::from_u64(2), 50, 1).unwrap()
        };
        assert_eq!(fx.prop.burn_nft(&buyer, seller, r1, 1), Err(Error::NotAuthorized));
        assert_eq!(fx.prop.burn_nft(&seller, seller, TokenId::from_u64(2), 1), Err(Error::FractionalSupplyOutstanding));
        fx.prop.burn_nft(&seller, seller, f2, 0).unwrap();
        let before = fx.prop.clone();
        assert_eq!(
            fx.prop.burn_batch_nfts(&seller, seller, &[r1, f2], &[1, 51]),
            Err(Error::InsufficientBalance)
        );
        assert_eq!(fx.prop, before);
        fx.prop.burn_nft(&seller, seller, r1, 1).unwrap();
        assert!(!fx.prop.exists(&r1));
        // burning all units then the anchor in one batch is sequentially valid
        fx.prop
            .burn_batch_nfts(&seller, seller, &[f2, TokenId::from_u64(2)], &[50, 1])
            .unwrap();
        assert!(fx.prop.tokens().ids().next().is_none());
        assert!(fx.prop.listings().is_empty());
    }

    #[test]
    fn distribution_worked_instance() {
        let a = Address([1; 20]);
        let b = Address([2; 20]);
        let holders = [(a, 600u64), (b, 400u64)];
        let d = compute_distribution(holders.iter().map(|(x, y)| (x, y)), 1001).unwrap();
        assert_eq!(d.payouts[&a], 600);
        assert_eq!(d.payouts[&b], 400);
        assert_eq!(d.remainder, 1);
        let all = [(a, 1000u64)];
        let d = compute_distribution(all.iter().map(|(x, y)| (x, y)), 777).unwrap();
        assert_eq!((d.payouts[&a], d.remainder), (777, 0));
        let d = compute_distribution(holders.iter().map(|(x, y)| (x, y)), 0).unwrap();
        assert!(d.payouts.values().all(|&p| p == 0));
    }

    #[test]
    fn distribute_earnings_settles_native() {
        let mut fx = Fixture::new();
        fx.approve();
        fx.mint_right(1, 0);
        let (seller, buyer, treasury) = (fx.seller, fx.buyer, fx.treasury);
        let r1 = TokenId::from_u64(1);
        let (mut env, prop) = fx.env();
        assert_eq!(prop.distribute_earnings(&mut env, seller, r1, 10, 10), Err(Error::NotFractionalized));
        let f1 = prop.mint_fractional(&mut env, seller, r1, 1000, 0).unwrap();
        prop.transfer_nft(&mut env, seller, buyer, f1, 400, b"", 0).unwrap();
        assert_eq!(prop.distribute_earnings(&mut env, buyer, r1, 10, 10), Err(Error::NotAuthorized));
        assert_eq!(prop.distribute_earnings(&mut env, seller, r1, 1001, 1000), Err(Error::InsufficientPayment));
        let d = prop.distribute_earnings(&mut env, seller, r1, 1001, 1001).unwrap();
        assert_eq!(d.payouts[&seller], 600);
        assert_eq!(d.payouts[&buyer], 400);
        assert_eq!(d.remainder, 1);
        assert_eq!(fx.native.balance(&buyer), 10_400);
        assert_eq!(fx.native.balance(&seller), 10_000 - 1001 + 600);
        assert_eq!(fx.native.balance(&treasury), 1);
    }

    #[test]
    fn paused_factory_blocks_minting_only() {
        let mut fx = Fixture::new();
        fx.approve();
        fx.mint_right(1, 0);
        let (admin, seller, buyer) = (fx.admin, fx.seller, fx.buyer);
        fx.factory.pause(&admin).unwrap();
        let (mut env, prop) = fx.env();
        assert_eq!(prop.mint_nft(&mut env, seller, TokenId::from_u64(2), b"", 0, 0), Err(Error::Paused));
        assert_eq!(prop.mint_fractional(&mut env, seller, TokenId::from_u64(1), 5, 0), Err(Error::Paused));
        prop.transfer_nft(&mut env, seller, buyer, TokenId::from_u64(1), 1, b"", 0).unwrap();
    }

    #[test]
    fn v2_refunds_overpayment() {
        let mut fx = Fixture::new();
        fx.approve();
        fx.mint_right(1, 0);
        let (seller, buyer, admin) = (fx.seller, fx.buyer, fx.admin);
        fx.factory
            .authorize_upgrade(&admin, ImplementationVersion::new(2, Behavior::PropertyV2))
            .unwrap();
        let (mut env, prop) = fx.env();
        let f1 = prop.mint_fractional(&mut env, seller, TokenId::from_u64(1), 100, 3).unwrap();
        prop.transfer_nft(&mut env, buyer, buyer, f1, 10, b"", 50).unwrap();
        assert_eq!(fx.native.balance(&buyer), 10_000 - 30);
        assert_eq!(fx.native.balance(&seller), 10_000 + 30);
    }
}
