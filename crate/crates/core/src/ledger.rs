//! The single-writer ledger: world state, content store and block log.
//!
//! Every mutation enters through [`Ledger::execute`] as a [`Call`]. The call
//! is applied atomically and recorded as one [`Transaction`] (successful or
//! rejected) in the pending batch; [`Ledger::seal_block`] moves the batch
//! into a new block. Replaying the successful transactions of a chain from
//! genesis reproduces the same state.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::address::Address;
use crate::chain::{Block, Chain, NativeLedger, Transaction, TxStatus};
use crate::error::{Error, Result};
use crate::factory::{FactoryState, ImplementationVersion};
use crate::hash::{canonical_digest, Hash32, HexBytes};
use crate::identity::{AllowAll, Registry, Role, Verifier};
use crate::metadata::{build_right_metadata, Cid, ObjectStore, RightMetadata};
use crate::property::{Distribution, Env, PropertyState};
use crate::token::{SwapDescriptor, TokenId};

/// A state-changing request. Serializes as `{"operation": .., "params": ..}`,
/// which is exactly how it appears inside a recorded transaction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "operation", content = "params", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum Call {
    /// Registers the first administrator; only valid on an empty registry.
    Bootstrap { public_key: HexBytes, info: HexBytes },
    Faucet { to: Address, amount: u64 },
    TransferNative { to: Address, amount: u64 },
    PutObject { bytes: HexBytes },
    BuildRightMetadata { metadata: RightMetadata },
    RegisterStakeholder { role: Role, public_key: HexBytes, info: Cid },
    GrantRole { target: Address, role: Role },
    RemoveStakeholder { target: Address },
    InitializeFactory { implementation: ImplementationVersion, admin: Address, upgrader: Address },
    #[serde(rename = "DeployedProperty")]
    DeployPropertyContract {
        treasury: Address,
        upgrader: Address,
        admin: Address,
        uri: String,
        contract_name: String,
        description: String,
    },
    Pause {},
    Unpause {},
    AuthorizeUpgrade { implementation: ImplementationVersion },
    RegisterDocument { property: Address, cid: Cid },
    ApprovedProperty { property: Address, parent_hash: Hash32, prop_address: Address },
    #[serde(rename = "mintNFT")]
    MintNft { property: Address, id: TokenId, data: HexBytes, price: u64 },
    #[serde(rename = "mintBatchNFTs")]
    MintBatchNfts { property: Address, ids: Vec<TokenId>, amounts: Vec<u64>, data: HexBytes, prices: Vec<u64> },
    MintFractional { property: Address, right_id: TokenId, units: u64, price_per_unit: u64 },
    #[serde(rename = "transferNFT")]
    TransferNft { property: Address, to: Address, id: TokenId, amount: u64, data: HexBytes },
    #[serde(rename = "burnNFT")]
    BurnNft { property: Address, from: Address, id: TokenId, amount: u64 },
    #[serde(rename = "burnBatchNFTs")]
    BurnBatchNfts { property: Address, from: Address, ids: Vec<TokenId>, amounts: Vec<u64> },
    SetPrice { property: Address, id: TokenId, price_per_unit: u64 },
    DistributeEarnings { property: Address, right_id: TokenId, total: u64 },
    SetApprovalForAll { property: Address, operator: Address, approved: bool },
    SafeTransferBatch { property: Address, from: Address, to: Address, ids: Vec<TokenId>, amounts: Vec<u64> },
    ConsentSwap { swap: SwapDescriptor },
    AtomicSwap { swap: SwapDescriptor },
}

impl Call {
    /// Calls that accept attached native value.
    pub fn is_payable(&self) -> bool {
        matches!(
            self,
            Call::MintNft { .. } | Call::MintBatchNfts { .. } | Call::TransferNft { .. } | Call::DistributeEarnings { .. }
        )
    }

    /// Calls gated by the factory's pause switch.
    pub fn is_mint(&self) -> bool {
        matches!(self, Call::MintNft { .. } | Call::MintBatchNfts { .. } | Call::MintFractional { .. })
    }

    fn split(&self) -> Result<(String, serde_json::Value)> {
        let value = serde_json::to_value(self).map_err(|e| Error::Encoding(e.to_string()))?;
        let serde_json::Value::Object(mut map) = value else {
            return Err(Error::Encoding("call did not encode as an object".into()));
        };
        let op = match map.remove("operation") {
            Some(serde_json::Value::String(s)) => s,
            _ => return Err(Error::Encoding("call has no operation tag".into())),
        };
        let params = map.remove("params").unwrap_or_else(|| serde_json::json!({}));
        Ok((op, params))
    }

    /// Rebuilds the call recorded in `tx`.
    pub fn from_transaction(tx: &Transaction) -> Result<Call> {
        let value = serde_json::json!({ "operation": tx.operation, "params": tx.params });
        serde_json::from_value(value).map_err(|e| Error::Parse(format!("recorded call `{}`: {e}", tx.operation)))
    }
}

/// What a successful call returns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase", tag = "kind", content = "value")]
pub enum Outcome {
    Done,
    Address(Address),
    Cid(Cid),
    Token(TokenId),
    Minted { ids: Vec<TokenId>, amounts: Vec<u64> },
    Distribution(Distribution),
}

/// Everything except the block log and object bytes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldState {
    pub accounts: NativeLedger,
    pub stakeholders: Registry,
    pub factory: FactoryState,
    pub properties: BTreeMap<Address, PropertyState>,
    /// (swap digest, consenting party)
    pub consents: BTreeSet<(Hash32, Address)>,
}

#[derive(Clone)]
pub struct Ledger {
    state: WorldState,
    store: ObjectStore,
    chain: Chain,
    pending: Vec<Transaction>,
    verifier: Arc<dyn Verifier>,
}

impl fmt::Debug for Ledger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Ledger")
            .field("blocks", &self.chain.len())
            .field("pending", &self.pending.len())
            .field("properties", &self.state.properties.len())
            .finish()
    }
}

impl Ledger {
    /// A ledger holding only the genesis block.
    pub fn genesis(timestamp: u64) -> Ledger {
        Ledger::from_parts(WorldState::default(), ObjectStore::default(), Chain::genesis(timestamp))
    }

    pub fn from_parts(state: WorldState, store: ObjectStore, chain: Chain) -> Ledger {
        Ledger { state, store, chain, pending: Vec::new(), verifier: Arc::new(AllowAll) }
    }

    pub fn with_verifier(mut self, verifier: Arc<dyn Verifier>) -> Ledger {
        self.verifier = verifier;
        self
    }

    pub fn set_verifier(&mut self, verifier: Arc<dyn Verifier>) {
        self.verifier = verifier;
    }

    pub fn state(&self) -> &WorldState {
        &self.state
    }

    pub fn store(&self) -> &ObjectStore {
        &self.store
    }

    pub fn chain(&self) -> &Chain {
        &self.chain
    }

    pub fn pending(&self) -> &[Transaction] {
        &self.pending
    }

    pub fn registry(&self) -> &Registry {
        &self.state.stakeholders
    }

    pub fn factory(&self) -> &FactoryState {
        &self.state.factory
    }

    pub fn native_balance(&self, addr: &Address) -> u64 {
        self.state.accounts.balance(addr)
    }

    pub fn property(&self, addr: &Address) -> Result<&PropertyState> {
        self.state
            .properties
            .get(addr)
            .ok_or_else(|| Error::UnknownProperty(addr.to_string()))
    }

    pub fn has_role(&self, addr: &Address, role: Role) -> bool {
        self.state.stakeholders.has_role(addr, role)
    }

    pub fn verify_chain(&self) -> bool {
        self.chain.verify()
    }

    /// SHA-256 of the canonical encoding of the world state plus the set of
    /// stored object ids. Excludes the block log. The factory's binding
    /// enters only through its behavior, so an upgrade to a new version with
    /// the same behavior leaves the digest unchanged.
    pub fn state_digest(&self) -> Hash32 {
        let mut state = serde_json::to_value(&self.state).expect("world state always encodes");
        if let Some(logic) = self.state.factory.logic.as_ref() {
            state["factory"]["logic"] = serde_json::Value::String(logic.behavior_tag.clone());
        }
        let objects: Vec<&Cid> = self.store.cids().collect();
        canonical_digest(&serde_json::json!({ "state": state, "objects": objects }))
            .expect("world state always encodes")
    }

    /// Addresses that may receive assets: registered stakeholders, property
    /// contracts and their treasuries, and the factory.
    pub fn is_known(&self, addr: &Address) -> bool {
        self.state.stakeholders.get(addr).is_some()
            || self.state.properties.contains_key(addr)
            || self.state.properties.values().any(|p| p.treasury() == *addr)
            || self.state.factory.address == *addr
    }

    /// Applies `call` for `caller` with `attached` native value, recording
    /// the outcome as one transaction in the pending batch.
    pub fn execute(&mut self, caller: Address, call: Call, attached: u64) -> Result<Outcome> {
        let (operation, mut params) = call.split()?;
        let result = self.apply(caller, &call, attached);
        let result_status = match &result {
            Ok(outcome) => {
                if let (Call::DeployPropertyContract { .. }, Outcome::Address(addr), Some(obj)) =
                    (&call, outcome, params.as_object_mut())
                {
                    obj.insert("address".into(), serde_json::Value::String(addr.to_string()));
                }
                TxStatus::Success
            }
            Err(e) => TxStatus::Rejected(e.code().to_string()),
        };
        self.pending.push(Transaction { caller, operation, params, attached_value: attached, result_status });
        result
    }

    /// Seals the pending batch into a block. `validator` must be an active
    /// administrator.
    pub fn seal_block(&mut self, validator: &Address, timestamp: u64) -> Result<&Block> {
        if !self.state.stakeholders.has_role(validator, Role::Administrator) {
            return Err(Error::NotAuthorized);
        }
        let data = self.pending.iter().map(Transaction::encode).collect::<Result<Vec<_>>>()?;
        self.chain.push(data, timestamp)?;
        self.pending.clear();
        Ok(self.chain.tip().expect("just pushed"))
    }

    /// Drops the pending batch without recording it.
    pub fn discard_pending(&mut self) {
        self.pending.clear();
    }

    /// Rebuilds a ledger by re-executing every transaction of `chain` from
    /// its genesis block, checking each outcome and block hash on the way.
    pub fn replay(chain: &Chain) -> Result<Ledger> {
        let genesis = chain
            .blocks()
            .first()
            .ok_or_else(|| Error::ReplayDivergence("chain has no genesis block".into()))?;
        let mut ledger = Ledger::genesis(genesis.timestamp);
        if ledger.chain.blocks()[0] != *genesis {
            return Err(Error::ReplayDivergence("genesis block differs".into()));
        }
        for block in &chain.blocks()[1..] {
            for tx in block.transactions()? {
                let call = Call::from_transaction(&tx)?;
                // the verifier's decision is part of the record
                let rejected = tx.result_status == TxStatus::Rejected(Error::VerificationRejected.code().into());
                ledger.verifier = if rejected { Arc::new(RejectAll) } else { Arc::new(AllowAll) };
                let result = ledger.execute(tx.caller, call, tx.attached_value);
                let replayed = &ledger.pending.last().expect("execute records").result_status;
                if *replayed != tx.result_status {
                    return Err(Error::ReplayDivergence(format!(
                        "block {} op {}: recorded {:?}, replayed {:?}",
                        block.index,
                        tx.operation,
                        tx.result_status,
                        result.err()
                    )));
                }
            }
            let data = ledger.pending.iter().map(Transaction::encode).collect::<Result<Vec<_>>>()?;
            ledger.pending.clear();
            let rebuilt = ledger.chain.push(data, block.timestamp)?;
            if rebuilt != block {
                return Err(Error::ReplayDivergence(format!("block {} hash differs", block.index)));
            }
        }
        ledger.verifier = Arc::new(AllowAll);
        Ok(ledger)
    }

    fn apply(&mut self, caller: Address, call: &Call, attached: u64) -> Result<Outcome> {
        if let Call::Bootstrap { public_key, info } = call {
            if attached != 0 {
                return Err(Error::InvalidArgument("operation is not payable".into()));
            }
            let registry = &mut self.state.stakeholders;
            if registry.records().next().is_some() {
                return Err(Error::AlreadyInitialized);
            }
            if public_key.0.is_empty() {
                return Err(Error::InvalidArgument("public key must not be empty".into()));
            }
            if Address::from_public_key(&public_key.0) != caller {
                return Err(Error::NotAuthorized);
            }
            let mut store = self.store.clone();
            let cid = store.put(&info.0)?;
            let addr = registry.bootstrap(&public_key.0, cid)?;
            self.store = store;
            return Ok(Outcome::Address(addr));
        }

        if !self.state.stakeholders.is_active(&caller) {
            return Err(Error::NotAuthorized);
        }
        if attached != 0 && !call.is_payable() {
            return Err(Error::InvalidArgument("operation is not payable".into()));
        }
        let is_admin = self.state.stakeholders.has_role(&caller, Role::Administrator);

        match call {
            Call::Bootstrap { .. } => unreachable!("handled above"),
            Call::Faucet { to, amount } => {
                if !is_admin {
                    return Err(Error::NotAuthorized);
                }
                self.require_known(to)?;
                self.state.accounts.credit(*to, *amount)?;
                Ok(Outcome::Done)
            }
            Call::TransferNative { to, amount } => {
                self.require_known(to)?;
                self.state.accounts.transfer(caller, *to, *amount)?;
                Ok(Outcome::Done)
            }
            Call::PutObject { bytes } => Ok(Outcome::Cid(self.store.put(&bytes.0)?)),
            Call::BuildRightMetadata { metadata } => Ok(Outcome::Cid(build_right_metadata(&mut self.store, metadata)?)),
            Call::RegisterStakeholder { role, public_key, info } => {
                if !is_admin {
                    return Err(Error::NotAuthorized);
                }
                if !self.store.contains(info) {
                    return Err(Error::NotFound(info.to_string()));
                }
                let addr =
                    self.state
                        .stakeholders
                        .register(&caller, *role, &public_key.0, *info, self.verifier.as_ref())?;
                Ok(Outcome::Address(addr))
            }
            Call::GrantRole { target, role } => {
                self.state.stakeholders.grant_role(&caller, target, *role)?;
                Ok(Outcome::Done)
            }
            Call::RemoveStakeholder { target } => {
                self.state.stakeholders.remove(&caller, target)?;
                Ok(Outcome::Done)
            }
            Call::InitializeFactory { implementation, admin, upgrader } => {
                if !is_admin {
                    return Err(Error::NotAuthorized);
                }
                self.state.factory.initialize(implementation.clone(), *admin, *upgrader)?;
                Ok(Outcome::Done)
            }
            Call::DeployPropertyContract { treasury, upgrader, admin, uri, contract_name, description } => {
                let factory = &self.state.factory;
                factory.implementation()?;
                if !is_admin && !self.state.stakeholders.has_role(&caller, Role::Seller) {
                    return Err(Error::NotAuthorized);
                }
                if factory.paused {
                    return Err(Error::Paused);
                }
                let address = factory.next_proxy_address();
                let property_id = factory.proxy_len() as u64 + 1;
                let mut prop = PropertyState::new(property_id, address);
                prop.initialize(*treasury, *upgrader, *admin, uri, contract_name, description)?;
                let assigned = self.state.factory.push_proxy(address);
                debug_assert_eq!(assigned, property_id);
                self.state.properties.insert(address, prop);
                Ok(Outcome::Address(address))
            }
            Call::Pause {} => {
                self.state.factory.pause(&caller)?;
                Ok(Outcome::Done)
            }
            Call::Unpause {} => {
                self.state.factory.unpause(&caller)?;
                Ok(Outcome::Done)
            }
            Call::AuthorizeUpgrade { implementation } => {
                self.state.factory.authorize_upgrade(&caller, implementation.clone())?;
                Ok(Outcome::Done)
            }
            Call::RegisterDocument { property, cid } => {
                if !self.store.contains(cid) {
                    return Err(Error::NotFound(cid.to_string()));
                }
                let registry = &self.state.stakeholders;
                let prop = prop_mut(&mut self.state.properties, property)?;
                prop.register_document(&caller, registry, *cid)?;
                Ok(Outcome::Done)
            }
            Call::ApprovedProperty { property, parent_hash, prop_address } => {
                let registry = &self.state.stakeholders;
                let prop = prop_mut(&mut self.state.properties, property)?;
                prop.approved_property(&caller, registry, *parent_hash, *prop_address)?;
                Ok(Outcome::Done)
            }
            Call::MintNft { property, id, data, price } => {
                let (mut env, prop) = self.env_for(property)?;
                let (id, amount) = prop.mint_nft(&mut env, caller, *id, &data.0, *price, attached)?;
                Ok(Outcome::Minted { ids: vec![id], amounts: vec![amount] })
            }
            Call::MintBatchNfts { property, ids, amounts, data, prices } => {
                let (mut env, prop) = self.env_for(property)?;
                let (ids, amounts) = prop.mint_batch_nfts(&mut env, caller, ids, amounts, &data.0, prices, attached)?;
                Ok(Outcome::Minted { ids, amounts })
            }
            Call::MintFractional { property, right_id, units, price_per_unit } => {
                let (mut env, prop) = self.env_for(property)?;
                let id = prop.mint_fractional(&mut env, caller, *right_id, *units, *price_per_unit)?;
                Ok(Outcome::Token(id))
            }
            Call::TransferNft { property, to, id, amount, data } => {
                self.require_known(to)?;
                let (mut env, prop) = self.env_for(property)?;
                prop.transfer_nft(&mut env, caller, *to, *id, *amount, &data.0, attached)?;
                Ok(Outcome::Done)
            }
            Call::BurnNft { property, from, id, amount } => {
                prop_mut(&mut self.state.properties, property)?.burn_nft(&caller, *from, *id, *amount)?;
                Ok(Outcome::Done)
            }
            Call::BurnBatchNfts { property, from, ids, amounts } => {
                prop_mut(&mut self.state.properties, property)?.burn_batch_nfts(&caller, *from, ids, amounts)?;
                Ok(Outcome::Done)
            }
            Call::SetPrice { property, id, price_per_unit } => {
                prop_mut(&mut self.state.properties, property)?.set_price(&caller, *id, *price_per_unit)?;
                Ok(Outcome::Done)
            }
            Call::DistributeEarnings { property, right_id, total } => {
                let (mut env, prop) = self.env_for(property)?;
                let dist = prop.distribute_earnings(&mut env, caller, *right_id, *total, attached)?;
                Ok(Outcome::Distribution(dist))
            }
            Call::SetApprovalForAll { property, operator, approved } => {
                self.require_known(operator)?;
                prop_mut(&mut self.state.properties, property)?.set_approval_for_all(caller, *operator, *approved)?;
                Ok(Outcome::Done)
            }
            Call::SafeTransferBatch { property, from, to, ids, amounts } => {
                self.require_known(to)?;
                prop_mut(&mut self.state.properties, property)?.safe_transfer_batch(&caller, *from, *to, ids, amounts)?;
                Ok(Outcome::Done)
            }
            Call::ConsentSwap { swap } => {
                if caller != swap.party_a && caller != swap.party_b {
                    return Err(Error::NotAuthorized);
                }
                self.property(&swap.property)?;
                self.state.consents.insert((swap.digest()?, caller));
                Ok(Outcome::Done)
            }
            Call::AtomicSwap { swap } => {
                if caller != swap.party_a && caller != swap.party_b {
                    return Err(Error::NotAuthorized);
                }
                let registry = &self.state.stakeholders;
                if !registry.is_active(&swap.party_a) || !registry.is_active(&swap.party_b) {
                    return Err(Error::NotAuthorized);
                }
                let digest = swap.digest()?;
                for party in [swap.party_a, swap.party_b] {
                    if !self.state.consents.contains(&(digest, party)) {
                        return Err(Error::MissingConsent(party.to_string()));
                    }
                }
                let prop = prop_mut(&mut self.state.properties, &swap.property)?;
                prop.execute_swap(&mut self.state.accounts, swap)?;
                self.state.consents.remove(&(digest, swap.party_a));
                self.state.consents.remove(&(digest, swap.party_b));
                Ok(Outcome::Done)
            }
        }
    }

    fn require_known(&self, addr: &Address) -> Result<()> {
        if addr.is_zero() {
            return Err(Error::ZeroAddress);
        }
        if !self.is_known(addr) {
            return Err(Error::UnknownAccount(addr.to_string()));
        }
        Ok(())
    }

    fn env_for(&mut self, property: &Address) -> Result<(Env<'_>, &mut PropertyState)> {
        let WorldState { accounts, stakeholders, factory, properties, .. } = &mut self.state;
        let prop = prop_mut(properties, property)?;
        Ok((Env { registry: stakeholders, native: accounts, factory }, prop))
    }
}

struct RejectAll;

impl Verifier for RejectAll {
    fn approve(&self, _fingerprint: &Hash32) -> bool {
        false
    }
}

fn prop_mut<'a>(properties: &'a mut BTreeMap<Address, PropertyState>, addr: &Address) -> Result<&'a mut PropertyState> {
    properties
        .get_mut(addr)
        .ok_or_else(|| Error::UnknownProperty(addr.to_string()))
}
