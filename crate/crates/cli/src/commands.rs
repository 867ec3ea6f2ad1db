//! Translates parsed commands into ledger calls and queries.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use estate_core::factory::proxy_address;
use estate_core::merkle::MerkleProof;
use estate_core::{
    sha256, Address, Behavior, Call, Cid, Error, Hash32, HexBytes, ImplementationVersion, Ledger, MerkleTree,
    Outcome, RightMetadata, Role, SwapDescriptor, TokenId,
};

use crate::args::{
    AccountCmd, ChainCmd, Command, FactoryCmd, MerkleCmd, ObjectCmd, PropertyCmd, StakeholderCmd, StateCmd, TokenCmd,
    TxFlags,
};
use crate::error::{parse_err, CliError};

/// Resolves file arguments relative to the invoking directory or script.
pub struct Dispatch<'a> {
    pub ledger: &'a mut Ledger,
    pub flags: &'a TxFlags,
    pub base: &'a Path,
}

impl Dispatch<'_> {
    pub fn run(&mut self, command: &Command) -> Result<Value, CliError> {
        match command {
            Command::Stakeholder(c) => self.stakeholder(c),
            Command::Object(c) => self.object(c),
            Command::Merkle(c) => self.merkle(c),
            Command::Factory(c) => self.factory(c),
            Command::Property(c) => self.property(c),
            Command::Token(c) => self.token(c),
            Command::Chain(c) => self.chain(c),
            Command::State(StateCmd::Digest) => Ok(json!({ "digest": self.ledger.state_digest() })),
            Command::Account(c) => self.account(c),
            Command::Init | Command::Run { .. } | Command::State(_) => {
                Err(parse_err("command must be handled by the session"))
            }
        }
    }

    fn caller(&self) -> Result<Address, CliError> {
        let raw = self.flags.caller.as_deref().ok_or_else(|| parse_err("--as <addr> is required"))?;
        self.addr(raw)
    }

    fn call(&mut self, call: Call) -> Result<Value, CliError> {
        let caller = self.caller()?;
        let outcome = self.ledger.execute(caller, call, self.flags.value)?;
        Ok(outcome_value(outcome))
    }

    /// `0x..` address, `@<key>` for a key's address, `proxy:<n>` for the
    /// n-th (0-based) factory deployment, or `factory`.
    fn addr(&self, raw: &str) -> Result<Address, CliError> {
        parse_addr(self.ledger, raw)
    }

    fn path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    fn read(&self, p: &Path) -> Result<Vec<u8>, CliError> {
        let path = self.path(p);
        fs::read(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }

    fn stakeholder(&mut self, cmd: &StakeholderCmd) -> Result<Value, CliError> {
        match cmd {
            StakeholderCmd::Bootstrap { key, info } => {
                let public_key = key_bytes(key)?;
                let caller = Address::from_public_key(&public_key);
                let call = Call::Bootstrap { public_key: HexBytes(public_key), info: HexBytes(info.as_bytes().to_vec()) };
                Ok(outcome_value(self.ledger.execute(caller, call, self.flags.value)?))
            }
            StakeholderCmd::Register { role, key, info } => self.call(Call::RegisterStakeholder {
                role: role.parse()?,
                public_key: HexBytes(key_bytes(key)?),
                info: parse_cid(info)?,
            }),
            StakeholderCmd::Grant { target, role } => {
                let target = self.addr(target)?;
                self.call(Call::GrantRole { target, role: role.parse::<Role>()? })
            }
            StakeholderCmd::Remove { target } => {
                let target = self.addr(target)?;
                self.call(Call::RemoveStakeholder { target })
            }
            StakeholderCmd::Show { target } => {
                let target = self.addr(target)?;
                let record = self
                    .ledger
                    .registry()
                    .get(&target)
                    .ok_or_else(|| Error::UnknownAccount(target.to_string()))?;
                Ok(to_value(record))
            }
            StakeholderCmd::List => {
                let records: Vec<_> = self.ledger.registry().records().collect();
                Ok(json!({ "stakeholders": records }))
            }
            StakeholderCmd::Address { key } => Ok(json!({ "address": Address::from_public_key(&key_bytes(key)?) })),
            StakeholderCmd::Fingerprint { key } => Ok(json!({ "fingerprint": sha256(&key_bytes(key)?) })),
        }
    }

    fn object(&mut self, cmd: &ObjectCmd) -> Result<Value, CliError> {
        match cmd {
            ObjectCmd::Put { path, text } => {
                let bytes = match (path, text) {
                    (_, Some(t)) => t.as_bytes().to_vec(),
                    (Some(p), None) => self.read(p)?,
                    (None, None) => return Err(parse_err("object put needs a path or --text")),
                };
                self.call(Call::PutObject { bytes: HexBytes(bytes) })
            }
            ObjectCmd::Get { cid, out } => {
                let cid = parse_cid(cid)?;
                let bytes = self.ledger.store().get(&cid)?.to_vec();
                if let Some(out) = out {
                    let path = self.path(out);
                    fs::write(&path, &bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                    return Ok(json!({ "cid": cid, "written": path.display().to_string() }));
                }
                match String::from_utf8(bytes) {
                    Ok(text) => Ok(json!({ "cid": cid, "text": text })),
                    Err(e) => Ok(json!({ "cid": cid, "hex": hex::encode(e.into_bytes()) })),
                }
            }
            ObjectCmd::Metadata { path } => {
                let metadata = RightMetadata::from_json(&self.read(path)?)?;
                self.call(Call::BuildRightMetadata { metadata })
            }
            ObjectCmd::Cid { path } => Ok(json!({ "cid": Cid::of(&self.read(path)?) })),
            ObjectCmd::List => {
                let objects: Vec<_> = self
                    .ledger
                    .store()
                    .iter()
                    .map(|(cid, bytes)| json!({ "cid": cid, "size": bytes.len() }))
                    .collect();
                Ok(json!({ "objects": objects }))
            }
        }
    }

    fn merkle(&mut self, cmd: &MerkleCmd) -> Result<Value, CliError> {
        match cmd {
            MerkleCmd::Root { cids } => Ok(json!({ "root": leaves(cids).and_then(tree)?.root() })),
            MerkleCmd::Prove { index, cids } => {
                let tree = tree(leaves(cids)?)?;
                Ok(to_value(&tree.proof(*index).map_err(Error::from)?))
            }
            MerkleCmd::Verify { root, leaf, proof } => {
                let root: Hash32 = root.parse()?;
                let leaf = *parse_cid(leaf)?.digest();
                let proof: MerkleProof = serde_json::from_slice(&self.read(proof)?)
                    .map_err(|e| parse_err(format!("proof file: {e}")))?;
                if !estate_core::verify_proof(&root, &leaf, &proof) {
                    return Err(Error::HashMismatch.into());
                }
                Ok(json!({ "valid": true }))
            }
        }
    }

    fn factory(&mut self, cmd: &FactoryCmd) -> Result<Value, CliError> {
        match cmd {
            FactoryCmd::Init { version, behavior, admin, upgrader } => {
                let implementation = implementation(*version, behavior)?;
                let (admin, upgrader) = (self.addr(admin)?, self.addr(upgrader)?);
                self.call(Call::InitializeFactory { implementation, admin, upgrader })
            }
            FactoryCmd::Deploy { treasury, upgrader, admin, uri, name, description } => {
                let call = Call::DeployPropertyContract {
                    treasury: self.addr(treasury)?,
                    upgrader: self.addr(upgrader)?,
                    admin: self.addr(admin)?,
                    uri: uri.clone(),
                    contract_name: name.clone(),
                    description: description.clone(),
                };
                let mut value = self.call(call)?;
                let property_id = self.ledger.factory().proxy_len();
                value["propertyId"] = json!(property_id);
                Ok(value)
            }
            FactoryCmd::Pause => self.call(Call::Pause {}),
            FactoryCmd::Unpause => self.call(Call::Unpause {}),
            FactoryCmd::Upgrade { version, behavior } => {
                let implementation = implementation(*version, behavior)?;
                self.call(Call::AuthorizeUpgrade { implementation })
            }
            FactoryCmd::Show => {
                let f = self.ledger.factory();
                Ok(json!({
                    "address": f.address,
                    "implementation": f.logic,
                    "paused": f.paused,
                    "admin": f.admin,
                    "upgrader": f.upgrader,
                    "proxyLength": f.proxy_len(),
                }))
            }
            FactoryCmd::Proxies => Ok(json!({ "proxies": self.ledger.factory().proxies() })),
        }
    }

    fn property(&mut self, cmd: &PropertyCmd) -> Result<Value, CliError> {
        match cmd {
            PropertyCmd::RegisterDoc { property, cid } => {
                let property = self.addr(property)?;
                self.call(Call::RegisterDocument { property, cid: parse_cid(cid)? })
            }
            PropertyCmd::Approve { property, root, prop_address } => {
                let property = self.addr(property)?;
                let prop_address = match prop_address {
                    Some(a) => self.addr(a)?,
                    None => property,
                };
                self.call(Call::ApprovedProperty { property, parent_hash: root.parse()?, prop_address })
            }
            PropertyCmd::Root { property } => {
                let p = self.ledger.property(&self.addr(property)?)?;
                Ok(json!({ "root": p.document_root()? }))
            }
            PropertyCmd::Show { property } => {
                let p = self.ledger.property(&self.addr(property)?)?;
                let tokens: Vec<_> = p
                    .tokens()
                    .ids()
                    .map(|id| json!({ "id": id, "supply": p.total_supply(id) }))
                    .collect();
                Ok(json!({
                    "propertyId": p.property_id()?,
                    "address": p.address(),
                    "name": p.contract_name(),
                    "description": p.description(),
                    "baseUri": p.base_uri(),
                    "treasury": p.treasury(),
                    "admin": p.admin(),
                    "upgrader": p.upgrader(),
                    "approved": p.is_approved(),
                    "approvalRoot": p.approval_root(),
                    "documents": p.documents(),
                    "tokens": tokens,
                    "listings": p.listings(),
                }))
            }
            PropertyCmd::Uri { property, id } => {
                let p = self.ledger.property(&self.addr(property)?)?;
                Ok(json!({ "uri": p.uri_of(&id.parse()?)? }))
            }
        }
    }

    fn token(&mut self, cmd: &TokenCmd) -> Result<Value, CliError> {
        match cmd {
            TokenCmd::Mint { property, id, price, data } => {
                let property = self.addr(property)?;
                self.call(Call::MintNft { property, id: id.parse()?, data: data_bytes(data)?, price: *price })
            }
            TokenCmd::MintBatch { property, ids, prices, amounts, data } => {
                let property = self.addr(property)?;
                let ids = token_ids(ids)?;
                let amounts = if amounts.is_empty() { vec![1; ids.len()] } else { amounts.clone() };
                self.call(Call::MintBatchNfts { property, ids, amounts, data: data_bytes(data)?, prices: prices.clone() })
            }
            TokenCmd::Fractionalize { property, right, units, price } => {
                let property = self.addr(property)?;
                self.call(Call::MintFractional { property, right_id: right.parse()?, units: *units, price_per_unit: *price })
            }
            TokenCmd::Transfer { property, to, id, amount, data } => {
                let (property, to) = (self.addr(property)?, self.addr(to)?);
                self.call(Call::TransferNft { property, to, id: id.parse()?, amount: *amount, data: data_bytes(data)? })
            }
            TokenCmd::Burn { property, from, id, amount } => {
                let (property, from) = (self.addr(property)?, self.addr(from)?);
                self.call(Call::BurnNft { property, from, id: id.parse()?, amount: *amount })
            }
            TokenCmd::BurnBatch { property, from, ids, amounts } => {
                let (property, from) = (self.addr(property)?, self.addr(from)?);
                self.call(Call::BurnBatchNfts { property, from, ids: token_ids(ids)?, amounts: amounts.clone() })
            }
            TokenCmd::SetPrice { property, id, price } => {
                let property = self.addr(property)?;
                self.call(Call::SetPrice { property, id: id.parse()?, price_per_unit: *price })
            }
            TokenCmd::Distribute { property, right, total } => {
                let property = self.addr(property)?;
                self.call(Call::DistributeEarnings { property, right_id: right.parse()?, total: *total })
            }
            TokenCmd::Approve { property, operator, approved } => {
                let (property, operator) = (self.addr(property)?, self.addr(operator)?);
                self.call(Call::SetApprovalForAll { property, operator, approved: *approved })
            }
            TokenCmd::BatchTransfer { property, from, to, ids, amounts } => {
                let (property, from, to) = (self.addr(property)?, self.addr(from)?, self.addr(to)?);
                self.call(Call::SafeTransferBatch { property, from, to, ids: token_ids(ids)?, amounts: amounts.clone() })
            }
            TokenCmd::Consent { swap } => {
                let swap = self.swap(swap)?;
                self.call(Call::ConsentSwap { swap })
            }
            TokenCmd::Swap { swap } => {
                let swap = self.swap(swap)?;
                self.call(Call::AtomicSwap { swap })
            }
            TokenCmd::Balance { property, account, ids } => {
                let p = self.ledger.property(&self.addr(property)?)?;
                let account = self.addr(account)?;
                Ok(json!({ "balances": p.balance_of(&account, &token_ids(ids)?) }))
            }
            TokenCmd::Supply { property, id } => {
                let p = self.ledger.property(&self.addr(property)?)?;
                Ok(json!({ "supply": p.total_supply(&id.parse()?) }))
            }
            TokenCmd::Listing { property, id } => {
                let p = self.ledger.property(&self.addr(property)?)?;
                Ok(json!({ "listing": p.listing(&id.parse()?) }))
            }
        }
    }

    fn swap(&self, path: &Path) -> Result<SwapDescriptor, CliError> {
        serde_json::from_slice(&self.read(path)?).map_err(|e| parse_err(format!("swap file: {e}")))
    }

    fn chain(&mut self, cmd: &ChainCmd) -> Result<Value, CliError> {
        let chain = self.ledger.chain();
        match cmd {
            ChainCmd::Verify => {
                if !chain.verify() {
                    return Err(Error::CorruptSnapshot.into());
                }
                Ok(json!("OK"))
            }
            ChainCmd::Show { index: Some(i) } => {
                let block = chain
                    .blocks()
                    .get(*i as usize)
                    .ok_or(Error::IndexOutOfRange { index: *i as usize, len: chain.len() })?;
                Ok(to_value(block))
            }
            ChainCmd::Show { index: None } => Ok(json!({ "blocks": chain.blocks() })),
            ChainCmd::Length => Ok(json!({ "length": chain.len() })),
        }
    }

    fn account(&mut self, cmd: &AccountCmd) -> Result<Value, CliError> {
        match cmd {
            AccountCmd::Faucet { to, amount } => {
                let to = self.addr(to)?;
                self.call(Call::Faucet { to, amount: *amount })
            }
            AccountCmd::Transfer { to, amount } => {
                let to = self.addr(to)?;
                self.call(Call::TransferNative { to, amount: *amount })
            }
            AccountCmd::Balance { account } => {
                let account = self.addr(account)?;
                Ok(json!({ "balance": self.ledger.native_balance(&account) }))
            }
        }
    }
}

pub fn parse_addr(ledger: &Ledger, raw: &str) -> Result<Address, CliError> {
    if let Some(key) = raw.strip_prefix('@') {
        return Ok(Address::from_public_key(&key_bytes(key)?));
    }
    if let Some(n) = raw.strip_prefix("proxy:") {
        let n: u64 = n.parse().map_err(|_| parse_err(format!("bad proxy index in `{raw}`")))?;
        return Ok(proxy_address(&ledger.factory().address, n));
    }
    if raw == "factory" {
        return Ok(ledger.factory().address);
    }
    Ok(raw.parse()?)
}

/// `0x`-prefixed hex, otherwise the UTF-8 bytes of the argument.
pub fn key_bytes(raw: &str) -> Result<Vec<u8>, CliError> {
    match raw.strip_prefix("0x") {
        Some(h) => hex::decode(h).map_err(|_| parse_err(format!("bad hex key `{raw}`"))),
        None => Ok(raw.as_bytes().to_vec()),
    }
}

/// A content id, or `text:<s>` for the id of the UTF-8 bytes of `s`.
pub fn parse_cid(raw: &str) -> Result<Cid, CliError> {
    match raw.strip_prefix("text:") {
        Some(text) => Ok(Cid::of(text.as_bytes())),
        None => Ok(raw.parse()?),
    }
}

fn data_bytes(raw: &str) -> Result<HexBytes, CliError> {
    let body = raw.strip_prefix("0x").unwrap_or(raw);
    hex::decode(body)
        .map(HexBytes)
        .map_err(|_| parse_err(format!("data must be hex, got `{raw}`")))
}

fn token_ids(raw: &[String]) -> Result<Vec<TokenId>, CliError> {
    raw.iter().map(|s| Ok(s.parse()?)).collect()
}

fn implementation(version: u64, behavior: &str) -> Result<ImplementationVersion, CliError> {
    Ok(ImplementationVersion::new(version, behavior.parse::<Behavior>()?))
}

fn leaves(cids: &[String]) -> Result<Vec<Hash32>, CliError> {
    cids.iter().map(|c| Ok(*parse_cid(c)?.digest())).collect()
}

fn tree(leaves: Vec<Hash32>) -> Result<MerkleTree, CliError> {
    Ok(MerkleTree::build(leaves).map_err(Error::from)?)
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("ledger types encode as JSON")
}

fn outcome_value(outcome: Outcome) -> Value {
    match outcome {
        Outcome::Done => json!("ok"),
        Outcome::Address(a) => json!({ "address": a }),
        Outcome::Cid(c) => json!({ "cid": c }),
        Outcome::Token(id) => json!({ "id": id }),
        Outcome::Minted { ids, amounts } => json!({ "ids": ids, "amounts": amounts }),
        Outcome::Distribution(d) => to_value(&d),
    }
}
