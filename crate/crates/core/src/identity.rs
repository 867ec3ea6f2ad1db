//! Stakeholder registration, roles and removal.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::address::Address;
use crate::error::{Error, Result};
use crate::hash::{sha256, Hash32};
use crate::metadata::Cid;

/// Stakeholder roles. Seller covers owners, Buyer covers tenants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    Administrator,
    Seller,
    Buyer,
    Realtor,
}

impl Role {
    pub const ALL: [Role; 4] = [Role::Administrator, Role::Seller, Role::Buyer, Role::Realtor];
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Role::Administrator => "administrator",
            Role::Seller => "seller",
            Role::Buyer => "buyer",
            Role::Realtor => "realtor",
        };
        f.write_str(s)
    }
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "administrator" | "admin" | "validator" => Ok(Role::Administrator),
            "seller" | "owner" => Ok(Role::Seller),
            "buyer" | "tenant" => Ok(Role::Buyer),
            "realtor" => Ok(Role::Realtor),
            _ => Err(Error::Parse(format!("unknown role `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StakeholderRecord {
    pub address: Address,
    pub roles: BTreeSet<Role>,
    pub public_info: Cid,
    pub key_fingerprint: Hash32,
    pub active: bool,
    /// Registration order, starting at 0 for the bootstrap administrator.
    pub seq: u64,
}

/// Approves or rejects a registration by its key fingerprint
/// (SHA-256 of the public key).
pub trait Verifier: Send + Sync {
    fn approve(&self, fingerprint: &Hash32) -> bool;
}

/// Accepts every registration.
#[derive(Debug, Clone, Copy, Default)]
pub struct AllowAll;

impl Verifier for AllowAll {
    fn approve(&self, _fingerprint: &Hash32) -> bool {
        true
    }
}

/// Allowlist of approved key fingerprints.
#[derive(Debug, Clone, Default)]
pub struct Allowlist {
    approved: HashSet<Hash32>,
}

impl Allowlist {
    /// Parses one lowercase-hex SHA-256 fingerprint per line. Blank lines
    /// and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Allowlist> {
        let mut approved = HashSet::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.len() != 64 || line.chars().any(|c| c.is_ascii_uppercase()) {
                return Err(Error::Parse(format!("allowlist line {}: expected 64 lowercase hex chars", n + 1)));
            }
            approved.insert(line.parse()?);
        }
        Ok(Allowlist { approved })
    }

    pub fn insert(&mut self, fingerprint: Hash32) {
        self.approved.insert(fingerprint);
    }
}

impl Verifier for Allowlist {
    fn approve(&self, fingerprint: &Hash32) -> bool {
        self.approved.contains(fingerprint)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Registry {
    records: BTreeMap<Address, StakeholderRecord>,
    next_seq: u64,
}

impl Registry {
    pub fn get(&self, addr: &Address) -> Option<&StakeholderRecord> {
        self.records.get(addr)
    }

    pub fn records(&self) -> impl Iterator<Item = &StakeholderRecord> {
        self.records.values()
    }

    pub fn is_active(&self, addr: &Address) -> bool {
        self.records.get(addr).is_some_and(|r| r.active)
    }

    pub fn has_role(&self, addr: &Address, role: Role) -> bool {
        self.records.get(addr).is_some_and(|r| r.active && r.roles.contains(&role))
    }

    pub fn active_administrators(&self) -> usize {
        self.records
            .values()
            .filter(|r| r.active && r.roles.contains(&Role::Administrator))
            .count()
    }

    /// Earliest-registered active administrator; the default block sealer.
    pub fn first_administrator(&self) -> Option<Address> {
        self.records
            .values()
            .filter(|r| r.active && r.roles.contains(&Role::Administrator))
            .min_by_key(|r| r.seq)
            .map(|r| r.address)
    }

    /// Registers the first administrator of an empty registry.
    pub fn bootstrap(&mut self, public_key: &[u8], info: Cid) -> Result<Address> {
        if !self.records.is_empty() {
            return Err(Error::AlreadyInitialized);
        }
        self.insert(Role::Administrator, public_key, info)
    }

    pub fn register(
        &mut self,
        admin: &Address,
        role: Role,
        public_key: &[u8],
        info: Cid,
        verifier: &dyn Verifier,
    ) -> Result<Address> {
        if !self.has_role(admin, Role::Administrator) {
            return Err(Error::NotAuthorized);
        }
        if public_key.is_empty() {
            return Err(Error::InvalidArgument("public key must not be empty".into()));
        }
        if self.records.contains_key(&Address::from_public_key(public_key)) {
            return Err(Error::DuplicateKey);
        }
        if !verifier.approve(&sha256(public_key)) {
            return Err(Error::VerificationRejected);
        }
        self.insert(role, public_key, info)
    }

    /// Adds a role to an existing, active stakeholder.
    pub fn grant_role(&mut self, admin: &Address, target: &Address, role: Role) -> Result<()> {
        if !self.has_role(admin, Role::Administrator) {
            return Err(Error::NotAuthorized);
        }
        let record = self
            .records
            .get_mut(target)
            .filter(|r| r.active)
            .ok_or_else(|| Error::UnknownAccount(target.to_string()))?;
        record.roles.insert(role);
        Ok(())
    }

    /// Deactivates `target`. Balances elsewhere are left as they are.
    pub fn remove(&mut self, admin: &Address, target: &Address) -> Result<()> {
        if !self.has_role(admin, Role::Administrator) {
            return Err(Error::NotAuthorized);
        }
        let record = self
            .records
            .get(target)
            .ok_or_else(|| Error::UnknownAccount(target.to_string()))?;
        if record.active
            && record.roles.contains(&Role::Administrator)
            && self.active_administrators() == 1
        {
            return Err(Error::LastAdministrator);
        }
        self.records.get_mut(target).expect("checked").active = false;
        Ok(())
    }

    fn insert(&mut self, role: Role, public_key: &[u8], info: Cid) -> Result<Address> {
        let address = Address::from_public_key(public_key);
        let record = StakeholderRecord {
            address,
            roles: BTreeSet::from([role]),
            public_info: info,
            key_fingerprint: sha256(public_key),
            active: true,
            seq: self.next_seq,
        };
        self.next_seq += 1;
        self.records.insert(address, record);
        Ok(address)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn info() -> Cid {
        Cid::of(b"kyc bundle")
    }

    fn setup() -> (Registry, Address) {
        let mut reg = Registry::default();
        let admin = reg.bootstrap(b"admin-key", info()).unwrap();
        (reg, admin)
    }

    #[test]
    fn duplicate_key_rejected() {
        let (mut reg, admin) = setup();
        reg.register(&admin, Role::Seller, b"k1", info(), &AllowAll).unwrap();
        assert_eq!(
            reg.register(&admin, Role::Buyer, b"k1", info(), &AllowAll),
            Err(Error::DuplicateKey)
        );
    }

    #[test]
    fn non_admin_cannot_register() {
        let (mut reg, admin) = setup();
        let seller = reg.register(&admin, Role::Seller, b"s", info(), &AllowAll).unwrap();
        let before = reg.clone();
        assert_eq!(reg.register(&seller, Role::Buyer, b"b", info(), &AllowAll), Err(Error::NotAuthorized));
        assert_eq!(reg, before);
    }

    #[test]
    fn allowlist_gates_registration() {
        let (mut reg, admin) = setup();
        let list = Allowlist::parse(&format!("# approved\n{}\n", sha256(b"ok").to_hex())).unwrap();
        assert!(reg.register(&admin, Role::Buyer, b"ok", info(), &list).is_ok());
        assert_eq!(
            reg.register(&admin, Role::Buyer, b"nope", info(), &list),
            Err(Error::VerificationRejected)
        );
        assert!(Allowlist::parse(&sha256(b"x").to_hex().to_uppercase()).is_err());
    }

    #[test]
    fn removal_and_role_queries() {
        let (mut reg, admin) = setup();
        let seller = reg.register(&admin, Role::Seller, b"s", info(), &AllowAll).unwrap();
        assert!(!reg.has_role(&Address([9; 20]), Role::Seller));
        assert!(reg.has_role(&seller, Role::Seller));
        reg.remove(&admin, &seller).unwrap();
        assert!(!reg.has_role(&seller, Role::Seller));
        assert_eq!(reg.remove(&admin, &admin), Err(Error::LastAdministrator));
        assert!(matches!(reg.remove(&admin, &Address([7; 20])), Err(Error::UnknownAccount(_))));
    }

    #[test]
    fn second_admin_allows_removal_of_first() {
        let (mut reg, admin) = setup();
        let a2 = reg.register(&admin, Role::Administrator, b"a2", info(), &AllowAll).unwrap();
        reg.remove(&a2, &admin).unwrap();
        assert_eq!(reg.active_administrators(), 1);
        assert_eq!(reg.first_administrator(), Some(a2));
        assert_eq!(reg.remove(&a2, &a2), Err(Error::LastAdministrator));
    }

    #[test]
    fn role_names_parse() {
        assert_eq!("Tenant".parse::<Role>().unwrap(), Role::Buyer);
        assert_eq!("owner".parse::<Role>().unwrap(), Role::Seller);
        assert!("landlord".parse::<Role>().is_err());
    }
}
