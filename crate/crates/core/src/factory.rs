//! Property factory: deploys one proxy per property against a registered
//! implementation, tracks the proxies, and gates minting with pause.
//!
//! There is no bytecode here. An "implementation" is a behavior version the
//! ledger knows how to dispatch to; upgrading swaps that binding and leaves
//! every proxy's state untouched.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::address::Address;
use crate::error::{Error, Result};
use crate::hash::{sha256, sha256_concat};

/// Behaviors the ledger can dispatch property calls to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Behavior {
    /// Purchases forward the full attached value to the seller.
    PropertyV1,
    /// Same as v1, except purchases only charge `amount * price` and the
    /// surplus stays with the buyer.
    PropertyV2,
}

impl Behavior {
    pub fn tag(&self) -> &'static str {
        match self {
            Behavior::PropertyV1 => "property-v1",
            Behavior::PropertyV2 => "property-v2",
        }
    }
}

impl fmt::Display for Behavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Behavior {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "property-v1" => Ok(Behavior::PropertyV1),
            "property-v2" => Ok(Behavior::PropertyV2),
            other => Err(Error::UnknownImplementation(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ImplementationVersion {
    pub version_id: u64,
    pub behavior_tag: String,
}

impl ImplementationVersion {
    pub fn new(version_id: u64, behavior: Behavior) -> Self {
        ImplementationVersion { version_id, behavior_tag: behavior.tag().to_string() }
    }

    pub fn behavior(&self) -> Result<Behavior> {
        self.behavior_tag.parse()
    }

    fn validate(&self) -> Result<()> {
        if self.version_id == 0 {
            return Err(Error::InvalidArgument("implementation version must be positive".into()));
        }
        self.behavior().map(|_| ())
    }
}

/// The factory's own address: first 20 bytes of SHA-256("RealEstate").
pub fn factory_address() -> Address {
    Address::from_digest(&sha256(b"RealEstate"))
}

/// Address of the proxy at `index`: first 20 bytes of
/// SHA-256(factory address || index as 8-byte big-endian).
pub fn proxy_address(factory: &Address, index: u64) -> Address {
    Address::from_digest(&sha256_concat(&[factory.as_bytes(), &index.to_be_bytes()]))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FactoryState {
    pub address: Address,
    /// Current implementation; `None` until initialized.
    pub logic: Option<ImplementationVersion>,
    proxies: Vec<Address>,
    pub paused: bool,
    pub upgrader: Address,
    pub admin: Address,
}

impl Default for FactoryState {
    fn default() -> Self {
        FactoryState {
            address: factory_address(),
            logic: None,
            proxies: Vec::new(),
            paused: false,
            upgrader: Address::ZERO,
            admin: Address::ZERO,
        }
    }
}

impl FactoryState {
    pub fn is_initialized(&self) -> bool {
        self.logic.is_some()
    }

    pub fn initialize(&mut self, implementation: ImplementationVersion, admin: Address, upgrader: Address) -> Result<()> {
        if self.is_initialized() {
            return Err(Error::AlreadyInitialized);
        }
        if admin.is_zero() || upgrader.is_zero() {
            return Err(Error::ZeroAddress);
        }
        implementation.validate()?;
        self.logic = Some(implementation);
        self.admin = admin;
        self.upgrader = upgrader;
        self.paused = false;
        Ok(())
    }

    pub fn implementation(&self) -> Result<&ImplementationVersion> {
        self.logic.as_ref().ok_or(Error::Uninitialized)
    }

    pub fn behavior(&self) -> Result<Behavior> {
        self.implementation()?.behavior()
    }

    pub fn proxies(&self) -> &[Address] {
        &self.proxies
    }

    pub fn proxy_len(&self) -> usize {
        self.proxies.len()
    }

    /// Fails with `Paused` while minting is halted.
    pub fn ensure_live(&self) -> Result<()> {
        self.implementation()?;
        if self.paused {
            return Err(Error::Paused);
        }
        Ok(())
    }

    /// Address the next deployment will receive.
    pub fn next_proxy_address(&self) -> Address {
        proxy_address(&self.address, self.proxies.len() as u64)
    }

    /// Appends a freshly deployed proxy and returns its sequential property id.
    pub fn push_proxy(&mut self, proxy: Address) -> u64 {
        self.proxies.push(proxy);
        self.proxies.len() as u64
    }

    pub fn pause(&mut self, caller: &Address) -> Result<()> {
        self.implementation()?;
        if *caller != self.admin {
            return Err(Error::NotAuthorized);
        }
        if self.paused {
            return Err(Error::AlreadyPaused);
        }
        self.paused = true;
        Ok(())
    }

    pub fn unpause(&mut self, caller: &Address) -> Result<()> {
        self.implementation()?;
        if *caller != self.admin {
            return Err(Error::NotAuthorized);
        }
        if !self.paused {
            return Err(Error::NotPaused);
        }
        self.paused = false;
        Ok(())
    }

    /// Rebinds the implementation. Proxy state lives outside the factory and
    /// is not touched.
    pub fn authorize_upgrade(&mut self, caller: &Address, implementation: ImplementationVersion) -> Result<()> {
        self.implementation()?;
        if *caller != self.upgrader {
            return Err(Error::NotAuthorized);
        }
        implementation.validate()?;
        self.logic = Some(implementation);
        Ok(())
    }
}
