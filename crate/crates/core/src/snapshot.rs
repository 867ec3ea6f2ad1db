//! Versioned, self-checking export of a whole ledger.
//!
//! The export is canonical JSON, so two ledgers with the same history
//! produce byte-identical snapshots.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::chain::Chain;
use crate::error::{Error, Result};
use crate::hash::{canonical_digest, canonical_json, Hash32, HexBytes};
use crate::ledger::{Ledger, WorldState};
use crate::metadata::{Cid, ObjectStore};

pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StateSnapshot {
    pub version: u32,
    pub state: WorldState,
    pub chain: Chain,
    pub objects: BTreeMap<Cid, HexBytes>,
    /// SHA-256 of the canonical encoding of every other field.
    pub digest: Hash32,
}

impl StateSnapshot {
    pub fn capture(ledger: &Ledger) -> Result<StateSnapshot> {
        let mut snap = StateSnapshot {
            version: SNAPSHOT_VERSION,
            state: ledger.state().clone(),
            chain: ledger.chain().clone(),
            objects: ledger.store().iter().map(|(c, b)| (*c, HexBytes(b.to_vec()))).collect(),
            digest: Hash32::ZERO,
        };
        snap.digest = snap.content_digest()?;
        Ok(snap)
    }

    pub fn content_digest(&self) -> Result<Hash32> {
        let mut value = serde_json::to_value(self).map_err(|e| Error::Encoding(e.to_string()))?;
        if let Some(obj) = value.as_object_mut() {
            obj.remove("digest");
        }
        canonical_digest(&value)
    }

    /// Rebuilds the ledger, checking object hashes, the block log and the
    /// recorded digest.
    pub fn restore(self) -> Result<Ledger> {
        if self.version != SNAPSHOT_VERSION {
            return Err(Error::VersionMismatch { found: self.version, expected: SNAPSHOT_VERSION });
        }
        if self.content_digest()? != self.digest {
            return Err(Error::CorruptSnapshot);
        }
        if !self.chain.verify() || self.chain.is_empty() {
            return Err(Error::CorruptSnapshot);
        }
        let mut store = ObjectStore::default();
        for (cid, bytes) in self.objects {
            store.insert_verified(cid, bytes.0)?;
        }
        Ok(Ledger::from_parts(self.state, store, self.chain))
    }
}

pub fn export(ledger: &Ledger) -> Result<Vec<u8>> {
    canonical_json(&StateSnapshot::capture(ledger)?)
}

pub fn import(bytes: &[u8]) -> Result<Ledger> {
    let raw: serde_json::Value = serde_json::from_slice(bytes).map_err(|_| Error::CorruptSnapshot)?;
    let found = raw.get("version").and_then(|v| v.as_u64()).ok_or(Error::CorruptSnapshot)?;
    if found != SNAPSHOT_VERSION as u64 {
        return Err(Error::VersionMismatch { found: found.min(u32::MAX as u64) as u32, expected: SNAPSHOT_VERSION });
    }
    let snap: StateSnapshot = serde_json::from_value(raw).map_err(|_| Error::CorruptSnapshot)?;
    snap.restore()
}
