//! Permissioned real-estate tokenization ledger.
//!
//! A single-writer state machine: stakeholders with roles, a content
//! addressed object store, a hash-linked block log, and per-property
//! multi-token contracts deployed through an upgradeable factory.

pub mod address;
pub mod chain;
pub mod error;
pub mod factory;
pub mod hash;
pub mod identity;
pub mod ledger;
pub mod merkle;
pub mod metadata;
pub mod property;
pub mod snapshot;
pub mod token;

pub use address::Address;
pub use chain::{Block, Chain, NativeLedger, Transaction, TxStatus};
pub use error::{Error, Result};
pub use factory::{Behavior, FactoryState, ImplementationVersion};
pub use hash::{canonical_json, sha256, Hash32, HexBytes};
pub use identity::{AllowAll, Allowlist, Registry, Role, StakeholderRecord, Verifier};
pub use ledger::{Call, Ledger, Outcome, WorldState};
pub use merkle::{merkle_root, verify_proof, MerkleProof, MerkleTree};
pub use metadata::{Cid, DocumentRef, ObjectStore, RightMetadata};
pub use property::{compute_distribution, Distribution, Listing, PropertyState};
pub use snapshot::{StateSnapshot, SNAPSHOT_VERSION};
pub use token::{SwapDescriptor, TokenId, TokenLedger};
