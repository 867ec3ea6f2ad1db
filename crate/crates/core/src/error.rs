use thiserror::Error;

use crate::merkle::MerkleError;

/// Every rejection the ledger can produce.
///
/// Variants are unit-like where the caller only needs the code; the CLI
/// prints [`Error::code`] and maps [`Error::is_authorization`] to its own
/// exit status.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("caller is not authorized for this operation")]
    NotAuthorized,
    #[error("insufficient native funds")]
    InsufficientFunds,
    #[error("unknown account {0}")]
    UnknownAccount(String),
    #[error("registration rejected by the verification service")]
    VerificationRejected,
    #[error("public key is already registered")]
    DuplicateKey,
    #[error("cannot remove the last administrator")]
    LastAdministrator,
    #[error("object is empty")]
    EmptyObject,
    #[error("object {0} not found")]
    NotFound(String),
    #[error("document link must not be empty")]
    InvalidDocumentLink,
    #[error("base uri has no `{{id}}` placeholder")]
    MissingPlaceholder,
    #[error("merkle tree needs at least one leaf")]
    EmptyLeaves,
    #[error("leaf index {index} out of range for {len} leaves")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("an owner cannot approve itself as operator")]
    SelfApproval,
    #[error("ids and amounts differ in length")]
    LengthMismatch,
    #[error("insufficient token balance")]
    InsufficientBalance,
    #[error("right tokens move in amounts of exactly 1")]
    NonFungibleAmount,
    #[error("the zero address cannot hold assets")]
    ZeroAddress,
    #[error("swap consent missing for {0}")]
    MissingConsent(String),
    #[error("contract is not initialized")]
    Uninitialized,
    #[error("contract is already initialized")]
    AlreadyInitialized,
    #[error("property address does not match this contract")]
    WrongProperty,
    #[error("submitted parent hash does not match the document merkle root")]
    HashMismatch,
    #[error("property has no registered documents")]
    NoDocuments,
    #[error("property is already approved")]
    AlreadyApproved,
    #[error("property is not approved")]
    NotApproved,
    #[error("minting is paused")]
    Paused,
    #[error("right token already minted")]
    AlreadyMinted,
    #[error("attached value is below the required payment")]
    InsufficientPayment,
    #[error("token id is not a right id")]
    NonRightId,
    #[error("caller does not own the right token")]
    NotOwner,
    #[error("right is already fractionalized")]
    AlreadyFractionalized,
    #[error("right still anchors outstanding fractional units")]
    FractionalSupplyOutstanding,
    #[error("fractional unit count must be positive")]
    ZeroUnits,
    #[error("no listing for this token")]
    NoListing,
    #[error("token has no supply")]
    UnknownToken,
    #[error("right has no fractional supply")]
    NotFractionalized,
    #[error("factory is already paused")]
    AlreadyPaused,
    #[error("factory is not paused")]
    NotPaused,
    #[error("unknown property {0}")]
    UnknownProperty(String),
    #[error("unknown implementation behavior `{0}`")]
    UnknownImplementation(String),
    #[error("block timestamp {got} precedes chain tip {tip}")]
    TimestampRegression { got: u64, tip: u64 },
    #[error("arithmetic overflow")]
    Overflow,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("snapshot version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("snapshot digest check failed")]
    CorruptSnapshot,
    #[error("replayed log diverged: {0}")]
    ReplayDivergence(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("encoding error: {0}")]
    Encoding(String),
}

impl Error {
    /// Stable rejection code recorded in logs and printed by the CLI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotAuthorized => "NotAuthorized",
            Error::InsufficientFunds => "InsufficientFunds",
            Error::UnknownAccount(_) => "UnknownAccount",
            Error::VerificationRejected => "VerificationRejected",
            Error::DuplicateKey => "DuplicateKey",
            Error::LastAdministrator => "LastAdministrator",
            Error::EmptyObject => "EmptyObject",
            Error::NotFound(_) => "NotFound",
            Error::InvalidDocumentLink => "InvalidDocumentLink",
            Error::MissingPlaceholder => "MissingPlaceholder",
            Error::EmptyLeaves => "EmptyLeaves",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::SelfApproval => "SelfApproval",
            Error::LengthMismatch => "LengthMismatch",
            Error::InsufficientBalance => "InsufficientBalance",
            Error::NonFungibleAmount => "NonFungibleAmount",
            Error::ZeroAddress => "ZeroAddress",
            Error::MissingConsent(_) => "MissingConsent",
            Error::Uninitialized => "Uninitialized",
            Error::AlreadyInitialized => "AlreadyInitialized",
            Error::WrongProperty => "WrongProperty",
            Error::HashMismatch => "HashMismatch",
            Error::NoDocuments => "NoDocuments",
            Error::AlreadyApproved => "AlreadyApproved",
            Error::NotApproved => "NotApproved",
            Error::Paused => "Paused",
            Error::AlreadyMinted => "AlreadyMinted",
            Error::InsufficientPayment => "InsufficientPayment",
            Error::NonRightId => "NonRightId",
            Error::NotOwner => "NotOwner",
            Error::AlreadyFractionalized => "AlreadyFractionalized",
            Error::FractionalSupplyOutstanding => "FractionalSupplyOutstanding",
            Error::ZeroUnits => "ZeroUnits",
            Error::NoListing => "NoListing",
            Error::UnknownToken => "UnknownToken",
            Error::NotFractionalized => "NotFractionalized",
            Error::AlreadyPaused => "AlreadyPaused",
            Error::NotPaused => "NotPaused",
            Error::UnknownProperty(_) => "UnknownProperty",
            Error::UnknownImplementation(_) => "UnknownImplementation",
            Error::TimestampRegression { .. } => "TimestampRegression",
            Error::Overflow => "Overflow",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::VersionMismatch { .. } => "VersionMismatch",
            Error::CorruptSnapshot => "CorruptSnapshot",
            Error::ReplayDivergence(_) => "ReplayDivergence",
            Error::Parse(_) => "ParseError",
            Error::Encoding(_) => "EncodingError",
        }
    }

    pub fn is_authorization(&self) -> bool {
        matches!(self, Error::NotAuthorized)
    }
}

impl From<MerkleError> for Error {
    fn from(e: MerkleError) -> Self {
        match e {
            MerkleError::EmptyLeaves => Error::EmptyLeaves,
            MerkleError::IndexOutOfRange { index, len } => Error::IndexOutOfRange { index, len },
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
