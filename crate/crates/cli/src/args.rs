use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "estate", version, about = "Permissioned real-estate tokenization ledger")]
pub struct Cli {
    /// State directory.
    #[arg(long, global = true, default_value = "estate-state")]
    pub state: PathBuf,

    /// Emit canonical JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,

    /// File of allowed key fingerprints (one hex SHA-256 per line).
    #[arg(long, global = true)]
    pub allowlist: Option<PathBuf>,

    #[command(flatten)]
    pub tx: TxFlags,

    #[command(subcommand)]
    pub command: Command,
}

/// Per-transaction flags; valid after any noun/verb.
#[derive(Debug, Clone, Default, Args)]
pub struct TxFlags {
    /// Caller address (`0x..`, `@<key>` or `proxy:<n>`).
    #[arg(long = "as", global = true, value_name = "ADDR")]
    pub caller: Option<String>,

    /// Native value attached to the call.
    #[arg(long, global = true, default_value_t = 0)]
    pub value: u64,

    /// Block timestamp; wall clock when absent.
    #[arg(long, global = true)]
    pub timestamp: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create a state directory holding only the genesis block.
    Init,
    /// Run a scenario script, one command per line.
    Run { script: PathBuf },
    /// Register, inspect and remove stakeholders.
    #[command(subcommand)]
    Stakeholder(StakeholderCmd),
    /// Content-addressed document store.
    #[command(subcommand)]
    Object(ObjectCmd),
    /// Merkle roots and inclusion proofs over cids.
    #[command(subcommand)]
    Merkle(MerkleCmd),
    /// Factory setup, deployment, pause and upgrades.
    #[command(subcommand)]
    Factory(FactoryCmd),
    /// Property documents and approval.
    #[command(subcommand)]
    Property(PropertyCmd),
    /// Mint, trade, burn and distribute property tokens.
    #[command(subcommand)]
    Token(TokenCmd),
    /// Inspect and verify the block log.
    #[command(subcommand)]
    Chain(ChainCmd),
    /// State digest, snapshot export and import.
    #[command(subcommand)]
    State(StateCmd),
    /// Native balances.
    #[command(subcommand)]
    Account(AccountCmd),
}

#[derive(Debug, Subcommand)]
pub enum StakeholderCmd {
    /// Register the first administrator; the caller is derived from the key.
    Bootstrap { key: String, info: String },
    Register { role: String, key: String, info: String },
    Grant { target: String, role: String },
    Remove { target: String },
    Show { target: String },
    List,
    /// Address derived from a public key.
    Address { key: String },
    /// Fingerprint the verification service sees for a key.
    Fingerprint { key: String },
}

#[derive(Debug, Subcommand)]
pub enum ObjectCmd {
    /// Store a file's bytes, or a literal string with --text.
    Put {
        #[arg(required_unless_present = "text")]
        path: Option<PathBuf>,
        #[arg(long, conflicts_with = "path")]
        text: Option<String>,
    },
    Get {
        cid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Canonicalize and store right metadata from a JSON file.
    Metadata { path: PathBuf },
    /// Content id of a file without storing it.
    Cid { path: PathBuf },
    List,
}

#[derive(Debug, Subcommand)]
pub enum MerkleCmd {
    Root {
        #[arg(required = true)]
        cids: Vec<String>,
    },
    Prove {
        index: usize,
        #[arg(required = true)]
        cids: Vec<String>,
    },
    /// Verify a proof read from a JSON file.
    Verify { root: String, leaf: String, proof: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum FactoryCmd {
    Init {
        version: u64,
        behavior: String,
        #[arg(long)]
        admin: String,
        #[arg(long)]
        upgrader: String,
    },
    Deploy {
        #[arg(long)]
        treasury: String,
        #[arg(long)]
        upgrader: String,
        #[arg(long)]
        admin: String,
        #[arg(long)]
        uri: String,
        #[arg(long)]
        name: String,
        #[arg(long, default_value = "")]
        description: String,
    },
    Pause,
    Unpause,
    Upgrade { version: u64, behavior: String },
    Show,
    Proxies,
}

#[derive(Debug, Subcommand)]
pub enum PropertyCmd {
    RegisterDoc { property: String, cid: String },
    /// Submit the document root; the property address defaults to the target.
    Approve {
        property: String,
        root: String,
        #[arg(long)]
        prop_address: Option<String>,
    },
    Root { property: String },
    Show { property: String },
    Uri { property: String, id: String },
}

#[derive(Debug, Subcommand)]
pub enum TokenCmd {
    Mint {
        property: String,
        id: String,
        price: u64,
        #[arg(long, default_value = "")]
        data: String,
    },
    MintBatch {
        property: String,
        #[arg(long, value_delimiter = ',', required = true)]
        ids: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        prices: Vec<u64>,
        /// Defaults to 1 per id.
        #[arg(long, value_delimiter = ',')]
        amounts: Vec<u64>,
        #[arg(long, default_value = "")]
        data: String,
    },
    Fractionalize { property: String, right: String, units: u64, price: u64 },
    Transfer {
        property: String,
        to: String,
        id: String,
        amount: u64,
        #[arg(long, default_value = "")]
        data: String,
    },
    Burn { property: String, from: String, id: String, amount: u64 },
    BurnBatch {
        property: String,
        from: String,
        #[arg(long, value_delimiter = ',', required = true)]
        ids: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        amounts: Vec<u64>,
    },
    SetPrice { property: String, id: String, price: u64 },
    Distribute { property: String, right: String, total: u64 },
    Approve { property: String, operator: String, approved: bool },
    BatchTransfer {
        property: String,
        from: String,
        to: String,
        #[arg(long, value_delimiter = ',', required = true)]
        ids: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        amounts: Vec<u64>,
    },
    /// Record consent to a swap described in a JSON file.
    Consent { swap: PathBuf },
    Swap { swap: PathBuf },
    Balance {
        property: String,
        account: String,
        #[arg(required = true)]
        ids: Vec<String>,
    },
    Supply { property: String, id: String },
    Listing { property: String, id: String },
}

#[derive(Debug, Subcommand)]
pub enum ChainCmd {
    Verify,
    Show { index: Option<u64> },
    Length,
}

#[derive(Debug, Subcommand)]
pub enum StateCmd {
    Digest,
    Export { file: PathBuf },
    Import { file: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum AccountCmd {
    Faucet { to: String, amount: u64 },
    Transfer { to: String, amount: u64 },
    Balance { account: String },
}
