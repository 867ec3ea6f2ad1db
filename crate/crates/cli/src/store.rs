//! On-disk state directory.
//!
//! Layout: `chain.json` (the block log), `state.json` (world state tagged
//! with the chain tip it belongs to), `objects/<hex>.bin` (raw object
//! bytes) and a `LOCK` file held while a process has the directory open.
//! Files are replaced by write-then-rename. The chain is written before the
//! state, so a crash in between leaves a stale `state.json` that is rebuilt
//! from the chain on the next load.

use std::fs::{self, File, OpenOptions};
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use estate_core::{canonical_json, Chain, Cid, Error, Hash32, Ledger, ObjectStore, WorldState};

use crate::error::CliError;

const CHAIN_FILE: &str = "chain.json";
const STATE_FILE: &str = "state.json";
const OBJECTS_DIR: &str = "objects";
const LOCK_FILE: &str = "LOCK";

#[derive(Serialize, Deserialize)]
struct StateFile {
    tip: Hash32,
    world: WorldState,
}

/// An open, locked state directory.
#[derive(Debug)]
pub struct StateDir {
    root: PathBuf,
}

impl StateDir {
    /// Creates `root` with a genesis-only ledger.
    pub fn create(root: &Path, timestamp: u64) -> Result<(StateDir, Ledger), CliError> {
        fs::create_dir_all(root.join(OBJECTS_DIR)).map_err(|e| io(root, e))?;
        let dir = StateDir::lock(root)?;
        if root.join(CHAIN_FILE).exists() {
            return Err(CliError::Usage(format!("{} is already initialized", root.display())));
        }
        let ledger = Ledger::genesis(timestamp);
        dir.save(&ledger)?;
        Ok((dir, ledger))
    }

    pub fn open(root: &Path) -> Result<StateDir, CliError> {
        if !root.join(CHAIN_FILE).exists() {
            return Err(CliError::Usage(format!("{} is not initialized; run `estate init`", root.display())));
        }
        StateDir::lock(root)
    }

    fn lock(root: &Path) -> Result<StateDir, CliError> {
        let path = root.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(StateDir { root: root.to_path_buf() })
            }
            Err(e) if e.kind() == ErrorKind::AlreadyExists => Err(CliError::Io(format!(
                "{} is locked by another process (remove {} if it is stale)",
                root.display(),
                path.display()
            ))),
            Err(e) => Err(io(&path, e)),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// The block log as stored, without any checks.
    pub fn read_chain(&self) -> Result<Chain, CliError> {
        read_json(&self.root.join(CHAIN_FILE))
    }

    pub fn load(&self) -> Result<Ledger, CliError> {
        let chain = self.read_chain()?;
        if chain.is_empty() || !chain.verify() {
            return Err(CliError::Ledger(Error::CorruptSnapshot));
        }
        let tip = chain.tip().expect("non-empty").hash;

        let state: Option<StateFile> = match read_json::<StateFile>(&self.root.join(STATE_FILE)) {
            Ok(s) if s.tip == tip => Some(s),
            _ => None,
        };
        let Some(state) = state else {
            return Ok(Ledger::replay(&chain)?);
        };

        let mut store = ObjectStore::default();
        let objects = self.root.join(OBJECTS_DIR);
        if objects.exists() {
            for entry in fs::read_dir(&objects).map_err(|e| io(&objects, e))? {
                let path = entry.map_err(|e| io(&objects, e))?.path();
                let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else { continue };
                if path.extension().and_then(|e| e.to_str()) != Some("bin") {
                    continue;
                }
                let cid = Cid(stem.parse().map_err(|_| CliError::Ledger(Error::CorruptSnapshot))?);
                let bytes = fs::read(&path).map_err(|e| io(&path, e))?;
                store.insert_verified(cid, bytes)?;
            }
        }
        Ok(Ledger::from_parts(state.world, store, chain))
    }

    pub fn save(&self, ledger: &Ledger) -> Result<(), CliError> {
        let objects = self.root.join(OBJECTS_DIR);
        fs::create_dir_all(&objects).map_err(|e| io(&objects, e))?;
        for (cid, bytes) in ledger.store().iter() {
            let path = objects.join(format!("{}.bin", cid.digest().to_hex()));
            if !path.exists() {
                write_atomic(&path, bytes)?;
            }
        }
        write_atomic(&self.root.join(CHAIN_FILE), &canonical_json(ledger.chain())?)?;
        let tip = ledger.chain().tip().map(|b| b.hash).unwrap_or(Hash32::ZERO);
        let state = StateFile { tip, world: ledger.state().clone() };
        write_atomic(&self.root.join(STATE_FILE), &canonical_json(&state)?)
    }
}

impl StateDir {
    /// Replaces the directory contents with `ledger`, dropping object files
    /// it does not hold.
    pub fn replace(&self, ledger: &Ledger) -> Result<(), CliError> {
        let objects = self.root.join(OBJECTS_DIR);
        if objects.exists() {
            for entry in fs::read_dir(&objects).map_err(|e| io(&objects, e))? {
                let path = entry.map_err(|e| io(&objects, e))?.path();
                let keep = path
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .and_then(|s| s.parse::<Hash32>().ok())
                    .is_some_and(|h| ledger.store().contains(&Cid(h)));
                if !keep {
                    fs::remove_file(&path).map_err(|e| io(&path, e))?;
                }
            }
        }
        self.save(ledger)
    }

    /// Opens `root` for an import, creating it if needed.
    pub fn create_or_open(root: &Path) -> Result<StateDir, CliError> {
        fs::create_dir_all(root.join(OBJECTS_DIR)).map_err(|e| io(root, e))?;
        StateDir::lock(root)
    }
}

impl Drop for StateDir {
    fn drop(&mut self) {
        let _ = fs::remove_file(self.root.join(LOCK_FILE));
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let bytes = fs::read(path).map_err(|e| io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|_| CliError::Ledger(Error::CorruptSnapshot))
}

/// Writes `bytes` to a sibling temp file, syncs it, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    let mut f = File::create(&tmp).map_err(|e| io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| io(&tmp, e))?;
    f.sync_all().map_err(|e| io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io(path, e))
}

fn io(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}
