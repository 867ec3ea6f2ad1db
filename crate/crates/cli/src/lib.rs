//! Command-line driver for the estate ledger.
//!
//! Each mutating command (or script line) executes as one transaction and
//! is sealed into its own block by the senior administrator, then the state
//! directory is persisted. Rejected calls are sealed too, so the chain is a
//! complete audit log; queries never produce a block.

pub mod args;
pub mod commands;
pub mod error;
pub mod store;

use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Parser;
use serde_json::{json, Value};

use estate_core::{canonical_json, snapshot, Allowlist, Error, Ledger};

use crate::args::{ChainCmd, Cli, Command, StateCmd, TxFlags};
use crate::commands::Dispatch;
use crate::error::{parse_err, CliError};
use crate::store::{write_atomic, StateDir};

pub use crate::error::{EXIT_AUTH, EXIT_DOMAIN, EXIT_OK, EXIT_PARSE};

/// Parses `argv` and runs it, writing results to `out` and diagnostics to
/// `err`. Returns the process exit status.
pub fn main_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            let _ = write!(err, "{e}");
            return EXIT_PARSE;
        }
    };
    match run(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let printer = Printer { json: cli.json };
    let cwd = Path::new(".");
    match &cli.command {
        Command::Init => {
            let (_dir, ledger) = StateDir::create(&cli.state, cli.tx.timestamp.unwrap_or_else(now))?;
            let genesis = ledger.chain().tip().expect("genesis").hash;
            printer.print(out, &json!({ "genesis": genesis }))
        }
        Command::Chain(ChainCmd::Verify) => {
            let dir = StateDir::open(&cli.state)?;
            if !dir.read_chain()?.verify() {
                return Err(Error::CorruptSnapshot.into());
            }
            printer.print(out, &json!("OK"))
        }
        Command::State(StateCmd::Export { file }) => {
            let dir = StateDir::open(&cli.state)?;
            let ledger = dir.load()?;
            let bytes = snapshot::export(&ledger)?;
            write_atomic(file, &bytes)?;
            let snap: snapshot::StateSnapshot = serde_json::from_slice(&bytes).expect("just encoded");
            printer.print(out, &json!({ "digest": snap.digest, "file": file.display().to_string() }))
        }
        Command::State(StateCmd::Import { file }) => {
            let bytes = fs::read(file).map_err(|e| CliError::Io(format!("{}: {e}", file.display())))?;
            let ledger = snapshot::import(&bytes)?;
            let dir = StateDir::create_or_open(&cli.state)?;
            dir.replace(&ledger)?;
            printer.print(out, &json!({ "digest": ledger.state_digest() }))
        }
        Command::Run { script } => {
            let dir = StateDir::open(&cli.state)?;
            let mut ledger = dir.load()?;
            apply_allowlist(&mut ledger, cli)?;
            let text = fs::read_to_string(script).map_err(|e| CliError::Io(format!("{}: {e}", script.display())))?;
            let base = script.parent().unwrap_or(cwd);
            run_script(&mut ledger, &dir, &text, base, &cli.tx, &printer, out)?;
            printer.print(out, &json!({ "digest": ledger.state_digest() }))
        }
        command => {
            let dir = StateDir::open(&cli.state)?;
            let mut ledger = dir.load()?;
            apply_allowlist(&mut ledger, cli)?;
            let (result, mutated) = step(&mut ledger, command, &cli.tx, cwd);
            if mutated {
                dir.save(&ledger)?;
            }
            printer.print(out, &result?)
        }
    }
}

fn apply_allowlist(ledger: &mut Ledger, cli: &Cli) -> Result<(), CliError> {
    if let Some(path) = &cli.allowlist {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        ledger.set_verifier(Arc::new(Allowlist::parse(&text)?));
    }
    Ok(())
}

/// Runs one command. If it produced a transaction, seals it into a block.
/// Returns the command result and whether the ledger changed.
pub fn step(ledger: &mut Ledger, command: &Command, flags: &TxFlags, base: &Path) -> (Result<Value, CliError>, bool) {
    let before = ledger.clone();
    let result = Dispatch { ledger: &mut *ledger, flags, base }.run(command);
    if ledger.pending().is_empty() {
        return (result, false);
    }
    let Some(validator) = ledger.registry().first_administrator() else {
        // no administrator can seal: only a rejected pre-bootstrap call gets here
        *ledger = before;
        return (result, false);
    };
    let tip = ledger.chain().tip().map_or(0, |b| b.timestamp);
    let timestamp = flags.timestamp.unwrap_or_else(|| now().max(tip));
    if let Err(e) = ledger.seal_block(&validator, timestamp) {
        *ledger = before;
        return (result.and(Err(e.into())), false);
    }
    (result, true)
}

/// Executes `text` line by line, printing each result and persisting after
/// every mutating line. Stops at the first failing line; earlier lines stay
/// committed.
pub fn run_script(
    ledger: &mut Ledger,
    dir: &StateDir,
    text: &str,
    base: &Path,
    defaults: &TxFlags,
    printer: &Printer,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let wrap = |e: CliError| CliError::Script { line, source: Box::new(e) };
        let Some((command, flags)) = parse_script_line(raw, defaults).map_err(wrap)? else { continue };
        let (result, mutated) = step(ledger, &command, &flags, base);
        if mutated {
            dir.save(ledger).map_err(wrap)?;
        }
        printer.print(out, &result.map_err(wrap)?)?;
    }
    Ok(())
}

/// Parses one script line: `[as <addr>] <noun> <verb> [args] [flags]`.
/// Blank lines and `#` comments yield `None`.
pub fn parse_script_line(raw: &str, defaults: &TxFlags) -> Result<Option<(Command, TxFlags)>, CliError> {
    let trimmed = raw.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let mut words = shlex::split(trimmed).ok_or_else(|| parse_err("unbalanced quotes"))?;
    let mut caller = None;
    if words.first().map(String::as_str) == Some("as") {
        if words.len() < 2 {
            return Err(parse_err("`as` needs an address"));
        }
        caller = Some(words[1].clone());
        words.drain(..2);
    }
    let cli = Cli::try_parse_from(std::iter::once("estate".to_string()).chain(words))
        .map_err(|e| parse_err(e.render().to_string().lines().next().unwrap_or_default().to_string()))?;
    if matches!(cli.command, Command::Init | Command::Run { .. } | Command::State(StateCmd::Import { .. } | StateCmd::Export { .. })) {
        return Err(parse_err("init, run and state import/export are not allowed in scripts"));
    }
    let mut flags = cli.tx;
    match (caller, &flags.caller) {
        (Some(a), Some(b)) if a != *b => return Err(parse_err("conflicting `as` prefix and --as flag")),
        (Some(a), _) => flags.caller = Some(a),
        (None, _) => {}
    }
    if flags.caller.is_none() {
        flags.caller = defaults.caller.clone();
    }
    if flags.timestamp.is_none() {
        flags.timestamp = defaults.timestamp;
    }
    Ok(Some((cli.command, flags)))
}

/// Renders results as text lines or canonical JSON.
pub struct Printer {
    pub json: bool,
}

impl Printer {
    pub fn print(&self, out: &mut dyn Write, value: &Value) -> Result<(), CliError> {
        let text = if self.json {
            String::from_utf8(canonical_json(value)?).expect("JSON is UTF-8")
        } else {
            render(value)
        };
        writeln!(out, "{text}").map_err(|e| CliError::Io(e.to_string()))
    }
}

fn render(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        Value::Object(map) => map
            .iter()
            .map(|(k, v)| format!("{k}: {}", inline(v)))
            .collect::<Vec<_>>()
            .join("\n"),
        other => inline(other),
    }
}

fn inline(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        Value::Null => "-".to_string(),
        other => other.to_string(),
    }
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
