//! `--config` files and the provenance header.
//!
//! Config entries are spliced into the argument list right after the
//! subcommand, ahead of the user's own flags; since every argument
//! overrides earlier occurrences of itself, command-line values win.

use clap::{ArgMatches, CommandFactory};
use sha2::{Digest, Sha256};

use crate::args::Cli;
use crate::Failure;

/// Arguments left out of the configuration hash: they never change results.
const UNHASHED: [&str; 3] = ["workers", "config", "out"];

pub fn command() -> clap::Command {
    let mut cmd = Cli::command();
    let names: Vec<String> = cmd.get_subcommands().map(|s| s.get_name().to_string()).collect();
    for name in names {
        cmd = cmd.mut_subcommand(&name, |s| {
            let inner: Vec<String> = s.get_subcommands().map(|x| x.get_name().to_string()).collect();
            let mut s = s.args_override_self(true);
            for n in inner {
                s = s.mut_subcommand(&n, |x| x.args_override_self(true));
            }
            s
        });
    }
    cmd
}

fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    let mut found = None;
    while let Some(a) = it.next() {
        if a == "--config" {
            found = it.next().cloned();
        } else if let Some(v) = a.strip_prefix("--config=") {
            found = Some(v.to_string());
        }
    }
    found
}

/// Returns `args` with the entries of the `--config` file inserted.
pub fn merge_config_file(args: &[String]) -> Result<Vec<String>, Failure> {
    let Some(path) = config_path(args) else {
        return Ok(args.to_vec());
    };
    let text = std::fs::read_to_string(&path).map_err(|e| Failure::data(format!("{path}: {e}")))?;
    let root = command();
    let mut sub = match args.get(1).and_then(|name| root.find_subcommand(name)) {
        Some(s) => s,
        None => return Ok(args.to_vec()),
    };
    let mut at = 2;
    if sub.has_subcommands() {
        match args.get(2).and_then(|name| sub.find_subcommand(name)) {
            Some(s) => {
                sub = s;
                at = 3;
            }
            None => return Ok(args.to_vec()),
        }
    }
    let mut extra = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("{path} line {}: expected key=value", k + 1)))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()) && key != "config")
            .ok_or_else(|| Failure::usage(format!("{path} line {}: unknown key {key:?}", k + 1)))?;
        if arg.get_action().takes_values() {
            extra.push(format!("--{key}={value}"));
        } else {
            match value {
                "true" => extra.push(format!("--{key}")),
                "false" => {}
                _ => return Err(Failure::usage(format!("{path} line {}: {key} expects true or false", k + 1))),
            }
        }
    }
    let mut out = args[..at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[at..]);
    Ok(out)
}

fn leaf(matches: &ArgMatches) -> (Vec<&str>, &ArgMatches) {
    let mut path = Vec::new();
    let mut m = matches;
    while let Some((name, sub)) = m.subcommand() {
        path.push(name);
        m = sub;
    }
    (path, m)
}

/// SHA-256 over the subcommand and every effective setting except those in
/// [`UNHASHED`].
pub fn config_hash(matches: &ArgMatches) -> String {
    let (path, m) = leaf(matches);
    let mut ids: Vec<&str> = m.ids().map(|id| id.as_str()).filter(|id| !UNHASHED.contains(id)).collect();
    ids.sort_unstable();
    let mut text = path.join(" ");
    text.push('\n');
    for id in ids {
        let Ok(Some(values)) = m.try_get_raw(id) else { continue };
        let values: Vec<String> = values.map(|v| v.to_string_lossy().into_owned()).collect();
        text.push_str(&format!("{id}={}\n", values.join(",")));
    }
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// `# walign <version> seed=<seed> config=<hash>`
pub fn provenance(matches: &ArgMatches, seed: u64) -> String {
    format!("# walign {} seed={seed} config={}", env!("CARGO_PKG_VERSION"), config_hash(matches))
}
