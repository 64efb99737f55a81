use std::fmt;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};
use subplanck::io::{self, fmt_f64, Table};
use subplanck::Error;

use crate::args::Units;

pub const BUILD_ID: &str = env!("SUBPLANCK_BUILD_ID");

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
    Io { path: PathBuf, source: std::io::Error },
    /// A numerical-domain failure with a pointer to a command that can help.
    Redirect { source: Error, hint: String },
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::Core(e) | CliError::Redirect { source: e, .. } => match e {
                Error::NoFringes { .. } | Error::InsufficientRinging { .. } | Error::NotReal { .. } => 3,
                Error::Domain(_) => 4,
                _ => 2,
            },
        }
    }

    pub fn hint(&self) -> Option<&str> {
        match self {
            CliError::Redirect { hint, .. } => Some(hint),
            _ => None,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Core(e) | CliError::Redirect { source: e, .. } => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Sets `key` in the metadata, replacing an existing entry in place.
pub fn set_meta(table: &mut Table, key: &str, value: impl ToString) {
    let value = value.to_string();
    match table.metadata.iter_mut().find(|(k, _)| k == key) {
        Some(entry) => entry.1 = value,
        None => table.metadata.push((key.to_string(), value)),
    }
}

/// Prepends the command name and build id and echoes the unit convention.
pub fn stamp(mut table: Table, command: &str, units: &Units) -> Table {
    let mut head = vec![
        ("command".to_string(), command.to_string()),
        ("build".to_string(), BUILD_ID.to_string()),
    ];
    table.metadata.retain(|(k, _)| k != "command" && k != "build");
    head.append(&mut table.metadata);
    table.metadata = head;
    set_meta(&mut table, "hbar", fmt_f64(units.hbar));
    set_meta(&mut table, "P", fmt_f64(units.momentum));
    set_meta(&mut table, "L", fmt_f64(units.length));
    table
}

/// JSON object with the command, build id and units filled in.
pub fn json_header(command: &str, units: &Units) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("command".into(), command.into());
    m.insert("build".into(), BUILD_ID.into());
    m.insert("hbar".into(), units.hbar.into());
    m.insert("P".into(), units.momentum.into());
    m.insert("L".into(), units.length.into());
    m
}

pub fn write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    io::write_atomic(path, bytes).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn write_json(path: &Path, value: &Value) -> CliResult<()> {
    write(path, io::to_json(value).as_bytes())
}

/// `<out>.summary.json`.
pub fn summary_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".summary.json");
    PathBuf::from(name)
}
