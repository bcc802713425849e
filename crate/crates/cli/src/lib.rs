//! Library side of the `ric` binary: file formats, run manifests, the SVG
//! renderer, and the subcommand implementations.

pub mod commands;
pub mod formats;
pub mod manifest;
pub mod svg;

use std::fmt;

/// Command errors split by exit code: domain failures (invalid graphs,
/// intractable metrics, exhausted retry budgets) exit 1, usage and IO
/// failures exit 2.
#[derive(Debug)]
pub enum CliError {
    Domain(anyhow::Error),
    Input(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Input(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Domain(e) | CliError::Input(e) => write!(f, "{e:#}"),
        }
    }
}

impl std::error::Error for CliError {}

pub(crate) fn domain<E: Into<anyhow::Error>>(e: E) -> CliError {
    CliError::Domain(e.into())
}

pub(crate) fn input<E: Into<anyhow::Error>>(e: E) -> CliError {
    CliError::Input(e.into())
}

pub(crate) fn usage(msg: &'static str) -> CliError {
    CliError::Input(anyhow::anyhow!(msg))
}
