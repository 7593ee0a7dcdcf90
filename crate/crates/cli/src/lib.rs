//! Library half of the `mvar` command-line tool: spec-string parsing, CSV
//! formatting and the subcommand runners. Kept separate from `main` so that
//! integration tests and fuzz targets can drive every entry point directly.

pub mod commands;
pub mod format;
pub mod parse;

pub use commands::{run, Cli, CliError, Command, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_NUMERIC};
pub use format::fmt_sig;
pub use parse::{parse_alpha_grid, parse_copula_list, parse_copula_spec, parse_margins, AlphaGrid};
