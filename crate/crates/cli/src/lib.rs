//! Front end for the `ergodic-align` binary: argument parsing, the
//! subcommands, and CSV/JSON rendering. Every command returns its full
//! output as a string, so nothing is written unless the command succeeds.

mod args;
mod commands;
mod output;

use ergodic_align::analysis::AnalysisError;
use ergodic_align::gfq::GfError;
use ergodic_align::schemes::SchemeError;
use thiserror::Error;

pub use args::{
    Cli, Command, ExactCommand, FigureArgs, FitArgs, Format, Method, OptimizeArgs, RegimesArgs, SchemeArgs,
    SchemeName, SimulateArgs, TableArgs,
};
pub use commands::{
    execute, figure_rows, parse_ratio, regime_rows, scheme_spec, table_rows, FigureRow, FitRow, OptimizeRow,
    RegimeRow, SimulateRow, TableRow, ExactRow,
};
pub use output::render;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Field(#[from] GfError),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;
