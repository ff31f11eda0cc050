//! Oracles and experiments of the security model, run as executable
//! fixtures. Adversaries here are scripted strategies, not searches.

mod correctness;
pub mod oracles;
mod sanity;

use thiserror::Error;

use crate::ngs::NgsError;

pub use correctness::{correctness_experiment, run_correctness, ExperimentConfig, Fault};
pub use oracles::{
    CorruptPhase, OracleLists, OracleState, RevealedKeys, SignedRecord, TraceRecord,
};
pub use sanity::{
    anonymity_fixture, anonymity_score, run_experiment_sanity, ExperimentName, SanityReport,
    StrategyOutcome, ANON_TOLERANCE, ANON_TRIALS,
};

/// An oracle either refuses a query (its guard returned ⊥) or the
/// underlying scheme operation failed. The two are kept apart.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("refused: {0}")]
    Refused(&'static str),
    #[error(transparent)]
    Scheme(#[from] NgsError),
}
