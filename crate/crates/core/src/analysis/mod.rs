//! Delay analysis: closed-form exponents, the composition optimiser, bounds,
//! exact enumeration oracles, Monte Carlo estimation and exponent fitting.
//!
//! Oracle probabilities and bounds are exact rationals; floating point only
//! appears in Monte Carlo summaries and regressions.

mod bounds;
mod exponents;
mod fit;
mod montecarlo;
mod optimize;
mod oracle;

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::gfq::GfError;
use crate::schemes::SchemeError;

pub use bounds::{
    bounds, harmonic_bounds, regime_child, regime_child_formula, regime_parent, HarmonicBounds, ParentPrediction,
    RegimeChild, RegimeParams,
};
pub use exponents::{jap_exponent, japb_exponent, predicted_exponent, RoundExponents};
pub use fit::{fit_exponent, two_point_exponent, ExponentFit};
pub use montecarlo::{monte_carlo, sample_trials, DelayStats, McOptions, TrialOutcome};
pub use optimize::{optimize, optimize_with, Optimum};
pub use oracle::{
    exact_round_probability, exact_round_probability_by_rows, lemma3_failure, lemma3_failure_by_convolution,
    lemma3_failure_printed, span_first_order, span_fullness, ENUMERATION_LIMIT,
};

/// Exact rationals used throughout the analysis.
pub type Rational = num::BigRational;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("instance needs {points} evaluations, above the enumeration limit of {limit}")]
    TooLarge { points: u128, limit: u128 },
    #[error("out of domain: {0}")]
    Domain(String),
    #[error("time budget of {0:.1} s exceeded")]
    BudgetExceeded(f64),
    #[error("degenerate sweep: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Field(#[from] GfError),
}

/// Wall-clock cap for long computations. Work either finishes inside the
/// budget or fails with [`AnalysisError::BudgetExceeded`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    deadline: Option<(Instant, Duration)>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Self { deadline: None }
    }

    pub fn seconds(secs: f64) -> Self {
        let d = Duration::from_secs_f64(secs);
        Self {
            deadline: Some((Instant::now() + d, d)),
        }
    }

    pub fn check(&self) -> Result<(), AnalysisError> {
        match self.deadline {
            Some((at, d)) if Instant::now() > at => Err(AnalysisError::BudgetExceeded(d.as_secs_f64())),
            _ => Ok(()),
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Self::unlimited()
    }
}
