use num::rational::Ratio;
use num::{BigInt, One, Zero};
use serde::Serialize;

use super::{AnalysisError, Rational};

fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

fn frac(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

fn ratio_to_big(r: Ratio<u64>) -> Rational {
    Rational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

fn floor_u64(r: Ratio<u64>) -> u64 {
    r.numer() / r.denom()
}

/// `n/K (n-2) - (2n-K-2) <= T(n, K) <= n/K (n-2)`, valid for `1 <= K <= n-2`.
pub fn bounds(n: usize, k: usize) -> Result<(Rational, Rational), AnalysisError> {
    if k == 0 || k + 2 > n {
        return Err(AnalysisError::Domain(format!("bounds need 1 <= K <= n - 2, got n = {n}, K = {k}")));
    }
    let (n, k) = (n as i64, k as i64);
    let upper = frac(n * (n - 2), k);
    let lower = &upper - int(2 * n - k - 2);
    Ok((lower, upper))
}

/// Partial harmonic sum `S(n, K) = sum_{k=1}^K 1/(n-k-1)` with its bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarmonicBounds {
    pub s: Rational,
    /// `K / (n - 2)`.
    pub lower: Rational,
    /// `K / (n - K - 2)`; only defined for `K <= n - 3`.
    pub upper: Option<Rational>,
}

pub fn harmonic_bounds(n: usize, k: usize) -> Result<HarmonicBounds, AnalysisError> {
    if k == 0 || k + 2 > n {
        return Err(AnalysisError::Domain(format!(
            "harmonic sum needs 1 <= K <= n - 2, got n = {n}, K = {k}"
        )));
    }
    let (n, k) = (n as i64, k as i64);
    let s = (1..=k).fold(Rational::zero(), |acc, j| acc + frac(1, n - j - 1));
    let upper = (k + 3 <= n).then(|| frac(k, n - k - 2));
    Ok(HarmonicBounds {
        s,
        lower: frac(k, n - 2),
        upper,
    })
}

/// Many-user limits: constant DOF `alpha` (Regime I) or DOF `beta / n`
/// (Regime II).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeParams {
    I { alpha: Ratio<u64> },
    II { beta: Ratio<u64> },
}

impl RegimeParams {
    pub fn regime_i(alpha: Ratio<u64>) -> Result<Self, AnalysisError> {
        if alpha.is_zero() || alpha > Ratio::new(1, 2) {
            return Err(AnalysisError::Domain(format!("alpha must lie in (0, 1/2], got {alpha}")));
        }
        Ok(Self::I { alpha })
    }

    pub fn regime_ii(beta: Ratio<u64>) -> Result<Self, AnalysisError> {
        if beta < Ratio::one() {
            return Err(AnalysisError::Domain(format!("beta must be at least 1, got {beta}")));
        }
        Ok(Self::II { beta })
    }
}

/// What the parent-scheme asymptotics predict at a given `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParentPrediction {
    /// Regime I: `T(n) ~ n^2 / (floor(1/alpha) - 1)`, using `K` rounds.
    Asymptote { k: usize, value: Rational },
    /// Regime II: `(beta - 2) n <= T(n) <= beta n` up to `epsilon n`.
    Bracket { k: usize, lower: Rational, upper: Rational },
}

impl ParentPrediction {
    pub fn rounds(&self) -> usize {
        match self {
            ParentPrediction::Asymptote { k, .. } | ParentPrediction::Bracket { k, .. } => *k,
        }
    }
}

pub fn regime_parent(params: RegimeParams, n: usize) -> Result<ParentPrediction, AnalysisError> {
    let nn = n as i64;
    match params {
        RegimeParams::I { alpha } => {
            let k = floor_u64(alpha.recip()) as i64 - 1;
            if k < 1 {
                return Err(AnalysisError::Domain(format!("alpha = {alpha} leaves no rounds")));
            }
            Ok(ParentPrediction::Asymptote {
                k: k as usize,
                value: frac(nn * nn, k),
            })
        }
        RegimeParams::II { beta } => {
            let k = floor_u64(Ratio::from_integer(n as u64) / beta) as i64 - 1;
            if k < 1 {
                return Err(AnalysisError::Domain(format!("beta = {beta} leaves no rounds at n = {n}")));
            }
            let b = ratio_to_big(beta);
            Ok(ParentPrediction::Bracket {
                k: k as usize,
                lower: (&b - int(2)) * int(nn),
                upper: b * int(nn),
            })
        }
    }
}

/// Child of `JAP-B([m])` chosen to meet the regime's DOF.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegimeChild {
    pub m: usize,
    /// `(m - 1)(m - 2)`.
    pub exponent: u64,
}

pub fn regime_child(params: RegimeParams, n: usize) -> Result<RegimeChild, AnalysisError> {
    let m = match params {
        RegimeParams::I { alpha } => floor_u64(alpha * Ratio::from_integer(2 * n as u64)),
        RegimeParams::II { beta } => floor_u64(beta * Ratio::from_integer(2)),
    } as usize;
    if m == 0 || m > n {
        return Err(AnalysisError::Domain(format!("child size m = {m} is not in [1, n = {n}]")));
    }
    let mi = m as i64;
    Ok(RegimeChild {
        m,
        exponent: ((mi - 1) * (mi - 2)) as u64,
    })
}

/// Regime I child expansion `4 alpha^2 n^2 - 6 alpha n + 2`.
pub fn regime_child_formula(alpha: Ratio<u64>, n: usize) -> Rational {
    let a = ratio_to_big(alpha);
    let n = int(n as i64);
    int(4) * &a * &a * &n * &n - int(6) * &a * &n + int(2)
}
