use serde::Serialize;

use super::AnalysisError;

/// Least-squares fit of `ln D = ln C + T ln x`, with `x = q` and with
/// `x = q - 1`. The two coordinate choices agree as `q` grows but differ
/// noticeably on small fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_q_minus_1: f64,
    pub intercept_q_minus_1: f64,
    pub points: usize,
}

impl ExponentFit {
    /// Fitted delay constant `C` in `ln q` coordinates.
    pub fn constant(&self) -> f64 {
        self.intercept.exp()
    }
}

fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Fits the delay exponent from `(q, mean delay)` pairs.
pub fn fit_exponent(sweep: &[(u32, f64)]) -> Result<ExponentFit, AnalysisError> {
    let mut qs: Vec<u32> = sweep.iter().map(|p| p.0).collect();
    qs.sort_unstable();
    qs.dedup();
    if qs.len() < 3 {
        return Err(AnalysisError::Degenerate(format!(
            "need at least 3 distinct field sizes, got {}",
            qs.len()
        )));
    }
    if let Some(&(q, d)) = sweep.iter().find(|(q, d)| *q < 3 || !(*d > 0.0) || !d.is_finite()) {
        return Err(AnalysisError::Degenerate(format!("unusable point q = {q}, delay = {d}")));
    }
    let ys: Vec<f64> = sweep.iter().map(|p| p.1.ln()).collect();
    let xq: Vec<f64> = sweep.iter().map(|p| (p.0 as f64).ln()).collect();
    let xq1: Vec<f64> = sweep.iter().map(|p| (p.0 as f64 - 1.0).ln()).collect();
    let (slope, intercept) = ols(&xq, &ys);
    let (slope_q_minus_1, intercept_q_minus_1) = ols(&xq1, &ys);
    Ok(ExponentFit {
        slope,
        intercept,
        slope_q_minus_1,
        intercept_q_minus_1,
        points: sweep.len(),
    })
}

/// Local exponent `ln(d2 / d1) / ln(q2 / q1)` between two field sizes.
pub fn two_point_exponent(q1: u32, d1: f64, q2: u32, d2: f64) -> f64 {
    (d2 / d1).ln() / (q2 as f64 / q1 as f64).ln()
}
