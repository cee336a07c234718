use num::rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::RandomStream;
use crate::gfq::PrimeField;
use crate::schemes::{RunOptions, SchemeError, SchemeSpec};

use super::{AnalysisError, Budget};

#[derive(Debug, Clone, Copy, Default)]
pub struct McOptions {
    pub max_wait: Option<u64>,
    pub budget: Budget,
}

/// One simulated run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub delay: f64,
    pub round_waits: Vec<f64>,
    pub resamples: u64,
}

/// Summary of independent runs of one scheme.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DelayStats {
    pub scheme: String,
    pub n: usize,
    pub q: u32,
    pub trials: u64,
    pub mean_delay: f64,
    pub std_error: f64,
    pub round_means: Vec<f64>,
    pub round_std_errors: Vec<f64>,
    #[serde(serialize_with = "ser_ratio")]
    pub dof: Ratio<u64>,
    pub resamples: u64,
}

fn ser_ratio<S: serde::Serializer>(r: &Ratio<u64>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

fn mean_and_se(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Runs trials `0..trials`; trial `i` draws its channel from stream `i` of
/// `seed`, so results do not depend on the thread count.
pub fn sample_trials(
    spec: &SchemeSpec,
    n: usize,
    field: PrimeField,
    trials: u64,
    seed: u64,
    opts: &McOptions,
) -> Result<Vec<TrialOutcome>, AnalysisError> {
    if trials == 0 {
        return Err(AnalysisError::Domain("at least one trial is required".into()));
    }
    spec.validate(n)?;
    if spec.needs_alignment() && field.q() == 2 {
        return Err(SchemeError::FieldTooSmall(2).into());
    }
    let run_opts = RunOptions { max_wait: opts.max_wait };
    (0..trials)
        .into_par_iter()
        .map(|i| {
            opts.budget.check()?;
            let mut stream = RandomStream::new(n, field, seed, i);
            let exec = spec.run(&mut stream, &run_opts)?;
            Ok(TrialOutcome {
                delay: exec.delay(),
                round_waits: exec.round_waits(),
                resamples: exec.resamples(),
            })
        })
        .collect()
}

/// Mean delay and per-round mean waits over `trials` independent runs.
pub fn monte_carlo(
    spec: &SchemeSpec,
    n: usize,
    field: PrimeField,
    trials: u64,
    seed: u64,
    opts: &McOptions,
) -> Result<DelayStats, AnalysisError> {
    let outcomes = sample_trials(spec, n, field, trials, seed, opts)?;
    let (mean_delay, std_error) = mean_and_se(outcomes.iter().map(|o| o.delay));
    let rounds = outcomes[0].round_waits.len();
    let (round_means, round_std_errors) = (0..rounds)
        .map(|k| mean_and_se(outcomes.iter().map(move |o| o.round_waits[k])))
        .unzip();
    Ok(DelayStats {
        scheme: spec.to_string(),
        n,
        q: field.q(),
        trials,
        mean_delay,
        std_error,
        round_means,
        round_std_errors,
        dof: spec.dof(n),
        resamples: outcomes.iter().map(|o| o.resamples).sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(q: u64) -> PrimeField {
        PrimeField::new(q).unwrap()
    }

    #[test]
    fn tdma_is_deterministic() {
        let s = monte_carlo(&SchemeSpec::Tdma, 5, gf(3), 10, 1, &McOptions::default()).unwrap();
        assert_eq!(s.mean_delay, 5.0);
        assert_eq!(s.std_error, 0.0);
        assert_eq!(s.round_means, vec![1.0; 5]);
    }

    #[test]
    fn ngjv_single_user_mean() {
        let s = monte_carlo(&SchemeSpec::Ngjv, 1, gf(5), 20_000, 7, &McOptions::default()).unwrap();
        assert!((s.mean_delay - 4.0).abs() < 4.0 * s.std_error, "{s:?}");
        assert!(s.resamples > 0);
    }

    #[test]
    fn reproducible_across_calls() {
        let spec = SchemeSpec::JapB("1,2".parse().unwrap());
        let a = sample_trials(&spec, 3, gf(5), 200, 3, &McOptions::default()).unwrap();
        let b = sample_trials(&spec, 3, gf(5), 200, 3, &McOptions::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_inputs() {
        let o = McOptions::default();
        assert!(monte_carlo(&SchemeSpec::Ngjv, 2, gf(3), 0, 1, &o).is_err());
        assert!(monte_carlo(&SchemeSpec::Ngjv, 2, gf(2), 10, 1, &o).is_err());
        assert!(monte_carlo(&SchemeSpec::Tdma, 2, gf(2), 10, 1, &o).is_ok());
        assert!(monte_carlo(&SchemeSpec::Jap("1,2".parse().unwrap()), 4, gf(3), 10, 1, &o).is_err());
    }
}
