//! Exact probabilities by exhaustive enumeration, plus the closed forms they
//! are checked against.

use num::{BigInt, One, Zero};
use rayon::prelude::*;

use crate::channel::ChannelMatrix;
use crate::gfq::{rank, FieldVector, PrimeField};
use crate::schemes::{beamform, recovery_check, Composition, SchemeError, SlotUse};

use super::{AnalysisError, Rational};

/// Largest number of points any oracle will enumerate.
pub const ENUMERATION_LIMIT: u128 = 100_000_000;

fn guard(base: u128, exp: usize) -> Result<u128, AnalysisError> {
    let mut points: u128 = 1;
    for _ in 0..exp {
        points = points.saturating_mul(base);
        if points > ENUMERATION_LIMIT {
            return Err(AnalysisError::TooLarge {
                points,
                limit: ENUMERATION_LIMIT,
            });
        }
    }
    Ok(points)
}

fn ratio(num: u128, den: u128) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Writes the base-`(q-1)` digits of `idx`, shifted into `1..q`, to `out`.
fn nonzero_digits(mut idx: u64, q: u32, out: &mut [u32]) {
    let b = (q - 1) as u64;
    for v in out.iter_mut() {
        *v = (idx % b) as u32 + 1;
        idx /= b;
    }
}

fn matrix_from_raw(field: PrimeField, n: usize, raw: &[u32], slot: u64) -> ChannelMatrix {
    let entries = raw.iter().map(|&v| field.element(v as u64)).collect();
    ChannelMatrix::new(field, n, entries, slot).expect("entries are nonzero")
}

struct RoundSetup<'a> {
    field: PrimeField,
    n: usize,
    receivers: Vec<usize>,
    beamformed: Option<usize>,
    history: &'a [SlotUse],
    slot: u64,
}

impl RoundSetup<'_> {
    fn new<'a>(
        a: &Composition,
        k: usize,
        history: &'a [SlotUse],
        beamforming: bool,
    ) -> Result<RoundSetup<'a>, AnalysisError> {
        let first = history.first().ok_or(SchemeError::EmptyHistory)?;
        let (field, n) = (first.field(), first.n());
        if a.n() != n {
            return Err(SchemeError::UserMismatch {
                expected: n,
                found: a.n(),
            }
            .into());
        }
        if k == 0 || k > a.len() {
            return Err(AnalysisError::Domain(format!("round {k} not in 1..={}", a.len())));
        }
        if history.len() != k {
            return Err(AnalysisError::Domain(format!(
                "round {k} needs a history of {k} slots, got {}",
                history.len()
            )));
        }
        if beamforming && field.q() == 2 {
            return Err(SchemeError::FieldTooSmall(2).into());
        }
        let receivers: Vec<usize> = a.round_receivers(k).collect();
        let beamformed = beamforming.then_some(receivers[0]);
        Ok(RoundSetup {
            field,
            n,
            receivers,
            beamformed,
            history,
            slot: history.last().unwrap().slot() + 1,
        })
    }

    fn slot_use(&self, candidate: ChannelMatrix) -> SlotUse {
        match self.beamformed {
            Some(l) => beamform(&self.history[0], candidate, l),
            None => SlotUse::plain(candidate),
        }
    }

    fn passes(&self, candidate: ChannelMatrix, receivers: &[usize]) -> bool {
        let mut h = self.history.to_vec();
        h.push(self.slot_use(candidate));
        receivers
            .iter()
            .all(|&j| recovery_check(&h, j).expect("history is consistent").is_some())
    }
}

/// Exact probability that a uniformly drawn next matrix lets every receiver
/// of round `k` of `a` recover, given the matched slots `history`
/// (`t_0, .., t_{k-1}`). With `beamforming`, the round's first receiver is
/// served by JAP-B beamforming against `t_0`.
///
/// Enumerates all `(q-1)^{n^2}` candidate matrices.
pub fn exact_round_probability(
    a: &Composition,
    k: usize,
    history: &[SlotUse],
    beamforming: bool,
) -> Result<Rational, AnalysisError> {
    let setup = RoundSetup::new(a, k, history, beamforming)?;
    let (field, n, q) = (setup.field, setup.n, setup.field.q());
    let total = guard((q - 1) as u128, n * n)?;
    let hits = (0..total as u64)
        .into_par_iter()
        .filter(|&idx| {
            let mut raw = vec![0u32; n * n];
            nonzero_digits(idx, q, &mut raw);
            setup.passes(matrix_from_raw(field, n, &raw, setup.slot), &setup.receivers)
        })
        .count();
    Ok(ratio(hits as u128, total))
}

/// Same probability as [`exact_round_probability`], computed as a product of
/// per-receiver probabilities. Receiver `j` only sees row `j` of the next
/// matrix, and rows are independent; under beamforming the gains are set by
/// row `l`, which only rescales other rows bijectively, so any fixed row `l`
/// gives the same per-receiver count. Enumerates `(q-1)^n` rows per receiver.
pub fn exact_round_probability_by_rows(
    a: &Composition,
    k: usize,
    history: &[SlotUse],
    beamforming: bool,
) -> Result<Rational, AnalysisError> {
    let setup = RoundSetup::new(a, k, history, beamforming)?;
    let (field, n, q) = (setup.field, setup.n, setup.field.q());
    let per_row = guard((q - 1) as u128, n)?;
    let mut prob = Rational::one();
    for &j in &setup.receivers {
        let hits = (0..per_row as u64)
            .into_par_iter()
            .filter(|&idx| {
                let mut raw = vec![1u32; n * n];
                nonzero_digits(idx, q, &mut raw[j * n..(j + 1) * n]);
                setup.passes(matrix_from_raw(field, n, &raw, setup.slot), &[j])
            })
            .count();
        prob *= ratio(hits as u128, per_row);
    }
    Ok(prob)
}

/// `P(V_1 + .. + V_L = 0)` for IID `V_m` uniform on the nonzero elements:
/// `1/q + (-1)^L / (q (q-1)^{L-1})`.
pub fn lemma3_failure(field: PrimeField, l: usize) -> Rational {
    let q = BigInt::from(field.q());
    let qm1 = BigInt::from(field.q() - 1);
    let base = Rational::new(BigInt::one(), q.clone());
    let tail = if l == 0 {
        // (q-1)^{-1} / q * (q-1)
        Rational::new(qm1, q)
    } else {
        Rational::new(BigInt::one(), q * num::pow(qm1, l - 1))
    };
    if l % 2 == 0 {
        base + tail
    } else {
        base - tail
    }
}

/// The unsigned simplification `1/q + 1/(q (q-1)^{L-1})`, which agrees with
/// [`lemma3_failure`] only for even `L`.
pub fn lemma3_failure_printed(field: PrimeField, l: usize) -> Result<Rational, AnalysisError> {
    if l == 0 {
        return Err(AnalysisError::Domain("L must be at least 1".into()));
    }
    let q = BigInt::from(field.q());
    let qm1 = BigInt::from(field.q() - 1);
    Ok(Rational::new(BigInt::one(), q.clone()) + Rational::new(BigInt::one(), q * num::pow(qm1, l - 1)))
}

/// [`lemma3_failure`] by repeated convolution of the sum's distribution.
pub fn lemma3_failure_by_convolution(field: PrimeField, l: usize) -> Rational {
    let q = field.q() as usize;
    // counts[s] = number of sequences with sum s
    let mut counts = vec![BigInt::zero(); q];
    counts[0] = BigInt::one();
    for _ in 0..l {
        let mut next = vec![BigInt::zero(); q];
        for (s, c) in counts.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for v in 1..q {
                next[(s + v) % q] += c;
            }
        }
        counts = next;
    }
    Rational::new(counts[0].clone(), num::pow(BigInt::from(q - 1), l))
}

/// Proportion of vectors in the span of `basis` with no zero entry.
/// The basis must be linearly independent; enumerates `q^k` combinations.
pub fn span_fullness(basis: &[FieldVector]) -> Result<Rational, AnalysisError> {
    let first = basis
        .first()
        .ok_or_else(|| AnalysisError::Domain("empty basis".into()))?;
    let (field, len) = (first.field(), first.len());
    if rank(basis)? != basis.len() {
        return Err(AnalysisError::Domain("basis vectors are linearly dependent".into()));
    }
    let q = field.q();
    let k = basis.len();
    let total = guard(q as u128, k)?;
    let rows: Vec<Vec<u32>> = basis.iter().map(|v| v.values()).collect();
    let hits = (0..total as u64)
        .into_par_iter()
        .filter(|&idx| {
            let mut coeffs = idx;
            let mut acc = vec![0u32; len];
            for row in &rows {
                let c = (coeffs % q as u64) as u32;
                coeffs /= q as u64;
                if c == 0 {
                    continue;
                }
                for (a, &r) in acc.iter_mut().zip(row) {
                    *a = field.add_raw(*a, field.mul_raw(c, r));
                }
            }
            acc.iter().all(|&v| v != 0)
        })
        .count();
    Ok(ratio(hits as u128, total))
}

/// First-order expansion `1 - h/q` of [`span_fullness`], where `h` is the
/// number of distinct hyperplanes `{x_i = 0}` cut out of the span by the
/// coordinates (0 if some coordinate vanishes on the whole span).
pub fn span_first_order(basis: &[FieldVector]) -> Result<Rational, AnalysisError> {
    let first = basis
        .first()
        .ok_or_else(|| AnalysisError::Domain("empty basis".into()))?;
    let (field, len) = (first.field(), first.len());
    let rows: Vec<Vec<u32>> = basis.iter().map(|v| v.values()).collect();
    let mut planes: Vec<Vec<u32>> = Vec::new();
    for i in 0..len {
        let col: Vec<u32> = rows.iter().map(|r| r[i]).collect();
        let Some(&lead) = col.iter().find(|&&v| v != 0) else {
            return Ok(Rational::zero());
        };
        let inv = field.inv_raw(lead);
        let normalized: Vec<u32> = col.iter().map(|&v| field.mul_raw(v, inv)).collect();
        if !planes.contains(&normalized) {
            planes.push(normalized);
        }
    }
    Ok(Rational::one() - ratio(planes.len() as u128, field.q() as u128))
}
