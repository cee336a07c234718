//! The per-receiver recovery predicate.
//!
//! Receiver `j` can recover its message from slots `t_0, .., t_k` when some
//! coefficients `lambda` cancel its interference vectors while keeping the
//! combination of its direct coefficients nonzero.

use crate::channel::ChannelMatrix;
use crate::gfq::{null_space_raw, FieldElement, FieldVector, PrimeField};

use super::SchemeError;

/// One matched slot: the fading matrix plus the per-transmitter gain applied
/// to that slot's transmission (1 when repeating, 0 when silent, a beamforming
/// weight otherwise). Receiver `j` observes `sum_i h_ji g_i w_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotUse {
    pub matrix: ChannelMatrix,
    pub gains: Vec<FieldElement>,
}

impl SlotUse {
    /// Every transmitter repeats its message unscaled.
    pub fn plain(matrix: ChannelMatrix) -> Self {
        let gains = vec![matrix.field().one(); matrix.n()];
        Self { matrix, gains }
    }

    pub fn with_gains(matrix: ChannelMatrix, gains: Vec<FieldElement>) -> Self {
        assert_eq!(gains.len(), matrix.n());
        Self { matrix, gains }
    }

    /// Only `active` transmits.
    pub fn exclusive(matrix: ChannelMatrix, active: usize) -> Self {
        let f = matrix.field();
        let gains = (0..matrix.n())
            .map(|i| if i == active { f.one() } else { f.zero() })
            .collect();
        Self { matrix, gains }
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    pub fn field(&self) -> PrimeField {
        self.matrix.field()
    }

    pub fn slot(&self) -> u64 {
        self.matrix.slot()
    }

    /// Effective coefficient `h_ji g_i`.
    #[inline]
    pub fn effective(&self, j: usize, i: usize) -> FieldElement {
        self.matrix.entry(j, i) * self.gains[i]
    }

    fn effective_interference_raw(&self, j: usize) -> Vec<u32> {
        (0..self.n())
            .filter(|&i| i != j)
            .map(|i| self.effective(j, i).value())
            .collect()
    }
}

fn check_history(history: &[SlotUse]) -> Result<(PrimeField, usize), SchemeError> {
    let first = history.first().ok_or(SchemeError::EmptyHistory)?;
    let (field, n) = (first.field(), first.n());
    for s in history {
        if s.n() != n {
            return Err(SchemeError::UserMismatch {
                expected: n,
                found: s.n(),
            });
        }
        if s.field() != field {
            return Err(crate::gfq::GfError::FieldMismatch {
                left: field.q(),
                right: s.field().q(),
            }
            .into());
        }
    }
    Ok((field, n))
}

/// Coefficients `(lambda_0, .., lambda_k)` over `history` with
/// `sum_m lambda_m h_int_j[t_m] = 0` and `sum_m lambda_m h_jj[t_m] = 1`.
///
/// The whole null space of the interference vectors is searched: a
/// qualifying combination exists iff some null-space basis vector has a
/// nonzero diagonal combination. Returns `None` when there is none.
pub fn recovery_check(history: &[SlotUse], receiver: usize) -> Result<Option<FieldVector>, SchemeError> {
    let (field, n) = check_history(history)?;
    if receiver >= n {
        return Err(SchemeError::ReceiverOutOfRange { receiver, n });
    }
    let interference: Vec<Vec<u32>> = history
        .iter()
        .map(|s| s.effective_interference_raw(receiver))
        .collect();
    let diag: Vec<u32> = history
        .iter()
        .map(|s| s.effective(receiver, receiver).value())
        .collect();
    for basis in null_space_raw(field, &interference) {
        let combo = basis
            .iter()
            .zip(&diag)
            .fold(0, |acc, (&l, &d)| field.add_raw(acc, field.mul_raw(l, d)));
        if combo != 0 {
            let inv = field.inv_raw(combo);
            let lambdas = basis
                .into_iter()
                .map(|l| field.element(field.mul_raw(l, inv) as u64))
                .collect();
            return Ok(Some(FieldVector::new(field, lambdas)?));
        }
    }
    Ok(None)
}

/// [`recovery_check`] over plain (unscaled) matrices.
pub fn recovery_check_matrices(history: &[ChannelMatrix], receiver: usize) -> Result<Option<FieldVector>, SchemeError> {
    let uses: Vec<SlotUse> = history.iter().cloned().map(SlotUse::plain).collect();
    recovery_check(&uses, receiver)
}

/// Whether `lambdas` satisfy both recovery conditions for `receiver`, with
/// the diagonal combination equal to exactly 1.
pub fn satisfies_recovery(history: &[SlotUse], receiver: usize, lambdas: &FieldVector) -> bool {
    if lambdas.len() > history.len() {
        return false;
    }
    let field = lambdas.field();
    let n = history[0].n();
    let mut interference = vec![field.zero(); n];
    for (s, l) in history.iter().zip(lambdas.iter()) {
        for (i, acc) in interference.iter_mut().enumerate() {
            *acc = *acc + l * s.effective(receiver, i);
        }
    }
    interference
        .iter()
        .enumerate()
        .all(|(i, v)| if i == receiver { v.value() == 1 } else { v.is_zero() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::draw_matrix;
    use crate::channel::split_rng;

    fn gf(q: u64) -> PrimeField {
        PrimeField::new(q).unwrap()
    }

    #[test]
    fn single_slot_never_suffices_for_two_or_more_users() {
        let mut rng = split_rng(1, 0);
        for n in 2..5 {
            let h = draw_matrix(n, gf(5), &mut rng, 0);
            for j in 0..n {
                assert!(recovery_check_matrices(&[h.clone()], j).unwrap().is_none());
            }
        }
    }

    #[test]
    fn single_user_decodes_from_one_slot() {
        let h = ChannelMatrix::from_rows(gf(5), &[&[3]], 0).unwrap();
        let l = recovery_check_matrices(&[h], 0).unwrap().unwrap();
        assert_eq!(l.values(), vec![2]);
    }

    #[test]
    fn ngjv_complement_uses_unit_coefficients() {
        let f = gf(7);
        let mut rng = split_rng(3, 0);
        let mut tested = 0;
        while tested < 20 {
            let h = draw_matrix(3, f, &mut rng, 0);
            let Ok(c) = h.identity_complement() else { continue };
            let hist = [SlotUse::plain(h), SlotUse::plain(c)];
            for j in 0..3 {
                let l = recovery_check(&hist, j).unwrap().unwrap();
                assert_eq!(l.values(), vec![1, 1]);
            }
            tested += 1;
        }
    }

    /// Two users, two slots: succeeds iff the direct/cross ratios differ.
    #[test]
    fn two_user_closed_form_exhaustive_gf3() {
        let f = gf(3);
        let vals = [1u64, 2];
        for &a in &vals {
            for &b in &vals {
                for &c in &vals {
                    for &d in &vals {
                        // receiver 0: direct a (t0), c (t1); cross b (t0), d (t1)
                        let h0 = ChannelMatrix::from_rows(f, &[&[a, b], &[1, 1]], 0).unwrap();
                        let h1 = ChannelMatrix::from_rows(f, &[&[c, d], &[1, 1]], 1).unwrap();
                        let got = recovery_check_matrices(&[h0, h1], 0).unwrap().is_some();
                        let ratio = |x: u64, y: u64| f.element(x) * f.element(y).inverse().unwrap();
                        assert_eq!(got, ratio(c, d) != ratio(a, b), "a={a} b={b} c={c} d={d}");
                    }
                }
            }
        }
    }

    #[test]
    fn mismatched_history_is_an_error() {
        let a = ChannelMatrix::from_rows(gf(5), &[&[1, 2], &[3, 4]], 0).unwrap();
        let b = ChannelMatrix::from_rows(gf(5), &[&[1]], 1).unwrap();
        assert!(matches!(
            recovery_check_matrices(&[a.clone(), b], 0),
            Err(SchemeError::UserMismatch { .. })
        ));
        assert!(matches!(recovery_check(&[], 0), Err(SchemeError::EmptyHistory)));
        assert!(matches!(
            recovery_check_matrices(&[a], 2),
            Err(SchemeError::ReceiverOutOfRange { .. })
        ));
    }

    #[test]
    fn search_covers_the_whole_null_space() {
        // receiver 0 of a 2-user network over GF(5), three slots. Interference
        // (1, 1, 1): null space spanned by (1,4,0) and (1,0,4). Direct
        // coefficients (2, 2, 3) make the first basis vector useless but the
        // second usable.
        let f = gf(5);
        let h: Vec<_> = [[2u64, 1], [2, 1], [3, 1]]
            .iter()
            .enumerate()
            .map(|(t, r)| SlotUse::plain(ChannelMatrix::from_rows(f, &[&r[..], &[1, 1]], t as u64).unwrap()))
            .collect();
        let l = recovery_check(&h, 0).unwrap().unwrap();
        assert!(satisfies_recovery(&h, 0, &l));
        assert!(!l.get(2).is_zero());
    }
}
