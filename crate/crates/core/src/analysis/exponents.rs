use serde::Serialize;

use crate::schemes::{Composition, ParentScheme, SchemeSpec};

/// Per-round delay exponents and their maximum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundExponents {
    pub per_round: Vec<u64>,
    pub overall: u64,
}

// Rounds with k >= n - 1 already have at least n vectors of length n - 1 in
// the history, so they match with probability bounded away from zero; the
// weight n - k - 1 is clamped at 0 there.
fn round_weight(n: usize, k: usize) -> u64 {
    (n as i64 - k as i64 - 1).max(0) as u64
}

fn collect(per_round: Vec<u64>) -> RoundExponents {
    let overall = per_round.iter().copied().max().unwrap_or(0);
    RoundExponents { per_round, overall }
}

/// JAP: `T_k = a_k (n - k - 1)`, `T = max_k T_k`.
pub fn jap_exponent(a: &Composition) -> RoundExponents {
    let n = a.n();
    collect(
        (1..=a.len())
            .map(|k| a.part(k) as u64 * round_weight(n, k))
            .collect(),
    )
}

/// JAP-B: `(a_k - 1)(n - k - 1)`; one receiver per round is beamformed.
pub fn japb_exponent(a: &Composition) -> RoundExponents {
    let n = a.n();
    collect(
        (1..=a.len())
            .map(|k| (a.part(k) as u64 - 1) * round_weight(n, k))
            .collect(),
    )
}

/// Closed-form delay exponent of any scheme on `n` users.
pub fn predicted_exponent(spec: &SchemeSpec, n: usize) -> u64 {
    match spec {
        SchemeSpec::Ngjv => (n * n) as u64,
        SchemeSpec::Tdma => 0,
        SchemeSpec::Jap(a) => jap_exponent(a).overall,
        SchemeSpec::JapB(a) => japb_exponent(a).overall,
        SchemeSpec::Child { parent, m } => match parent {
            ParentScheme::Ngjv => (m * m) as u64,
            ParentScheme::Tdma => 0,
            ParentScheme::Jap(a) => jap_exponent(a).overall,
            ParentScheme::JapB(a) => japb_exponent(a).overall,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn comp(s: &str) -> Composition {
        s.parse().unwrap()
    }

    #[test]
    fn jap_examples() {
        assert_eq!(jap_exponent(&comp("4")).overall, 8);
        for n in 3..10 {
            assert_eq!(jap_exponent(&Composition::ones(n)).overall, n as u64 - 2);
            assert_eq!(jap_exponent(&Composition::single(n)).overall, (n * (n - 2)) as u64);
        }
        assert_eq!(jap_exponent(&comp("1,2")).per_round, vec![1, 0]);
    }

    #[test]
    fn japb_examples() {
        assert_eq!(japb_exponent(&comp("7")).overall, 30);
        assert_eq!(japb_exponent(&comp("3,3")).overall, 8);
        assert_eq!(japb_exponent(&comp("3,3")).per_round, vec![8, 6]);
        for n in 2..10 {
            let mut parts = vec![1; n - 1];
            *parts.last_mut().unwrap() = 2;
            assert_eq!(japb_exponent(&Composition::new(parts).unwrap()).overall, 0);
            assert_eq!(japb_exponent(&Composition::ones(n)).overall, 0);
        }
    }

    #[test]
    fn scheme_exponents() {
        assert_eq!(predicted_exponent(&SchemeSpec::Ngjv, 4), 16);
        assert_eq!(predicted_exponent(&SchemeSpec::Tdma, 4), 0);
        let child = SchemeSpec::Child {
            parent: ParentScheme::JapB(Composition::single(3)),
            m: 3,
        };
        assert_eq!(predicted_exponent(&child, 6), 2);
        let child = SchemeSpec::Child {
            parent: ParentScheme::Ngjv,
            m: 2,
        };
        assert_eq!(predicted_exponent(&child, 4), 4);
    }
}
