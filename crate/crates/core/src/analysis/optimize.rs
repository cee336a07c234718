//! `T(n, K) = min over a in A(n, K) of max_k (a_k - 1)(n - k - 1)`.
//!
//! An exponent `T` is achievable iff the per-round caps
//! `a_k <= floor(T / (n - k - 1)) + 1` leave room for a total of `n`, so the
//! optimum is the smallest such `T` (found by bisection) and the argmins are
//! exactly the compositions that respect the caps at that `T`.

use serde::Serialize;

use crate::schemes::Composition;

use super::{AnalysisError, Budget};

/// Default number of argmins listed explicitly.
pub const DEFAULT_ARGMIN_LIMIT: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Optimum {
    pub n: usize,
    pub k: usize,
    /// Best JAP-B exponent `T(n, K)`.
    pub t: u64,
    /// Argmins in lexicographic order, truncated to the listing limit.
    pub argmins: Vec<Composition>,
    /// Total number of argmins.
    pub argmin_count: u128,
    pub unique: bool,
}

impl Optimum {
    /// Lexicographically smallest argmin.
    pub fn representative(&self) -> &Composition {
        &self.argmins[0]
    }
}

/// Largest admissible `a_k` for exponent `t`.
fn caps(n: usize, k_total: usize, t: u64) -> Vec<usize> {
    let most = n - k_total + 1;
    (1..=k_total)
        .map(|k| {
            let w = n as i64 - k as i64 - 1;
            if w <= 0 {
                most
            } else {
                ((t / w as u64) as usize).saturating_add(1).min(most)
            }
        })
        .collect()
}

fn feasible(n: usize, caps: &[usize]) -> bool {
    caps.iter().sum::<usize>() >= n
}

/// Number of compositions of `n` with `1 <= a_k <= caps[k]`.
fn count_bounded(n: usize, caps: &[usize]) -> u128 {
    // ways[s] = compositions of the processed prefix summing to s
    let mut ways = vec![0u128; n + 1];
    ways[0] = 1;
    for &cap in caps {
        let mut next = vec![0u128; n + 1];
        for (s, &w) in ways.iter().enumerate() {
            if w == 0 {
                continue;
            }
            for a in 1..=cap.min(n - s) {
                next[s + a] = next[s + a].saturating_add(w);
            }
        }
        ways = next;
    }
    ways[n]
}

fn list_bounded(n: usize, caps: &[usize], limit: usize) -> Vec<Composition> {
    fn go(rest: usize, caps: &[usize], prefix: &mut Vec<usize>, out: &mut Vec<Composition>, limit: usize) {
        if out.len() >= limit {
            return;
        }
        let Some((&cap, tail)) = caps.split_first() else {
            if rest == 0 {
                out.push(Composition::new(prefix.clone()).unwrap());
            }
            return;
        };
        // remaining rounds each need at least 1 and at most their cap
        let tail_min = tail.len();
        let tail_max: usize = tail.iter().sum();
        for a in 1..=cap {
            if a + tail_min > rest {
                break;
            }
            if a + tail_max < rest {
                continue;
            }
            prefix.push(a);
            go(rest - a, tail, prefix, out, limit);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(n, caps, &mut Vec::with_capacity(caps.len()), &mut out, limit);
    out
}

/// Best JAP-B exponent over `A(n, K)` with all argmins counted.
pub fn optimize(n: usize, k: usize) -> Result<Optimum, AnalysisError> {
    optimize_with(n, k, DEFAULT_ARGMIN_LIMIT, &Budget::unlimited())
}

pub fn optimize_with(n: usize, k: usize, argmin_limit: usize, budget: &Budget) -> Result<Optimum, AnalysisError> {
    if k == 0 || k > n {
        return Err(AnalysisError::Domain(format!("optimize needs 1 <= K <= n, got n = {n}, K = {k}")));
    }
    budget.check()?;
    // [n-K+1, 1, .., 1] achieves (n-K)(n-2)
    let mut hi = ((n - k) * n.saturating_sub(2)) as u64;
    let mut lo = 0u64;
    debug_assert!(feasible(n, &caps(n, k, hi)));
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if feasible(n, &caps(n, k, mid)) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    budget.check()?;
    let t = lo;
    let c = caps(n, k, t);
    let argmin_count = count_bounded(n, &c);
    let argmins = list_bounded(n, &c, argmin_limit.max(1));
    debug_assert!(argmins
        .iter()
        .all(|a| super::japb_exponent(a).overall == t));
    Ok(Optimum {
        n,
        k,
        t,
        argmins,
        argmin_count,
        unique: argmin_count == 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_table_cells() {
        let o = optimize(5, 2).unwrap();
        assert_eq!((o.t, o.representative().to_string(), o.unique), (4, "[2,3]".into(), true));
        let o = optimize(6, 3).unwrap();
        assert_eq!(o.t, 4);
        assert!(!o.unique);
        assert!(o.argmins.contains(&"1,2,3".parse().unwrap()));
        assert_eq!(o.argmin_count, 3);
    }

    #[test]
    fn single_round_is_forced() {
        for n in 1..30 {
            let o = optimize(n, 1).unwrap();
            assert!(o.unique);
            assert_eq!(o.representative(), &Composition::single(n));
        }
    }

    #[test]
    fn tdma_like_rounds_are_free() {
        for n in 2..12 {
            assert_eq!(optimize(n, n - 1).unwrap().t, 0);
            assert_eq!(optimize(n, n).unwrap().t, 0);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(optimize(4, 0).is_err());
        assert!(optimize(4, 5).is_err());
    }

    #[test]
    fn count_matches_listing_when_small() {
        for n in 3..12 {
            for k in 1..=n {
                let o = optimize_with(n, k, usize::MAX, &Budget::unlimited()).unwrap();
                assert_eq!(o.argmins.len() as u128, o.argmin_count);
            }
        }
    }

    #[test]
    fn listing_respects_limit() {
        let o = optimize_with(8, 4, 2, &Budget::unlimited()).unwrap();
        assert_eq!(o.argmins.len(), 2);
        assert_eq!(o.argmin_count, 4);
    }

    #[test]
    fn large_instances_are_fast() {
        let o = optimize(500, 3).unwrap();
        assert!(o.t > 0);
    }
}
