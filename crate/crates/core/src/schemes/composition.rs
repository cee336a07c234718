use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SchemeError;

/// A composition `a = [a_1, .., a_K]` of `n` into `K` positive parts.
///
/// Round `k` (1-based) of a JAP-style scheme serves receivers
/// `A_{k-1}, .., A_k - 1` (0-based), where `A_k` are the partial sums.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Composition {
    parts: Vec<usize>,
}

impl Composition {
    pub fn new(parts: Vec<usize>) -> Result<Self, SchemeError> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(SchemeError::InvalidComposition(parts));
        }
        Ok(Self { parts })
    }

    /// `[n]`.
    pub fn single(n: usize) -> Self {
        assert!(n >= 1);
        Self { parts: vec![n] }
    }

    /// `[1, 1, .., 1]` of length `n`.
    pub fn ones(n: usize) -> Self {
        assert!(n >= 1);
        Self { parts: vec![1; n] }
    }

    /// Weight `n = sum a_k`.
    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Length `K`.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// `a_k` for 1-based `k`.
    pub fn part(&self, k: usize) -> usize {
        self.parts[k - 1]
    }

    /// `[A_0 = 0, A_1, .., A_K = n]`.
    pub fn partial_sums(&self) -> Vec<usize> {
        std::iter::once(0)
            .chain(self.parts.iter().scan(0, |acc, &a| {
                *acc += a;
                Some(*acc)
            }))
            .collect()
    }

    /// 0-based receivers served in round `k` (1-based).
    pub fn round_receivers(&self, k: usize) -> Range<usize> {
        let start: usize = self.parts[..k - 1].iter().sum();
        start..start + self.parts[k - 1]
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.parts.windows(2).all(|w| w[0] <= w[1])
    }

    /// Every member of `A(n, K)` in lexicographic order.
    pub fn all(n: usize, k: usize) -> Compositions {
        Compositions::new(n, k)
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, a) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "]")
    }
}

impl FromStr for Composition {
    type Err = SchemeError;

    /// Accepts `1,2,3` or `[1,2,3]`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let body = s.trim().trim_start_matches('[').trim_end_matches(']');
        let parts = body
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| SchemeError::Parse(s.to_string()))?;
        Self::new(parts)
    }
}

impl TryFrom<Vec<usize>> for Composition {
    type Error = SchemeError;
    fn try_from(parts: Vec<usize>) -> Result<Self, Self::Error> {
        Self::new(parts)
    }
}

impl From<Composition> for Vec<usize> {
    fn from(c: Composition) -> Self {
        c.parts
    }
}

/// Lexicographic iterator over `A(n, K)`.
#[derive(Debug, Clone)]
pub struct Compositions {
    current: Option<Vec<usize>>,
}

impl Compositions {
    fn new(n: usize, k: usize) -> Self {
        let current = if k == 0 || k > n {
            None
        } else {
            let mut first = vec![1; k];
            first[k - 1] = n - k + 1;
            Some(first)
        };
        Self { current }
    }
}

impl Iterator for Compositions {
    type Item = Composition;

    fn next(&mut self) -> Option<Composition> {
        let out = self.current.take()?;
        let k = out.len();
        // rightmost position whose suffix has a unit to spare
        let mut next = out.clone();
        let mut suffix = 0;
        for i in (0..k.saturating_sub(1)).rev() {
            suffix += next[i + 1];
            if suffix > k - 1 - i {
                next[i] += 1;
                let rest = suffix - 1;
                for slot in next.iter_mut().take(k - 1).skip(i + 1) {
                    *slot = 1;
                }
                next[k - 1] = rest - (k - 2 - i);
                self.current = Some(next);
                break;
            }
        }
        Some(Composition { parts: out })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binomial(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn partial_sums_and_rounds() {
        let a: Composition = "1,2,3".parse().unwrap();
        assert_eq!(a.n(), 6);
        assert_eq!(a.len(), 3);
        assert_eq!(a.partial_sums(), vec![0, 1, 3, 6]);
        assert_eq!(a.round_receivers(1), 0..1);
        assert_eq!(a.round_receivers(3), 3..6);
        assert_eq!(a.to_string(), "[1,2,3]");
        assert_eq!("[4]".parse::<Composition>().unwrap(), Composition::single(4));
    }

    #[test]
    fn invalid_compositions() {
        assert!(Composition::new(vec![]).is_err());
        assert!(Composition::new(vec![2, 0, 1]).is_err());
        assert!("1,x".parse::<Composition>().is_err());
    }

    #[test]
    fn enumeration_counts_and_order() {
        for n in 1..=9 {
            for k in 1..=n {
                let all: Vec<_> = Composition::all(n, k).collect();
                assert_eq!(all.len(), binomial(n - 1, k - 1), "n={n} k={k}");
                assert!(all.iter().all(|a| a.n() == n && a.len() == k));
                assert!(all.windows(2).all(|w| w[0] < w[1]));
            }
        }
        assert_eq!(Composition::all(3, 4).count(), 0);
        let small: Vec<String> = Composition::all(4, 2).map(|a| a.to_string()).collect();
        assert_eq!(small, vec!["[1,3]", "[2,2]", "[3,1]"]);
    }
}
