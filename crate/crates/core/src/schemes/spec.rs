use std::fmt;

use num::rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::SlotSource;
use crate::gfq::PrimeField;

use super::messages::{decode, random_messages, MessageBank};
use super::run::{
    child_run, jap_run_with, japb_run_with, ngjv_run_with, tdma_run, ChildRun, ParentScheme, RunOptions, SchemeRun,
};
use super::{Composition, SchemeError};

/// Any runnable scheme, including time-shared children.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchemeSpec {
    Ngjv,
    Tdma,
    Jap(Composition),
    JapB(Composition),
    Child { parent: ParentScheme, m: usize },
}

fn parent_dof(parent: &ParentScheme, m: usize) -> Ratio<u64> {
    match parent {
        ParentScheme::Ngjv => Ratio::new(1, 2),
        ParentScheme::Tdma => Ratio::new(1, m as u64),
        ParentScheme::Jap(a) | ParentScheme::JapB(a) => Ratio::new(1, a.len() as u64 + 1),
    }
}

impl SchemeSpec {
    /// Checks that the scheme is defined for an `n`-user network.
    pub fn validate(&self, n: usize) -> Result<(), SchemeError> {
        if n == 0 {
            return Err(SchemeError::UserMismatch { expected: 1, found: 0 });
        }
        match self {
            SchemeSpec::Jap(a) | SchemeSpec::JapB(a) if a.n() != n => Err(SchemeError::UserMismatch {
                expected: n,
                found: a.n(),
            }),
            SchemeSpec::Child { parent, m } => {
                if *m == 0 || *m > n {
                    return Err(SchemeError::ChildSize { m: *m, n });
                }
                match parent {
                    ParentScheme::Jap(a) | ParentScheme::JapB(a) if a.n() != *m => Err(SchemeError::UserMismatch {
                        expected: *m,
                        found: a.n(),
                    }),
                    _ => Ok(()),
                }
            }
            _ => Ok(()),
        }
    }

    /// Degrees of freedom on an `n`-user network.
    pub fn dof(&self, n: usize) -> Ratio<u64> {
        match self {
            SchemeSpec::Ngjv => Ratio::new(1, 2),
            SchemeSpec::Tdma => Ratio::new(1, n as u64),
            SchemeSpec::Jap(a) | SchemeSpec::JapB(a) => Ratio::new(1, a.len() as u64 + 1),
            SchemeSpec::Child { parent, m } => parent_dof(parent, *m) * Ratio::new(*m as u64, n as u64),
        }
    }

    /// Number of rounds reported per run.
    pub fn rounds(&self, n: usize) -> usize {
        match self {
            SchemeSpec::Ngjv => 1,
            SchemeSpec::Tdma => n,
            SchemeSpec::Jap(a) | SchemeSpec::JapB(a) => a.len(),
            SchemeSpec::Child { parent, m } => match parent {
                ParentScheme::Ngjv => 1,
                ParentScheme::Tdma => *m,
                ParentScheme::Jap(a) | ParentScheme::JapB(a) => a.len(),
            },
        }
    }

    /// Whether the scheme relies on alignment (and hence needs `q >= 3`).
    pub fn needs_alignment(&self) -> bool {
        !matches!(
            self,
            SchemeSpec::Tdma
                | SchemeSpec::Child {
                    parent: ParentScheme::Tdma,
                    ..
                }
        )
    }

    pub fn run(&self, stream: &mut dyn SlotSource, opts: &RunOptions) -> Result<Execution, SchemeError> {
        self.validate(stream.users())?;
        Ok(match self {
            SchemeSpec::Ngjv => Execution::Single(ngjv_run_with(stream, opts)?),
            SchemeSpec::Tdma => Execution::Single(tdma_run(stream)?),
            SchemeSpec::Jap(a) => Execution::Single(jap_run_with(a, stream, opts)?),
            SchemeSpec::JapB(a) => Execution::Single(japb_run_with(a, stream, opts)?),
            SchemeSpec::Child { parent, m } => Execution::Child(child_run(parent, *m, stream, opts)?),
        })
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeSpec::Ngjv => write!(f, "ngjv"),
            SchemeSpec::Tdma => write!(f, "tdma"),
            SchemeSpec::Jap(a) => write!(f, "jap{a}"),
            SchemeSpec::JapB(a) => write!(f, "japb{a}"),
            SchemeSpec::Child { parent, m } => write!(f, "child(m={m},{})", parent.id()),
        }
    }
}

/// Outcome of [`SchemeSpec::run`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Execution {
    Single(SchemeRun),
    Child(ChildRun),
}

impl Execution {
    /// Delay in slots; for children, the mean per-message delay.
    pub fn delay(&self) -> f64 {
        match self {
            Execution::Single(r) => r.delay() as f64,
            Execution::Child(c) => c.delay(),
        }
    }

    /// Per-round waits; for children, averaged across sub-networks.
    pub fn round_waits(&self) -> Vec<f64> {
        match self {
            Execution::Single(r) => r.round_waits().into_iter().map(|w| w as f64).collect(),
            Execution::Child(c) => {
                let count = c.subruns.len() as f64;
                let mut acc = vec![0.0; c.subruns[0].run.rounds.len()];
                for s in &c.subruns {
                    for (a, w) in acc.iter_mut().zip(s.run.round_waits()) {
                        *a += w as f64;
                    }
                }
                acc.into_iter().map(|a| a / count).collect()
            }
        }
    }

    pub fn resamples(&self) -> u64 {
        match self {
            Execution::Single(r) => r.resamples,
            Execution::Child(c) => c.subruns.iter().map(|s| s.run.resamples).sum(),
        }
    }

    fn runs(&self) -> Vec<&SchemeRun> {
        match self {
            Execution::Single(r) => vec![r],
            Execution::Child(c) => c.subruns.iter().map(|s| &s.run).collect(),
        }
    }

    /// Transmits random messages over every (sub-)run and checks that each
    /// receiver decodes its own message exactly.
    pub fn decodes_exactly<R: Rng + ?Sized>(&self, field: PrimeField, len: usize, rng: &mut R) -> Result<bool, SchemeError> {
        for run in self.runs() {
            let msgs = random_messages(run.n, field, len, rng);
            let bank = MessageBank::transmit(run, msgs.clone())?;
            if !bank.verify() || decode(run, &bank)? != msgs {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Negative control: corrupts one symbol of a pseudomessage that receiver
    /// 0 of the first (sub-)run combines with a nonzero coefficient, and
    /// reports whether decoding then differs from the sent messages.
    pub fn corruption_detected<R: Rng + ?Sized>(&self, field: PrimeField, len: usize, rng: &mut R) -> Result<bool, SchemeError> {
        let run = self.runs()[0];
        let msgs = random_messages(run.n, field, len, rng);
        let mut bank = MessageBank::transmit(run, msgs.clone())?;
        let (round, pos) = run.serving_round(0).ok_or(SchemeError::Incomplete { receiver: 0 })?;
        let slot_index = round.lambdas[pos]
            .iter()
            .position(|l| !l.is_zero())
            .expect("recovery coefficients are never all zero");
        bank.corrupt(slot_index, 0, 0);
        Ok(decode(run, &bank)? != msgs)
    }
}
