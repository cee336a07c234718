//! Ergodic finite-field channel model.
//!
//! Each slot carries an `n x n` fading matrix with entries drawn IID and
//! uniformly from `GF(q) \ {0}`. Entry `(j, i)` is the coefficient from
//! transmitter `i` to receiver `j`. Noise only enters through the rate
//! quantities; decoding works on exact pseudomessages.
//!
//! Random streams: every consumer gets a ChaCha8 generator seeded with the
//! master seed and switched to its own stream id (`set_stream`). Monte Carlo
//! trial `i` uses stream id `i`, so results do not depend on thread count.

use std::collections::VecDeque;

use num::rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::gfq::{FieldElement, GfError, PrimeField};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("channel coefficient ({row}, {col}) is zero")]
    ZeroEntry { row: usize, col: usize },
    #[error("expected {expected} entries for an {n}x{n} matrix, found {found}")]
    Shape { n: usize, expected: usize, found: usize },
    #[error("a channel needs at least one user")]
    NoUsers,
    #[error("noise parameter rho must lie in [0, 1], got {0}")]
    InvalidRho(f64),
    #[error(transparent)]
    Field(#[from] GfError),
}

/// Fading matrix `H[t]` for one time slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChannelMatrix {
    field: PrimeField,
    n: usize,
    entries: Vec<FieldElement>,
    slot: u64,
}

impl ChannelMatrix {
    /// Builds a matrix from row-major entries; every entry must be nonzero.
    pub fn new(field: PrimeField, n: usize, entries: Vec<FieldElement>, slot: u64) -> Result<Self, ChannelError> {
        if n == 0 {
            return Err(ChannelError::NoUsers);
        }
        if entries.len() != n * n {
            return Err(ChannelError::Shape {
                n,
                expected: n * n,
                found: entries.len(),
            });
        }
        for (idx, e) in entries.iter().enumerate() {
            if e.field() != field {
                return Err(GfError::FieldMismatch {
                    left: field.q(),
                    right: e.field().q(),
                }
                .into());
            }
            if e.is_zero() {
                return Err(ChannelError::ZeroEntry {
                    row: idx / n,
                    col: idx % n,
                });
            }
        }
        Ok(Self {
            field,
            n,
            entries,
            slot,
        })
    }

    /// Convenience constructor from integer rows (reduced mod q).
    pub fn from_rows(field: PrimeField, rows: &[&[u64]], slot: u64) -> Result<Self, ChannelError> {
        let n = rows.len();
        let entries = rows
            .iter()
            .flat_map(|r| r.iter().map(|&v| field.element(v)))
            .collect();
        Self::new(field, n, entries, slot)
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn slot(&self) -> u64 {
        self.slot
    }

    pub fn with_slot(mut self, slot: u64) -> Self {
        self.slot = slot;
        self
    }

    /// `h_{ji}`: receiver `j`, transmitter `i` (both 0-based).
    #[inline]
    pub fn entry(&self, j: usize, i: usize) -> FieldElement {
        self.entries[j * self.n + i]
    }

    pub fn row(&self, j: usize) -> &[FieldElement] {
        &self.entries[j * self.n..(j + 1) * self.n]
    }

    pub fn entries(&self) -> &[FieldElement] {
        &self.entries
    }

    /// Receiver `j`'s cross coefficients, own transmitter removed.
    pub fn interference(&self, j: usize) -> Vec<FieldElement> {
        self.row(j)
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != j)
            .map(|(_, &h)| h)
            .collect()
    }

    /// `I - H`, provided it is itself a valid channel matrix.
    ///
    /// Off-diagonal targets `-h_ji` are never zero; diagonal targets
    /// `1 - h_jj` vanish whenever `h_jj = 1`.
    pub fn identity_complement(&self) -> Result<Self, ChannelError> {
        let f = self.field;
        let entries = (0..self.n * self.n)
            .map(|idx| {
                let (j, i) = (idx / self.n, idx % self.n);
                let delta = if i == j { f.one() } else { f.zero() };
                delta - self.entries[idx]
            })
            .collect();
        Self::new(f, self.n, entries, self.slot)
    }

    /// Restriction to the given users (rows and columns, in that order).
    pub fn submatrix(&self, users: &[usize]) -> Self {
        let entries = users
            .iter()
            .flat_map(|&j| users.iter().map(move |&i| (j, i)))
            .map(|(j, i)| self.entry(j, i))
            .collect();
        Self {
            field: self.field,
            n: users.len(),
            entries,
            slot: self.slot,
        }
    }
}

/// Draws a matrix with each of the `n^2` entries uniform on `{1, .., q-1}`.
pub fn draw_matrix<R: Rng + ?Sized>(n: usize, field: PrimeField, rng: &mut R, slot: u64) -> ChannelMatrix {
    assert!(n >= 1, "a channel needs at least one user");
    let q = field.q();
    let entries = (0..n * n)
        .map(|_| field.element(rng.gen_range(1..q) as u64))
        .collect();
    let m = ChannelMatrix {
        field,
        n,
        entries,
        slot,
    };
    assert!(m.entries.iter().all(|e| !e.is_zero()));
    m
}

/// Generator for stream `stream_id` under `master_seed`.
pub fn split_rng(master_seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream_id);
    rng
}

/// A sequential source of channel matrices, one per time slot.
pub trait SlotSource {
    fn field(&self) -> PrimeField;
    fn users(&self) -> usize;
    fn next_matrix(&mut self) -> ChannelMatrix;
}

impl<S: SlotSource + ?Sized> SlotSource for &mut S {
    fn field(&self) -> PrimeField {
        (**self).field()
    }
    fn users(&self) -> usize {
        (**self).users()
    }
    fn next_matrix(&mut self) -> ChannelMatrix {
        (**self).next_matrix()
    }
}

/// IID uniform fading stream.
#[derive(Debug, Clone)]
pub struct RandomStream {
    field: PrimeField,
    n: usize,
    rng: ChaCha8Rng,
    next_slot: u64,
}

impl RandomStream {
    pub fn new(n: usize, field: PrimeField, master_seed: u64, stream_id: u64) -> Self {
        Self::from_rng(n, field, split_rng(master_seed, stream_id))
    }

    pub fn from_rng(n: usize, field: PrimeField, rng: ChaCha8Rng) -> Self {
        assert!(n >= 1, "a channel needs at least one user");
        Self {
            field,
            n,
            rng,
            next_slot: 0,
        }
    }
}

impl SlotSource for RandomStream {
    fn field(&self) -> PrimeField {
        self.field
    }

    fn users(&self) -> usize {
        self.n
    }

    fn next_matrix(&mut self) -> ChannelMatrix {
        let slot = self.next_slot;
        self.next_slot += 1;
        draw_matrix(self.n, self.field, &mut self.rng, slot)
    }
}

/// Replays a fixed script of matrices, then continues with a random stream.
/// Slot indices are reassigned sequentially.
#[derive(Debug, Clone)]
pub struct ScriptedStream {
    script: VecDeque<ChannelMatrix>,
    fallback: RandomStream,
    next_slot: u64,
}

impl ScriptedStream {
    pub fn new(script: Vec<ChannelMatrix>, fallback: RandomStream) -> Self {
        assert!(script
            .iter()
            .all(|m| m.n() == fallback.users() && m.field() == fallback.field()));
        Self {
            script: script.into(),
            fallback,
            next_slot: 0,
        }
    }
}

impl SlotSource for ScriptedStream {
    fn field(&self) -> PrimeField {
        self.fallback.field()
    }

    fn users(&self) -> usize {
        self.fallback.users()
    }

    fn next_matrix(&mut self) -> ChannelMatrix {
        let slot = self.next_slot;
        self.next_slot += 1;
        self.script
            .pop_front()
            .unwrap_or_else(|| self.fallback.next_matrix())
            .with_slot(slot)
    }
}

/// Wraps a source and keeps every matrix it hands out.
#[derive(Debug)]
pub struct RecordingStream<S> {
    inner: S,
    seen: Vec<ChannelMatrix>,
}

impl<S: SlotSource> RecordingStream<S> {
    pub fn new(inner: S) -> Self {
        Self {
            inner,
            seen: Vec::new(),
        }
    }

    pub fn seen(&self) -> &[ChannelMatrix] {
        &self.seen
    }
}

impl<S: SlotSource> SlotSource for RecordingStream<S> {
    fn field(&self) -> PrimeField {
        self.inner.field()
    }

    fn users(&self) -> usize {
        self.inner.users()
    }

    fn next_matrix(&mut self) -> ChannelMatrix {
        let m = self.inner.next_matrix();
        self.seen.push(m.clone());
        m
    }
}

/// Presents the `users` sub-network of a larger stream. Slots are shared with
/// the parent stream.
pub struct SubnetworkStream<'a> {
    inner: &'a mut dyn SlotSource,
    users: Vec<usize>,
}

impl<'a> SubnetworkStream<'a> {
    pub fn new(inner: &'a mut dyn SlotSource, users: Vec<usize>) -> Self {
        assert!(users.iter().all(|&u| u < inner.users()));
        Self { inner, users }
    }
}

impl SlotSource for SubnetworkStream<'_> {
    fn field(&self) -> PrimeField {
        self.inner.field()
    }

    fn users(&self) -> usize {
        self.users.len()
    }

    fn next_matrix(&mut self) -> ChannelMatrix {
        self.inner.next_matrix().submatrix(&self.users)
    }
}

/// Noise mixture: `P(Z = 0) = 1 - rho`, `P(Z = z) = rho / (q - 1)` for `z != 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    rho: f64,
    field: PrimeField,
}

impl NoiseModel {
    pub fn new(rho: f64, field: PrimeField) -> Result<Self, ChannelError> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(ChannelError::InvalidRho(rho));
        }
        Ok(Self { rho, field })
    }

    /// Noise uniform on the whole field, `rho = (q-1)/q`.
    pub fn uniform(field: PrimeField) -> Self {
        let q = field.q() as f64;
        Self {
            rho: (q - 1.0) / q,
            field,
        }
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn mass(&self, z: FieldElement) -> f64 {
        if z.is_zero() {
            1.0 - self.rho
        } else {
            self.rho / (self.field.q() - 1) as f64
        }
    }

    /// Shannon entropy in bits.
    pub fn entropy_bits(&self) -> f64 {
        let plogp = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
        let others = (self.field.q() - 1) as f64;
        plogp(1.0 - self.rho) + others * plogp(self.rho / others)
    }
}

/// `D(Z) = log2 q - H(Z)`, the single-user capacity in bits.
pub fn relative_entropy(noise: &NoiseModel) -> f64 {
    let d = (noise.field.q() as f64).log2() - noise.entropy_bits();
    // rounding can leave a tiny negative residue at the uniform point
    d.max(0.0)
}

/// Degrees of freedom of a scheme that spreads each message over `K+1` slots.
pub fn scheme_dof(rounds_beyond_first: u64) -> Ratio<u64> {
    Ratio::new(1, rounds_beyond_first + 1)
}

/// Time-shared child of an `m`-user parent with `K+1` slots per message.
pub fn child_dof(m: u64, n: u64, rounds_beyond_first: u64) -> Ratio<u64> {
    Ratio::new(m, n * (rounds_beyond_first + 1))
}

/// Rate bookkeeping for a symmetric scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateQuantities {
    pub d_of_z: f64,
    pub dof: f64,
}

impl RateQuantities {
    pub fn new(noise: &NoiseModel, dof: Ratio<u64>) -> Self {
        Self {
            d_of_z: relative_entropy(noise),
            dof: *dof.numer() as f64 / *dof.denom() as f64,
        }
    }

    /// Symmetric per-user rate `DOF * D(Z)` in bits per channel use.
    pub fn rate(&self) -> f64 {
        self.dof * self.d_of_z
    }
}
