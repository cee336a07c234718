//! Exact arithmetic and linear algebra over prime fields GF(q).
//!
//! Elements carry their field so that mixing fields is caught at the point of
//! combination. The operator impls (`+`, `-`, `*`) panic on a mismatch; the
//! `try_*` methods report it as [`GfError::FieldMismatch`].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Field sizes must stay below this bound so products fit in a `u64`.
pub const MAX_FIELD_SIZE: u64 = 1 << 31;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GfError {
    #[error("field size {0} is not prime")]
    NotPrime(u64),
    #[error("field size {0} is too large (must be below 2^31)")]
    TooLarge(u64),
    #[error("cannot combine elements of GF({left}) and GF({right})")]
    FieldMismatch { left: u32, right: u32 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("vector length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("empty input")]
    Empty,
}

pub type Result<T> = std::result::Result<T, GfError>;

fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    if q < 4 {
        return true;
    }
    if q % 2 == 0 {
        return false;
    }
    let mut d = 3;
    while d * d <= q {
        if q % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// The prime field of size `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct PrimeField {
    q: u32,
}

impl PrimeField {
    pub fn new(q: u64) -> Result<Self> {
        if q >= MAX_FIELD_SIZE {
            return Err(GfError::TooLarge(q));
        }
        if !is_prime(q) {
            return Err(GfError::NotPrime(q));
        }
        Ok(Self { q: q as u32 })
    }

    #[inline]
    pub fn q(self) -> u32 {
        self.q
    }

    /// Reduces `value` into the field.
    #[inline]
    pub fn element(self, value: u64) -> FieldElement {
        FieldElement {
            value: (value % self.q as u64) as u32,
            field: self,
        }
    }

    /// Maps a signed integer to its residue.
    pub fn from_i64(self, value: i64) -> FieldElement {
        let q = self.q as i64;
        self.element(value.rem_euclid(q) as u64)
    }

    #[inline]
    pub fn zero(self) -> FieldElement {
        FieldElement { value: 0, field: self }
    }

    #[inline]
    pub fn one(self) -> FieldElement {
        self.element(1)
    }

    pub fn elements(self) -> impl Iterator<Item = FieldElement> {
        (0..self.q).map(move |value| FieldElement { value, field: self })
    }

    /// The multiplicative group `GF(q) \ {0}`.
    pub fn nonzero_elements(self) -> impl Iterator<Item = FieldElement> {
        (1..self.q).map(move |value| FieldElement { value, field: self })
    }

    #[inline]
    pub(crate) fn add_raw(self, a: u32, b: u32) -> u32 {
        let s = a as u64 + b as u64;
        let q = self.q as u64;
        (if s >= q { s - q } else { s }) as u32
    }

    #[inline]
    pub(crate) fn sub_raw(self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            (a as u64 + self.q as u64 - b as u64) as u32
        }
    }

    #[inline]
    pub(crate) fn mul_raw(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.q as u64) as u32
    }

    /// Inverse by the extended Euclidean algorithm. `a` must be nonzero.
    pub(crate) fn inv_raw(self, a: u32) -> u32 {
        debug_assert!(a != 0 && a < self.q);
        let (mut r0, mut r1) = (self.q as i64, a as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let quot = r0 / r1;
            (r0, r1) = (r1, r0 - quot * r1);
            (t0, t1) = (t1, t0 - quot * t1);
        }
        t0.rem_euclid(self.q as i64) as u32
    }
}

impl TryFrom<u64> for PrimeField {
    type Error = GfError;
    fn try_from(q: u64) -> Result<Self> {
        Self::new(q)
    }
}

impl From<PrimeField> for u64 {
    fn from(f: PrimeField) -> u64 {
        f.q as u64
    }
}

impl fmt::Display for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.q)
    }
}

/// A residue in `[0, q)` tagged with its field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u32,
    field: PrimeField,
}

impl FieldElement {
    #[inline]
    pub fn value(self) -> u32 {
        self.value
    }

    #[inline]
    pub fn field(self) -> PrimeField {
        self.field
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn same_field(self, other: Self) -> Result<PrimeField> {
        if self.field == other.field {
            Ok(self.field)
        } else {
            Err(GfError::FieldMismatch {
                left: self.field.q,
                right: other.field.q,
            })
        }
    }

    pub fn try_add(self, rhs: Self) -> Result<Self> {
        let f = self.same_field(rhs)?;
        Ok(FieldElement {
            value: f.add_raw(self.value, rhs.value),
            field: f,
        })
    }

    pub fn try_sub(self, rhs: Self) -> Result<Self> {
        let f = self.same_field(rhs)?;
        Ok(FieldElement {
            value: f.sub_raw(self.value, rhs.value),
            field: f,
        })
    }

    pub fn try_mul(self, rhs: Self) -> Result<Self> {
        let f = self.same_field(rhs)?;
        Ok(FieldElement {
            value: f.mul_raw(self.value, rhs.value),
            field: f,
        })
    }

    /// Multiplicative inverse; zero is a domain error.
    pub fn inverse(self) -> Result<Self> {
        if self.value == 0 {
            return Err(GfError::ZeroInverse);
        }
        Ok(FieldElement {
            value: self.field.inv_raw(self.value),
            field: self.field,
        })
    }

    pub fn pow(self, mut exp: u64) -> Self {
        let f = self.field;
        let mut base = self.value;
        let mut acc = 1 % f.q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = f.mul_raw(acc, base);
            }
            base = f.mul_raw(base, base);
            exp >>= 1;
        }
        FieldElement { value: acc, field: f }
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: Self) -> Self {
        self.try_add(rhs).expect("field mismatch in addition")
    }
}

impl Sub for FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: Self) -> Self {
        self.try_sub(rhs).expect("field mismatch in subtraction")
    }
}

impl Mul for FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: Self) -> Self {
        self.try_mul(rhs).expect("field mismatch in multiplication")
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> Self {
        FieldElement {
            value: self.field.sub_raw(0, self.value),
            field: self.field,
        }
    }
}

/// A non-empty vector over a single prime field.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldVector {
    field: PrimeField,
    entries: Vec<FieldElement>,
}

impl FieldVector {
    pub fn new(field: PrimeField, entries: Vec<FieldElement>) -> Result<Self> {
        if entries.is_empty() {
            return Err(GfError::Empty);
        }
        for e in &entries {
            if e.field != field {
                return Err(GfError::FieldMismatch {
                    left: field.q,
                    right: e.field.q,
                });
            }
        }
        Ok(Self { field, entries })
    }

    /// Builds a vector from integers, reducing each one mod q.
    pub fn from_values(field: PrimeField, values: &[u64]) -> Result<Self> {
        Self::new(field, values.iter().map(|&v| field.element(v)).collect())
    }

    pub fn zeros(field: PrimeField, len: usize) -> Result<Self> {
        Self::new(field, vec![field.zero(); len])
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[FieldElement] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> FieldElement {
        self.entries[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = FieldElement> + '_ {
        self.entries.iter().copied()
    }

    pub fn values(&self) -> Vec<u32> {
        self.entries.iter().map(|e| e.value).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn has_no_zero_entries(&self) -> bool {
        self.entries.iter().all(|e| !e.is_zero())
    }

    pub fn scale(&self, c: FieldElement) -> Self {
        Self {
            field: self.field,
            entries: self.entries.iter().map(|&e| e * c).collect(),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            field: self.field,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| a + b)
                .collect(),
        })
    }

    /// Mutable access to one entry; used to build negative controls.
    pub fn set(&mut self, i: usize, value: FieldElement) -> Result<()> {
        if value.field != self.field {
            return Err(GfError::FieldMismatch {
                left: self.field.q,
                right: value.field.q,
            });
        }
        self.entries[i] = value;
        Ok(())
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(GfError::FieldMismatch {
                left: self.field.q,
                right: other.field.q,
            });
        }
        if self.len() != other.len() {
            return Err(GfError::LengthMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for FieldVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", e.value)?;
        }
        write!(f, ")")
    }
}

/// `sum_m coeffs[m] * vectors[m]`.
pub fn linear_combination(vectors: &[FieldVector], coeffs: &FieldVector) -> Result<FieldVector> {
    let (field, dim) = check_family(vectors)?;
    if coeffs.field != field {
        return Err(GfError::FieldMismatch {
            left: field.q,
            right: coeffs.field.q,
        });
    }
    if coeffs.len() != vectors.len() {
        return Err(GfError::LengthMismatch {
            expected: vectors.len(),
            found: coeffs.len(),
        });
    }
    let mut acc = vec![0u32; dim];
    for (v, c) in vectors.iter().zip(coeffs.iter()) {
        for (a, e) in acc.iter_mut().zip(&v.entries) {
            *a = field.add_raw(*a, field.mul_raw(c.value, e.value));
        }
    }
    FieldVector::new(field, acc.into_iter().map(|v| field.element(v as u64)).collect())
}

fn check_family(vectors: &[FieldVector]) -> Result<(PrimeField, usize)> {
    let first = vectors.first().ok_or(GfError::Empty)?;
    for v in &vectors[1..] {
        first.check_compatible(v)?;
    }
    Ok((first.field, first.len()))
}

/// Incremental row echelon form over raw residues, tracking for every basis
/// row the combination of input vectors that produced it.
///
/// Basis rows are normalised to 1 at their pivot and have zeros at the pivots
/// of all earlier rows, so reducing a new row against the basis in insertion
/// order leaves it zero exactly when it lies in the span.
pub(crate) struct Reducer {
    field: PrimeField,
    total: usize,
    basis: Vec<(usize, Vec<u32>, Vec<u32>)>,
}

impl Reducer {
    pub(crate) fn new(field: PrimeField, total: usize) -> Self {
        Self {
            field,
            total,
            basis: Vec::new(),
        }
    }

    pub(crate) fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Inserts input vector number `index`. Returns the dependence (over the
    /// inputs, with coefficient 1 on `index`) if the vector was already in the
    /// span; otherwise extends the basis and returns `None`.
    pub(crate) fn insert(&mut self, index: usize, vector: &[u32]) -> Option<Vec<u32>> {
        let f = self.field;
        let mut row = vector.to_vec();
        let mut combo = vec![0u32; self.total];
        combo[index] = 1;
        for (pivot, brow, bcombo) in &self.basis {
            let factor = row[*pivot];
            if factor == 0 {
                continue;
            }
            for (r, b) in row.iter_mut().zip(brow) {
                *r = f.sub_raw(*r, f.mul_raw(factor, *b));
            }
            for (c, b) in combo.iter_mut().zip(bcombo) {
                *c = f.sub_raw(*c, f.mul_raw(factor, *b));
            }
        }
        match row.iter().position(|&x| x != 0) {
            None => Some(combo),
            Some(pivot) => {
                let inv = f.inv_raw(row[pivot]);
                for r in row.iter_mut() {
                    *r = f.mul_raw(*r, inv);
                }
                for c in combo.iter_mut() {
                    *c = f.mul_raw(*c, inv);
                }
                self.basis.push((pivot, row, combo));
                None
            }
        }
    }
}

/// Scales so that the first nonzero coefficient equals 1.
fn normalize_leading(field: PrimeField, coeffs: &mut [u32]) {
    if let Some(&lead) = coeffs.iter().find(|&&c| c != 0) {
        let inv = field.inv_raw(lead);
        for c in coeffs.iter_mut() {
            *c = field.mul_raw(*c, inv);
        }
    }
}

/// Finds a nontrivial dependence `sum_m lambda_m v_m = 0`.
///
/// When the last vector lies in the span of the earlier ones the returned
/// coefficients involve it (its coefficient is nonzero). Output is normalised
/// so the first nonzero coefficient is 1. `None` means the vectors are
/// linearly independent.
pub fn linear_dependence(vectors: &[FieldVector]) -> Result<Option<FieldVector>> {
    let (field, _) = check_family(vectors)?;
    let total = vectors.len();
    let mut reducer = Reducer::new(field, total);
    let mut earlier = None;
    for (i, v) in vectors[..total - 1].iter().enumerate() {
        let dep = reducer.insert(i, &v.values());
        if earlier.is_none() {
            earlier = dep;
        }
    }
    let last = reducer.insert(total - 1, &vectors[total - 1].values());
    let Some(mut coeffs) = last.or(earlier) else {
        return Ok(None);
    };
    normalize_leading(field, &mut coeffs);
    let coeffs = FieldVector::new(
        field,
        coeffs.into_iter().map(|c| field.element(c as u64)).collect(),
    )?;
    debug_assert!(linear_combination(vectors, &coeffs)?.is_zero());
    Ok(Some(coeffs))
}

/// Rank of the family over GF(q). The empty family has rank 0.
pub fn rank(vectors: &[FieldVector]) -> Result<usize> {
    if vectors.is_empty() {
        return Ok(0);
    }
    let (field, _) = check_family(vectors)?;
    let mut reducer = Reducer::new(field, vectors.len());
    for (i, v) in vectors.iter().enumerate() {
        reducer.insert(i, &v.values());
    }
    Ok(reducer.rank())
}

/// Basis of `{lambda : sum_m lambda_m v_m = 0}` for raw vectors of common
/// length `dim`. Works for `dim == 0`, where every coefficient vector qualifies.
pub(crate) fn null_space_raw(field: PrimeField, vectors: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let mut reducer = Reducer::new(field, vectors.len());
    vectors
        .iter()
        .enumerate()
        .filter_map(|(i, v)| reducer.insert(i, v))
        .collect()
}

/// Basis of the space of coefficient vectors that combine `vectors` to zero.
pub fn null_space(vectors: &[FieldVector]) -> Result<Vec<FieldVector>> {
    let (field, _) = check_family(vectors)?;
    let raw: Vec<Vec<u32>> = vectors.iter().map(|v| v.values()).collect();
    null_space_raw(field, &raw)
        .into_iter()
        .map(|c| FieldVector::new(field, c.into_iter().map(|x| field.element(x as u64)).collect()))
        .collect()
}
