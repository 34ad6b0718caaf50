//! Exact dense linear algebra over prime fields `F_p` and the rationals.
//!
//! Every matrix carries its field. Algorithms are written once against the
//! private [`Arith`] trait and dispatched on the concrete representation, so a
//! prime-field matrix stores plain `u32` residues while a rational matrix
//! stores reduced `BigRational`s.
//!
//! Row reduction is deterministic: the pivot of each column is the first row
//! (at or below the current row) holding a nonzero entry, and columns are
//! scanned left to right. Everything downstream (cohomology bases, homotopy
//! witnesses) inherits that determinism.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

const MAX_PRIME: u64 = 1 << 31;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum Kind {
    Prime(u32),
    Rational,
}

/// The coefficient field of a matrix: either `F_p` for a prime `p < 2^31`, or `Q`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct FieldSpec {
    kind: Kind,
}

impl FieldSpec {
    pub fn prime(p: u64) -> Result<Self> {
        if !(2..MAX_PRIME).contains(&p) {
            return Err(Error::InvalidField(format!("modulus {p} outside [2, 2^31)")));
        }
        if !is_prime(p) {
            return Err(Error::InvalidField(format!("{p} is not prime")));
        }
        Ok(FieldSpec {
            kind: Kind::Prime(p as u32),
        })
    }

    pub fn rational() -> Self {
        FieldSpec {
            kind: Kind::Rational,
        }
    }

    /// `Some(p)` for `F_p`, `None` for `Q`.
    pub fn modulus(&self) -> Option<u32> {
        match self.kind {
            Kind::Prime(p) => Some(p),
            Kind::Rational => None,
        }
    }

    pub fn is_rational(&self) -> bool {
        self.kind == Kind::Rational
    }

    /// Maps an integer into the field.
    pub fn scalar_from_i64(&self, v: i64) -> Scalar {
        match self.kind {
            Kind::Prime(p) => Scalar::Residue(PrimeArith { p }.from_i64(v)),
            Kind::Rational => Scalar::Rational(BigRational::from_integer(BigInt::from(v))),
        }
    }

    /// Maps a rational number into the field; over `F_p` the denominator must be a unit.
    pub fn scalar_from_rational(&self, v: &BigRational) -> Result<Scalar> {
        match self.kind {
            Kind::Prime(p) => PrimeArith { p }
                .from_rational(v)
                .map(Scalar::Residue)
                .ok_or_else(|| Error::InvalidScalar {
                    value: v.to_string(),
                    field: *self,
                }),
            Kind::Rational => Ok(Scalar::Rational(v.clone())),
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            Kind::Prime(p) => write!(f, "F{p}"),
            Kind::Rational => write!(f, "Q"),
        }
    }
}

impl FromStr for FieldSpec {
    type Err = Error;

    /// Accepts `Q` or `F<p>` (for example `F5`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "Q" {
            return Ok(FieldSpec::rational());
        }
        let digits = s
            .strip_prefix('F')
            .ok_or_else(|| Error::InvalidField(format!("unrecognised field {s:?}")))?;
        let p: u64 = digits
            .parse()
            .map_err(|_| Error::InvalidField(format!("unrecognised field {s:?}")))?;
        FieldSpec::prime(p)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// A single field element, as read out of a [`Matrix`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Scalar {
    /// Canonical representative in `0..p`.
    Residue(u32),
    Rational(BigRational),
}

impl Scalar {
    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Residue(v) => *v == 0,
            Scalar::Rational(q) => q.is_zero(),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Residue(v) => write!(f, "{v}"),
            Scalar::Rational(q) => write!(f, "{q}"),
        }
    }
}

/// Field arithmetic used by the generic kernels.
pub(crate) trait Arith: Clone + PartialEq + Eq + fmt::Debug {
    type Elem: Clone + PartialEq + Eq + fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    /// Caller guarantees `a != 0`.
    fn inv(&self, a: &Self::Elem) -> Self::Elem;
    fn from_i64(&self, v: i64) -> Self::Elem;
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) struct PrimeArith {
    p: u32,
}

impl PrimeArith {
    fn from_rational(&self, v: &BigRational) -> Option<u32> {
        let p = BigInt::from(self.p);
        let num = v.numer().mod_floor(&p).to_u32()?;
        let den = v.denom().mod_floor(&p).to_u32()?;
        if den == 0 {
            return None;
        }
        Some(self.mul(&num, &self.inv(&den)))
    }
}

impl Arith for PrimeArith {
    type Elem = u32;

    fn zero(&self) -> u32 {
        0
    }
    fn one(&self) -> u32 {
        1
    }
    fn is_zero(&self, a: &u32) -> bool {
        *a == 0
    }
    fn add(&self, a: &u32, b: &u32) -> u32 {
        ((*a as u64 + *b as u64) % self.p as u64) as u32
    }
    fn sub(&self, a: &u32, b: &u32) -> u32 {
        ((*a as u64 + self.p as u64 - *b as u64) % self.p as u64) as u32
    }
    fn mul(&self, a: &u32, b: &u32) -> u32 {
        ((*a as u64 * *b as u64) % self.p as u64) as u32
    }
    fn neg(&self, a: &u32) -> u32 {
        if *a == 0 {
            0
        } else {
            self.p - *a
        }
    }
    fn inv(&self, a: &u32) -> u32 {
        // extended Euclid on (a, p)
        let (mut r0, mut r1) = (self.p as i64, *a as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1, "inverse of a non-unit");
        t0.rem_euclid(self.p as i64) as u32
    }
    fn from_i64(&self, v: i64) -> u32 {
        v.rem_euclid(self.p as i64) as u32
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) struct RationalArith;

impl Arith for RationalArith {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn inv(&self, a: &BigRational) -> BigRational {
        a.recip()
    }
    fn from_i64(&self, v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }
}

/// Row-major dense matrix over one concrete field.
#[derive(Clone, PartialEq, Eq, Debug)]
pub(crate) struct Dense<A: Arith> {
    arith: A,
    rows: usize,
    cols: usize,
    data: Vec<A::Elem>,
}

impl<A: Arith> Dense<A> {
    fn zeros(arith: A, rows: usize, cols: usize) -> Self {
        let data = vec![arith.zero(); rows * cols];
        Dense {
            arith,
            rows,
            cols,
            data,
        }
    }

    fn identity(arith: A, n: usize) -> Self {
        let mut m = Dense::zeros(arith, n, n);
        for i in 0..n {
            m.data[i * n + i] = m.arith.one();
        }
        m
    }

    #[inline]
    fn at(&self, r: usize, c: usize) -> &A::Elem {
        &self.data[r * self.cols + c]
    }

    fn is_zero(&self) -> bool {
        self.data.iter().all(|x| self.arith.is_zero(x))
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = Dense::zeros(self.arith.clone(), self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if self.arith.is_zero(a) {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.at(k, j);
                    if self.arith.is_zero(b) {
                        continue;
                    }
                    let idx = i * other.cols + j;
                    out.data[idx] = self.arith.add(&out.data[idx], &self.arith.mul(a, b));
                }
            }
        }
        out
    }

    fn zip(&self, other: &Self, op: impl Fn(&A, &A::Elem, &A::Elem) -> A::Elem) -> Self {
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| op(&self.arith, a, b))
            .collect();
        Dense {
            arith: self.arith.clone(),
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    fn map(&self, op: impl Fn(&A, &A::Elem) -> A::Elem) -> Self {
        Dense {
            arith: self.arith.clone(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| op(&self.arith, a)).collect(),
        }
    }

    fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                data.push(self.at(r, c).clone());
            }
        }
        Dense {
            arith: self.arith.clone(),
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    fn select_cols(&self, cols: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.rows * cols.len());
        for r in 0..self.rows {
            for &c in cols {
                data.push(self.at(r, c).clone());
            }
        }
        Dense {
            arith: self.arith.clone(),
            rows: self.rows,
            cols: cols.len(),
            data,
        }
    }

    fn hstack(parts: &[&Self], arith: A, rows: usize) -> Self {
        let cols = parts.iter().map(|p| p.cols).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for p in parts {
                data.extend_from_slice(&p.data[r * p.cols..(r + 1) * p.cols]);
            }
        }
        Dense {
            arith,
            rows,
            cols,
            data,
        }
    }

    fn vstack(parts: &[&Self], arith: A, cols: usize) -> Self {
        let rows = parts.iter().map(|p| p.rows).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for p in parts {
            data.extend_from_slice(&p.data);
        }
        Dense {
            arith,
            rows,
            cols,
            data,
        }
    }

    fn block_diag(&self, other: &Self) -> Self {
        let rows = self.rows + other.rows;
        let cols = self.cols + other.cols;
        let mut out = Dense::zeros(self.arith.clone(), rows, cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[r * cols + c] = self.at(r, c).clone();
            }
        }
        for r in 0..other.rows {
            for c in 0..other.cols {
                out.data[(self.rows + r) * cols + self.cols + c] = other.at(r, c).clone();
            }
        }
        out
    }

    /// In-place Gauss-Jordan elimination. Returns the pivot columns.
    fn reduce(&mut self) -> Vec<usize> {
        let ar = self.arith.clone();
        let cols = self.cols;
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..cols {
            if row == self.rows {
                break;
            }
            let Some(pr) = (row..self.rows).find(|&r| !ar.is_zero(self.at(r, col))) else {
                continue;
            };
            if pr != row {
                for c in 0..cols {
                    self.data.swap(pr * cols + c, row * cols + c);
                }
            }
            let inv = ar.inv(self.at(row, col));
            for c in col..cols {
                let idx = row * cols + c;
                self.data[idx] = ar.mul(&self.data[idx], &inv);
            }
            for r in 0..self.rows {
                if r == row {
                    continue;
                }
                let factor = self.at(r, col).clone();
                if ar.is_zero(&factor) {
                    continue;
                }
                for c in col..cols {
                    let delta = ar.mul(&factor, &self.data[row * cols + c]);
                    let idx = r * cols + c;
                    self.data[idx] = ar.sub(&self.data[idx], &delta);
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.reduce();
        (m, pivots)
    }

    fn kernel_basis(&self) -> Self {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = Dense::zeros(self.arith.clone(), self.cols, free.len());
        for (j, &fc) in free.iter().enumerate() {
            out.data[fc * free.len() + j] = self.arith.one();
            for (prow, &pc) in pivots.iter().enumerate() {
                out.data[pc * free.len() + j] = self.arith.neg(r.at(prow, fc));
            }
        }
        out
    }

    fn solve(&self, b: &Self) -> Option<Self> {
        let aug = Dense::hstack(&[self, b], self.arith.clone(), self.rows);
        let (r, pivots) = aug.rref();
        if pivots.iter().any(|&p| p >= self.cols) {
            return None;
        }
        let mut x = Dense::zeros(self.arith.clone(), self.cols, b.cols);
        for (prow, &pc) in pivots.iter().enumerate() {
            for k in 0..b.cols {
                x.data[pc * b.cols + k] = r.at(prow, self.cols + k).clone();
            }
        }
        Some(x)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
enum Repr {
    Prime(Dense<PrimeArith>),
    Rational(Dense<RationalArith>),
}

/// Dense exact matrix tagged with its coefficient field.
///
/// Shapes with zero rows or zero columns are legal and act as the unique map
/// into or out of the zero space.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Matrix {
    repr: Repr,
}

macro_rules! lift {
    ($m:expr, $d:ident => $body:expr) => {
        match &$m.repr {
            Repr::Prime($d) => Matrix {
                repr: Repr::Prime($body),
            },
            Repr::Rational($d) => Matrix {
                repr: Repr::Rational($body),
            },
        }
    };
}

macro_rules! lift2 {
    ($a:expr, $b:expr, $x:ident, $y:ident => $body:expr) => {
        match (&$a.repr, &$b.repr) {
            (Repr::Prime($x), Repr::Prime($y)) => Matrix {
                repr: Repr::Prime($body),
            },
            (Repr::Rational($x), Repr::Rational($y)) => Matrix {
                repr: Repr::Rational($body),
            },
            _ => unreachable!("field checked by caller"),
        }
    };
}

impl Matrix {
    pub fn zeros(field: FieldSpec, rows: usize, cols: usize) -> Self {
        match field.kind {
            Kind::Prime(p) => Matrix {
                repr: Repr::Prime(Dense::zeros(PrimeArith { p }, rows, cols)),
            },
            Kind::Rational => Matrix {
                repr: Repr::Rational(Dense::zeros(RationalArith, rows, cols)),
            },
        }
    }

    pub fn identity(field: FieldSpec, n: usize) -> Self {
        match field.kind {
            Kind::Prime(p) => Matrix {
                repr: Repr::Prime(Dense::identity(PrimeArith { p }, n)),
            },
            Kind::Rational => Matrix {
                repr: Repr::Rational(Dense::identity(RationalArith, n)),
            },
        }
    }

    /// Builds a matrix from row-major integer entries, reducing into the field.
    pub fn from_i64(field: FieldSpec, rows: usize, cols: usize, entries: &[i64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DataLength {
                expected: rows * cols,
                got: entries.len(),
            });
        }
        Ok(match field.kind {
            Kind::Prime(p) => {
                let ar = PrimeArith { p };
                Matrix {
                    repr: Repr::Prime(Dense {
                        data: entries.iter().map(|&v| ar.from_i64(v)).collect(),
                        arith: ar,
                        rows,
                        cols,
                    }),
                }
            }
            Kind::Rational => Matrix {
                repr: Repr::Rational(Dense {
                    data: entries.iter().map(|&v| RationalArith.from_i64(v)).collect(),
                    arith: RationalArith,
                    rows,
                    cols,
                }),
            },
        })
    }

    /// Builds a matrix from row-major rational entries. Over `F_p` every
    /// denominator must be invertible mod `p`.
    pub fn from_rationals(
        field: FieldSpec,
        rows: usize,
        cols: usize,
        entries: &[BigRational],
    ) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DataLength {
                expected: rows * cols,
                got: entries.len(),
            });
        }
        Ok(match field.kind {
            Kind::Prime(p) => {
                let ar = PrimeArith { p };
                let data = entries
                    .iter()
                    .map(|v| {
                        ar.from_rational(v).ok_or_else(|| Error::InvalidScalar {
                            value: v.to_string(),
                            field,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Matrix {
                    repr: Repr::Prime(Dense {
                        arith: ar,
                        rows,
                        cols,
                        data,
                    }),
                }
            }
            Kind::Rational => Matrix {
                repr: Repr::Rational(Dense {
                    arith: RationalArith,
                    rows,
                    cols,
                    data: entries.to_vec(),
                }),
            },
        })
    }

    /// Convenience constructor from nested integer rows; `cols` is taken from
    /// the first row (zero when there are no rows).
    pub fn from_rows(field: FieldSpec, rows: &[&[i64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DataLength {
                expected: cols,
                got: bad.len(),
            });
        }
        let flat: Vec<i64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Matrix::from_i64(field, rows.len(), cols, &flat)
    }

    pub fn field(&self) -> FieldSpec {
        match &self.repr {
            Repr::Prime(d) => FieldSpec {
                kind: Kind::Prime(d.arith.p),
            },
            Repr::Rational(_) => FieldSpec::rational(),
        }
    }

    pub fn rows(&self) -> usize {
        match &self.repr {
            Repr::Prime(d) => d.rows,
            Repr::Rational(d) => d.rows,
        }
    }

    pub fn cols(&self) -> usize {
        match &self.repr {
            Repr::Prime(d) => d.cols,
            Repr::Rational(d) => d.cols,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows(), self.cols())
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    /// Panics if `(r, c)` is out of range.
    pub fn get(&self, r: usize, c: usize) -> Scalar {
        assert!(r < self.rows() && c < self.cols(), "index ({r}, {c}) out of range");
        match &self.repr {
            Repr::Prime(d) => Scalar::Residue(*d.at(r, c)),
            Repr::Rational(d) => Scalar::Rational(d.at(r, c).clone()),
        }
    }

    /// Entries grouped by row.
    pub fn to_rows(&self) -> Vec<Vec<Scalar>> {
        (0..self.rows())
            .map(|r| (0..self.cols()).map(|c| self.get(r, c)).collect())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        match &self.repr {
            Repr::Prime(d) => d.is_zero(),
            Repr::Rational(d) => d.is_zero(),
        }
    }

    fn same_field(&self, other: &Matrix) -> Result<()> {
        if self.field() != other.field() {
            return Err(Error::FieldMismatch {
                left: self.field(),
                right: other.field(),
            });
        }
        Ok(())
    }

    fn same_shape(&self, other: &Matrix, op: &'static str) -> Result<()> {
        self.same_field(other)?;
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                op,
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(())
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        self.same_field(other)?;
        if self.cols() != other.rows() {
            return Err(Error::ShapeMismatch {
                op: "mul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(lift2!(self, other, a, b => a.mul(b)))
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.same_shape(other, "add")?;
        Ok(lift2!(self, other, a, b => a.zip(b, |ar, x, y| ar.add(x, y))))
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.same_shape(other, "sub")?;
        Ok(lift2!(self, other, a, b => a.zip(b, |ar, x, y| ar.sub(x, y))))
    }

    pub fn neg(&self) -> Matrix {
        lift!(self, d => d.map(|ar, x| ar.neg(x)))
    }

    /// Multiplies every entry by the integer `k` (taken in the field).
    pub fn scale_i64(&self, k: i64) -> Matrix {
        lift!(self, d => {
            let s = d.arith.from_i64(k);
            d.map(|ar, x| ar.mul(x, &s))
        })
    }

    pub fn transpose(&self) -> Matrix {
        lift!(self, d => d.transpose())
    }

    /// The columns with the given indices, in the given order.
    pub fn select_cols(&self, cols: &[usize]) -> Matrix {
        assert!(cols.iter().all(|&c| c < self.cols()), "column index out of range");
        lift!(self, d => d.select_cols(cols))
    }

    /// Same row-major entries viewed with a new shape.
    pub fn reshape(&self, rows: usize, cols: usize) -> Matrix {
        assert_eq!(rows * cols, self.rows() * self.cols(), "reshape changes entry count");
        lift!(self, d => Dense {
            arith: d.arith,
            rows,
            cols,
            data: d.data.clone(),
        })
    }

    /// Kronecker product. With row-major flattening `vec`,
    /// `vec(A · X · B) = (A ⊗ Bᵀ) · vec(X)`.
    pub fn kron(&self, other: &Matrix) -> Result<Matrix> {
        self.same_field(other)?;
        Ok(lift2!(self, other, a, b => {
            let rows = a.rows * b.rows;
            let cols = a.cols * b.cols;
            let mut out = Dense::zeros(a.arith, rows, cols);
            for i in 0..a.rows {
                for j in 0..a.cols {
                    let x = a.at(i, j);
                    if a.arith.is_zero(x) {
                        continue;
                    }
                    for k in 0..b.rows {
                        for l in 0..b.cols {
                            out.data[(i * b.rows + k) * cols + j * b.cols + l] =
                                a.arith.mul(x, b.at(k, l));
                        }
                    }
                }
            }
            out
        }))
    }

    /// The rows with the given indices, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        self.transpose().select_cols(rows).transpose()
    }

    /// Block-diagonal sum with `self` in the upper-left corner.
    pub fn block_diag(&self, other: &Matrix) -> Result<Matrix> {
        self.same_field(other)?;
        Ok(lift2!(self, other, a, b => a.block_diag(b)))
    }

    /// Concatenates left to right. All parts must share a field and row count.
    pub fn hstack(parts: &[&Matrix]) -> Result<Matrix> {
        let first = parts.first().expect("hstack of no matrices");
        for p in &parts[1..] {
            first.same_field(p)?;
            if p.rows() != first.rows() {
                return Err(Error::ShapeMismatch {
                    op: "hstack",
                    left: first.shape(),
                    right: p.shape(),
                });
            }
        }
        let rows = first.rows();
        Ok(match &first.repr {
            Repr::Prime(d) => {
                let ds: Vec<_> = parts.iter().map(|p| p.as_prime()).collect();
                Matrix {
                    repr: Repr::Prime(Dense::hstack(&ds, d.arith, rows)),
                }
            }
            Repr::Rational(_) => {
                let ds: Vec<_> = parts.iter().map(|p| p.as_rational()).collect();
                Matrix {
                    repr: Repr::Rational(Dense::hstack(&ds, RationalArith, rows)),
                }
            }
        })
    }

    /// Concatenates top to bottom. All parts must share a field and column count.
    pub fn vstack(parts: &[&Matrix]) -> Result<Matrix> {
        let first = parts.first().expect("vstack of no matrices");
        for p in &parts[1..] {
            first.same_field(p)?;
            if p.cols() != first.cols() {
                return Err(Error::ShapeMismatch {
                    op: "vstack",
                    left: first.shape(),
                    right: p.shape(),
                });
            }
        }
        let cols = first.cols();
        Ok(match &first.repr {
            Repr::Prime(d) => {
                let ds: Vec<_> = parts.iter().map(|p| p.as_prime()).collect();
                Matrix {
                    repr: Repr::Prime(Dense::vstack(&ds, d.arith, cols)),
                }
            }
            Repr::Rational(_) => {
                let ds: Vec<_> = parts.iter().map(|p| p.as_rational()).collect();
                Matrix {
                    repr: Repr::Rational(Dense::vstack(&ds, RationalArith, cols)),
                }
            }
        })
    }

    /// Assembles a block matrix from a grid of blocks given row by row.
    pub fn from_blocks(grid: &[&[&Matrix]]) -> Result<Matrix> {
        let rows = grid
            .iter()
            .map(|row| Matrix::hstack(row))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<&Matrix> = rows.iter().collect();
        Matrix::vstack(&refs)
    }

    fn as_prime(&self) -> &Dense<PrimeArith> {
        match &self.repr {
            Repr::Prime(d) => d,
            Repr::Rational(_) => unreachable!("field checked by caller"),
        }
    }

    fn as_rational(&self) -> &Dense<RationalArith> {
        match &self.repr {
            Repr::Rational(d) => d,
            Repr::Prime(_) => unreachable!("field checked by caller"),
        }
    }

    /// Reduced row echelon form together with the pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        match &self.repr {
            Repr::Prime(d) => {
                let (m, p) = d.rref();
                (
                    Matrix {
                        repr: Repr::Prime(m),
                    },
                    p,
                )
            }
            Repr::Rational(d) => {
                let (m, p) = d.rref();
                (
                    Matrix {
                        repr: Repr::Rational(m),
                    },
                    p,
                )
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Columns form a basis of the null space, one per free column in order.
    pub fn kernel_basis(&self) -> Matrix {
        lift!(self, d => d.kernel_basis())
    }

    /// Some `x` with `self · x = b`, free variables set to zero; `None` when
    /// the system is inconsistent.
    pub fn solve(&self, b: &Matrix) -> Result<Option<Matrix>> {
        self.same_field(b)?;
        if self.rows() != b.rows() {
            return Err(Error::ShapeMismatch {
                op: "solve",
                left: self.shape(),
                right: b.shape(),
            });
        }
        Ok(match (&self.repr, &b.repr) {
            (Repr::Prime(m), Repr::Prime(b)) => m.solve(b).map(|x| Matrix {
                repr: Repr::Prime(x),
            }),
            (Repr::Rational(m), Repr::Rational(b)) => m.solve(b).map(|x| Matrix {
                repr: Repr::Rational(x),
            }),
            _ => unreachable!("field checked above"),
        })
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows()
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.to_rows().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (j, x) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// `a · b`.
pub fn mat_mul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    a.mul(b)
}

pub fn rref(m: &Matrix) -> (Matrix, Vec<usize>) {
    m.rref()
}

pub fn kernel_basis(m: &Matrix) -> Matrix {
    m.kernel_basis()
}

pub fn solve_linear(m: &Matrix, b: &Matrix) -> Result<Option<Matrix>> {
    m.solve(b)
}

pub fn block_diag(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    a.block_diag(b)
}

/// Parses a rational literal such as `-3`, `7/2` or `4/-6`.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(BigRational::new(n, d))
}

/// Formats a rational as `n` or `n/d` with a positive denominator.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else if q.denom().is_negative() {
        format!("{}/{}", -q.numer(), -q.denom())
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}
