//! Bounded cochain complexes and their cohomology.
//!
//! A complex stores its dimensions over a tight support window `[lo, hi]`
//! (boundary degrees of dimension zero are trimmed at construction) and only
//! its nonzero differentials. Both choices make structural equality coincide
//! with equality of the underlying data.

use std::borrow::Cow;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exactlin::{FieldSpec, Matrix};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CochainComplex {
    field: FieldSpec,
    lo: i64,
    dims: Vec<usize>,
    diffs: BTreeMap<i64, Matrix>,
}

/// First degree `i` at which `d^{i+1} · d^i` fails to vanish.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DifferentialDefect {
    pub degree: i64,
    pub product: Matrix,
}

impl CochainComplex {
    /// Builds a complex from degree-indexed dimensions and differentials.
    /// Missing degrees are zero. `diffs[i]` must have shape `dims[i+1] x dims[i]`.
    /// Only shapes are checked here; `d∘d = 0` is checked by [`Self::validate`].
    pub fn new(
        field: FieldSpec,
        dims: &BTreeMap<i64, usize>,
        diffs: BTreeMap<i64, Matrix>,
    ) -> Result<Self> {
        let support: Vec<i64> = dims.iter().filter(|(_, &n)| n > 0).map(|(&i, _)| i).collect();
        let (lo, dense) = match (support.first(), support.last()) {
            (Some(&lo), Some(&hi)) => (
                lo,
                (lo..=hi).map(|i| dims.get(&i).copied().unwrap_or(0)).collect(),
            ),
            _ => (0, vec![0]),
        };
        let mut c = CochainComplex {
            field,
            lo,
            dims: dense,
            diffs: BTreeMap::new(),
        };
        for (i, m) in diffs {
            if m.field() != field {
                return Err(Error::FieldMismatch {
                    left: field,
                    right: m.field(),
                });
            }
            let want = (c.dim(i + 1), c.dim(i));
            if m.shape() != want {
                return Err(Error::DegreeShape {
                    degree: i,
                    what: format!(
                        "differential is {}x{}, expected {}x{}",
                        m.rows(),
                        m.cols(),
                        want.0,
                        want.1
                    ),
                });
            }
            if !m.is_zero() {
                c.diffs.insert(i, m);
            }
        }
        Ok(c)
    }

    pub fn zero(field: FieldSpec) -> Self {
        CochainComplex {
            field,
            lo: 0,
            dims: vec![0],
            diffs: BTreeMap::new(),
        }
    }

    /// A single space `F^n` sitting in degree `degree`.
    pub fn concentrated(field: FieldSpec, degree: i64, n: usize) -> Self {
        CochainComplex::new(field, &BTreeMap::from([(degree, n)]), BTreeMap::new())
            .expect("no differentials to check")
    }

    /// The two-term complex `F^n --id--> F^n` in degrees `degree, degree + 1`.
    pub fn contractible(field: FieldSpec, degree: i64, n: usize) -> Self {
        CochainComplex::new(
            field,
            &BTreeMap::from([(degree, n), (degree + 1, n)]),
            BTreeMap::from([(degree, Matrix::identity(field, n))]),
        )
        .expect("identity has the right shape")
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.dims.len() as i64 - 1
    }

    pub fn is_zero(&self) -> bool {
        self.dims.iter().all(|&n| n == 0)
    }

    pub fn dim(&self, i: i64) -> usize {
        if i < self.lo || i > self.hi() {
            0
        } else {
            self.dims[(i - self.lo) as usize]
        }
    }

    /// Nonzero dimensions in ascending degree.
    pub fn dims(&self) -> BTreeMap<i64, usize> {
        (self.lo..=self.hi())
            .map(|i| (i, self.dim(i)))
            .filter(|&(_, n)| n > 0)
            .collect()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    /// `d^i : C^i -> C^{i+1}`, zero when not stored.
    pub fn diff(&self, i: i64) -> Cow<'_, Matrix> {
        match self.diffs.get(&i) {
            Some(m) => Cow::Borrowed(m),
            None => Cow::Owned(Matrix::zeros(self.field, self.dim(i + 1), self.dim(i))),
        }
    }

    /// The stored (nonzero) differentials in ascending degree.
    pub fn nonzero_diffs(&self) -> impl Iterator<Item = (i64, &Matrix)> {
        self.diffs.iter().map(|(&i, m)| (i, m))
    }

    pub fn validate(&self) -> std::result::Result<(), DifferentialDefect> {
        for (&i, d) in &self.diffs {
            if let Some(next) = self.diffs.get(&(i + 1)) {
                let product = next.mul(d).expect("shapes checked at construction");
                if !product.is_zero() {
                    return Err(DifferentialDefect { degree: i, product });
                }
            }
        }
        Ok(())
    }

    pub(crate) fn ensure_valid(&self) -> Result<()> {
        self.validate()
            .map_err(|e| Error::NotAComplex { degree: e.degree })
    }

    /// `C[n]`: `C[n]^i = C^{i+n}` with differential `(-1)^n d^{i+n}`.
    pub fn shift(&self, n: i64) -> CochainComplex {
        let diffs = self
            .diffs
            .iter()
            .map(|(&i, m)| (i - n, if n % 2 == 0 { m.clone() } else { m.neg() }))
            .collect();
        CochainComplex {
            field: self.field,
            lo: if self.is_zero() { 0 } else { self.lo - n },
            dims: self.dims.clone(),
            diffs,
        }
    }

    /// Degreewise direct sum with block-diagonal differentials, `self` first.
    pub fn direct_sum(&self, other: &CochainComplex) -> Result<CochainComplex> {
        if self.field != other.field {
            return Err(Error::FieldMismatch {
                left: self.field,
                right: other.field,
            });
        }
        let (lo, hi) = window_union(self, other);
        let dims = (lo..=hi).map(|i| (i, self.dim(i) + other.dim(i))).collect();
        let diffs = (lo - 1..=hi)
            .map(|i| Ok((i, self.diff(i).block_diag(&other.diff(i))?)))
            .collect::<Result<_>>()?;
        CochainComplex::new(self.field, &dims, diffs)
    }

    /// Alternating sum of dimensions.
    pub fn euler_characteristic(&self) -> i64 {
        (self.lo..=self.hi())
            .map(|i| sign(i) * self.dim(i) as i64)
            .sum()
    }

    /// `H^i = ker d^i / im d^{i-1}` with its canonical basis.
    pub fn cohomology(&self, i: i64) -> Result<CohomologySpace> {
        self.ensure_valid()?;
        Ok(self.cohomology_unchecked(i))
    }

    pub(crate) fn cohomology_unchecked(&self, i: i64) -> CohomologySpace {
        let cocycles = self.diff(i).kernel_basis();
        let z = cocycles.cols();
        let boundaries = self.diff(i - 1);
        let coords = cocycles
            .solve(&boundaries)
            .expect("shapes agree")
            .expect("image of d^{i-1} lies in ker d^i");
        let (echelon, pivots) = coords.transpose().rref();
        let rep_columns: Vec<usize> = (0..z).filter(|c| !pivots.contains(c)).collect();

        // y = x - sum_t x[pivot_t] * echelon_row_t clears the pivot coordinates;
        // the remaining coordinates of y are the class of x.
        let field = self.field;
        let pivot_rows: Vec<usize> = (0..pivots.len()).collect();
        let clearing = echelon
            .select_rows(&pivot_rows)
            .transpose()
            .mul(&Matrix::identity(field, z).select_rows(&pivots))
            .expect("conformable");
        let projection = Matrix::identity(field, z)
            .sub(&clearing)
            .expect("square")
            .select_rows(&rep_columns);

        CohomologySpace {
            degree: i,
            dim: rep_columns.len(),
            cocycle_basis: cocycles,
            rep_columns,
            projection,
        }
    }

    /// `dim H^i`, computed from ranks.
    pub fn cohomology_dim(&self, i: i64) -> Result<usize> {
        self.ensure_valid()?;
        Ok(self.dim(i) - self.diff(i).rank() - self.diff(i - 1).rank())
    }

    /// `dim H^i` for every degree of the window.
    pub fn betti(&self) -> Result<BTreeMap<i64, usize>> {
        self.ensure_valid()?;
        Ok((self.lo..=self.hi())
            .map(|i| (i, self.dim(i) - self.diff(i).rank() - self.diff(i - 1).rank()))
            .collect())
    }

    pub fn is_acyclic(&self) -> Result<bool> {
        Ok(self.betti()?.values().all(|&h| h == 0))
    }
}

/// A cohomology group in its canonical basis.
///
/// The basis of `H^i` is the set of cocycle-basis columns listed in
/// `rep_columns`; `projection` takes cocycle coordinates to coordinates in
/// that basis and kills boundaries.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CohomologySpace {
    pub degree: i64,
    pub dim: usize,
    pub cocycle_basis: Matrix,
    pub rep_columns: Vec<usize>,
    pub projection: Matrix,
}

impl CohomologySpace {
    /// Representative cocycles as columns in the ambient space.
    pub fn representatives(&self) -> Matrix {
        self.cocycle_basis.select_cols(&self.rep_columns)
    }
}

pub fn validate_complex(c: &CochainComplex) -> std::result::Result<(), DifferentialDefect> {
    c.validate()
}

pub fn shift(c: &CochainComplex, n: i64) -> CochainComplex {
    c.shift(n)
}

pub fn direct_sum_complex(a: &CochainComplex, b: &CochainComplex) -> Result<CochainComplex> {
    a.direct_sum(b)
}

pub fn cohomology(c: &CochainComplex, i: i64) -> Result<CohomologySpace> {
    c.cohomology(i)
}

pub fn is_acyclic(c: &CochainComplex) -> Result<bool> {
    c.is_acyclic()
}

pub(crate) fn window_union(a: &CochainComplex, b: &CochainComplex) -> (i64, i64) {
    match (a.is_zero(), b.is_zero()) {
        (true, true) => (0, 0),
        (true, false) => (b.lo(), b.hi()),
        (false, true) => (a.lo(), a.hi()),
        (false, false) => (a.lo().min(b.lo()), a.hi().max(b.hi())),
    }
}

pub(crate) fn sign(i: i64) -> i64 {
    if i.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> FieldSpec {
        FieldSpec::prime(2).unwrap()
    }
    fn f5() -> FieldSpec {
        FieldSpec::prime(5).unwrap()
    }

    fn two_term(field: FieldSpec) -> CochainComplex {
        CochainComplex::contractible(field, 0, 1)
    }

    #[test]
    fn construction_trims_window() {
        let c = CochainComplex::new(
            f5(),
            &BTreeMap::from([(-2, 0), (0, 1), (1, 0), (2, 3), (4, 0)]),
            BTreeMap::new(),
        )
        .unwrap();
        assert_eq!((c.lo(), c.hi()), (0, 2));
        assert_eq!(c.dims(), BTreeMap::from([(0, 1), (2, 3)]));
        assert_eq!(c.diff(1).shape(), (3, 0));
        assert_eq!(c.diff(7).shape(), (0, 0));
    }

    #[test]
    fn construction_rejects_bad_shapes() {
        let err = CochainComplex::new(
            f5(),
            &BTreeMap::from([(0, 2), (1, 1)]),
            BTreeMap::from([(0, Matrix::identity(f5(), 2))]),
        );
        assert!(matches!(err, Err(Error::DegreeShape { degree: 0, .. })));
        let err = CochainComplex::new(
            f5(),
            &BTreeMap::from([(0, 1), (1, 1)]),
            BTreeMap::from([(0, Matrix::identity(f2(), 1))]),
        );
        assert!(matches!(err, Err(Error::FieldMismatch { .. })));
    }

    #[test]
    fn validate_examples() {
        assert!(CochainComplex::zero(f5()).validate().is_ok());
        assert!(two_term(f5()).validate().is_ok());

        let c = CochainComplex::new(
            f2(),
            &BTreeMap::from([(0, 2), (1, 2), (2, 1)]),
            BTreeMap::from([
                (0, Matrix::identity(f2(), 2)),
                (1, Matrix::from_rows(f2(), &[&[1, 1]]).unwrap()),
            ]),
        )
        .unwrap();
        let defect = c.validate().unwrap_err();
        assert_eq!(defect.degree, 0);
        assert_eq!(defect.product, Matrix::from_rows(f2(), &[&[1, 1]]).unwrap());
        assert!(matches!(c.cohomology(0), Err(Error::NotAComplex { degree: 0 })));
    }

    #[test]
    fn shift_examples() {
        let c = two_term(f5());
        assert_eq!(c.shift(0), c);
        let s = c.shift(1);
        assert_eq!((s.lo(), s.hi()), (-1, 0));
        assert_eq!(s.diff(-1).into_owned(), Matrix::from_rows(f5(), &[&[-1]]).unwrap());
        assert_eq!(c.shift(1).shift(-1), c);
        assert_eq!(c.shift(2).diff(-2).into_owned(), Matrix::identity(f5(), 1));
        assert_eq!(CochainComplex::zero(f5()).shift(3), CochainComplex::zero(f5()));
    }

    #[test]
    fn direct_sum_examples() {
        let a = two_term(f5());
        assert_eq!(a.direct_sum(&CochainComplex::zero(f5())).unwrap(), a);

        let p = CochainComplex::concentrated(f5(), 0, 1);
        let pp = p.direct_sum(&p).unwrap();
        assert_eq!(pp.dims(), BTreeMap::from([(0, 2)]));
        assert_eq!(pp.nonzero_diffs().count(), 0);

        let a = CochainComplex::new(f5(), &BTreeMap::from([(0, 1), (1, 2)]), BTreeMap::new())
            .unwrap();
        let b = CochainComplex::concentrated(f5(), 1, 1);
        assert_eq!(a.direct_sum(&b).unwrap().dims(), BTreeMap::from([(0, 1), (1, 3)]));
        assert!(a.direct_sum(&CochainComplex::zero(f2())).is_err());
    }

    #[test]
    fn cohomology_examples() {
        let c = CochainComplex::concentrated(f5(), 0, 3);
        let h = c.cohomology(0).unwrap();
        assert_eq!(h.dim, 3);
        assert_eq!(h.projection, Matrix::identity(f5(), 3));

        let c = two_term(f5());
        assert_eq!(c.cohomology(0).unwrap().dim, 0);
        assert_eq!(c.cohomology(1).unwrap().dim, 0);

        // F2^2 --[1 1]--> F2: kernel {0, (1,1)}, image everything
        let c = CochainComplex::new(
            f2(),
            &BTreeMap::from([(0, 2), (1, 1)]),
            BTreeMap::from([(0, Matrix::from_rows(f2(), &[&[1, 1]]).unwrap())]),
        )
        .unwrap();
        let h0 = c.cohomology(0).unwrap();
        assert_eq!(h0.dim, 1);
        assert_eq!(h0.representatives(), Matrix::from_rows(f2(), &[&[1], &[1]]).unwrap());
        assert_eq!(c.cohomology(1).unwrap().dim, 0);
    }

    #[test]
    fn projection_kills_boundaries() {
        // F^1 --(1,1)^T--> F^2 --0--> ...: H^1 is one dimensional.
        let q = FieldSpec::rational();
        let c = CochainComplex::new(
            q,
            &BTreeMap::from([(0, 1), (1, 2)]),
            BTreeMap::from([(0, Matrix::from_rows(q, &[&[1], &[1]]).unwrap())]),
        )
        .unwrap();
        let h = c.cohomology(1).unwrap();
        assert_eq!(h.dim, 1);
        let coords = h.cocycle_basis.solve(&c.diff(0)).unwrap().unwrap();
        assert!(h.projection.mul(&coords).unwrap().is_zero());
        assert_eq!(h.rep_columns, vec![1]);
    }

    #[test]
    fn acyclic_examples() {
        assert!(CochainComplex::zero(f5()).is_acyclic().unwrap());
        assert!(two_term(f5()).is_acyclic().unwrap());
        assert!(!CochainComplex::concentrated(f5(), 0, 1).is_acyclic().unwrap());
    }
}
