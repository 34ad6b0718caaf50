//! Chain maps, homotopies between them, and the maps they induce on cohomology.
//!
//! Two chain maps are equal in the homotopy category exactly when
//! [`find_homotopy`] returns a witness. The search assembles one linear
//! system over all degrees at once: the unknown `k^{i+1}` appears both in the
//! equation at degree `i` (through `k^{i+1} d^i`) and at degree `i + 1`
//! (through `d^i k^{i+1}`), so degrees cannot be solved independently.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::sync::Arc;

use crate::complex::{window_union, CochainComplex};
use crate::error::{Error, Result};
use crate::exactlin::{FieldSpec, Matrix};

/// A degreewise collection of matrices `f^i : A^i -> B^i`.
///
/// Construction checks shapes only; whether the squares commute is reported
/// by [`ChainMap::validate`]. Zero components are not stored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ChainMap {
    source: Arc<CochainComplex>,
    target: Arc<CochainComplex>,
    components: BTreeMap<i64, Matrix>,
}

/// First degree where `d_B^i f^i != f^{i+1} d_A^i`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SquareDefect {
    pub degree: i64,
    /// `d_B^i · f^i`
    pub lhs: Matrix,
    /// `f^{i+1} · d_A^i`
    pub rhs: Matrix,
}

pub(crate) fn same_complex(a: &Arc<CochainComplex>, b: &Arc<CochainComplex>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

fn check_components(
    field: FieldSpec,
    components: BTreeMap<i64, Matrix>,
    shape: impl Fn(i64) -> (usize, usize),
) -> Result<BTreeMap<i64, Matrix>> {
    let mut out = BTreeMap::new();
    for (i, m) in components {
        if m.field() != field {
            return Err(Error::FieldMismatch {
                left: field,
                right: m.field(),
            });
        }
        let want = shape(i);
        if m.shape() != want {
            return Err(Error::DegreeShape {
                degree: i,
                what: format!(
                    "component is {}x{}, expected {}x{}",
                    m.rows(),
                    m.cols(),
                    want.0,
                    want.1
                ),
            });
        }
        if !m.is_zero() {
            out.insert(i, m);
        }
    }
    Ok(out)
}

impl ChainMap {
    pub fn new(
        source: Arc<CochainComplex>,
        target: Arc<CochainComplex>,
        components: BTreeMap<i64, Matrix>,
    ) -> Result<Self> {
        if source.field() != target.field() {
            return Err(Error::FieldMismatch {
                left: source.field(),
                right: target.field(),
            });
        }
        let components = check_components(source.field(), components, |i| {
            (target.dim(i), source.dim(i))
        })?;
        Ok(ChainMap {
            source,
            target,
            components,
        })
    }

    pub fn identity(c: Arc<CochainComplex>) -> Self {
        let components = (c.lo()..=c.hi())
            .filter(|&i| c.dim(i) > 0)
            .map(|i| (i, Matrix::identity(c.field(), c.dim(i))))
            .collect();
        ChainMap {
            source: c.clone(),
            target: c,
            components,
        }
    }

    pub fn zero(source: Arc<CochainComplex>, target: Arc<CochainComplex>) -> Result<Self> {
        ChainMap::new(source, target, BTreeMap::new())
    }

    pub fn source(&self) -> &Arc<CochainComplex> {
        &self.source
    }

    pub fn target(&self) -> &Arc<CochainComplex> {
        &self.target
    }

    pub fn field(&self) -> FieldSpec {
        self.source.field()
    }

    pub fn component(&self, i: i64) -> Cow<'_, Matrix> {
        match self.components.get(&i) {
            Some(m) => Cow::Borrowed(m),
            None => Cow::Owned(Matrix::zeros(
                self.field(),
                self.target.dim(i),
                self.source.dim(i),
            )),
        }
    }

    /// Nonzero components in ascending degree.
    pub fn nonzero_components(&self) -> impl Iterator<Item = (i64, &Matrix)> {
        self.components.iter().map(|(&i, m)| (i, m))
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    /// Union of the source and target windows.
    pub fn window(&self) -> (i64, i64) {
        window_union(&self.source, &self.target)
    }

    pub fn validate(&self) -> std::result::Result<(), SquareDefect> {
        let (lo, hi) = self.window();
        for i in lo - 1..=hi {
            let lhs = self.target.diff(i).mul(&self.component(i)).expect("conformable");
            let rhs = self.component(i + 1).mul(&self.source.diff(i)).expect("conformable");
            if lhs != rhs {
                return Err(SquareDefect {
                    degree: i,
                    lhs,
                    rhs,
                });
            }
        }
        Ok(())
    }

    /// Checks both endpoint complexes and the commuting squares.
    pub(crate) fn ensure_valid(&self) -> Result<()> {
        self.source.ensure_valid()?;
        self.target.ensure_valid()?;
        self.validate()
            .map_err(|e| Error::NotAChainMap { degree: e.degree })
    }

    /// `self ∘ f`.
    pub fn after(&self, f: &ChainMap) -> Result<ChainMap> {
        if !same_complex(&f.target, &self.source) {
            return Err(Error::ComplexMismatch("composition: middle objects differ"));
        }
        let mut components = BTreeMap::new();
        for (&i, fi) in &f.components {
            if let Some(gi) = self.components.get(&i) {
                components.insert(i, gi.mul(fi)?);
            }
        }
        ChainMap::new(f.source.clone(), self.target.clone(), components)
    }

    fn same_ends(&self, other: &ChainMap) -> Result<()> {
        if !same_complex(&self.source, &other.source) || !same_complex(&self.target, &other.target)
        {
            return Err(Error::ComplexMismatch("maps have different endpoints"));
        }
        Ok(())
    }

    fn combine(&self, other: &ChainMap, op: impl Fn(&Matrix, &Matrix) -> Result<Matrix>) -> Result<ChainMap> {
        self.same_ends(other)?;
        let (lo, hi) = self.window();
        let components = (lo..=hi)
            .map(|i| Ok((i, op(&self.component(i), &other.component(i))?)))
            .collect::<Result<_>>()?;
        ChainMap::new(self.source.clone(), self.target.clone(), components)
    }

    pub fn add(&self, other: &ChainMap) -> Result<ChainMap> {
        self.combine(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &ChainMap) -> Result<ChainMap> {
        self.combine(other, |a, b| a.sub(b))
    }

    pub fn neg(&self) -> ChainMap {
        ChainMap {
            source: self.source.clone(),
            target: self.target.clone(),
            components: self.components.iter().map(|(&i, m)| (i, m.neg())).collect(),
        }
    }

    /// `f[n] : A[n] -> B[n]` with components `f^{i+n}` (no sign).
    pub fn shift(&self, n: i64) -> ChainMap {
        ChainMap {
            source: Arc::new(self.source.shift(n)),
            target: Arc::new(self.target.shift(n)),
            components: self.components.iter().map(|(&i, m)| (i - n, m.clone())).collect(),
        }
    }

    /// Matrix of `H^i(f)` in the canonical cohomology bases.
    pub fn induced_cohomology_map(&self, i: i64) -> Result<Matrix> {
        self.ensure_valid()?;
        Ok(self.induced_unchecked(i))
    }

    pub(crate) fn induced_unchecked(&self, i: i64) -> Matrix {
        let hs = self.source.cohomology_unchecked(i);
        let ht = self.target.cohomology_unchecked(i);
        let images = self
            .component(i)
            .mul(&hs.representatives())
            .expect("conformable");
        let coords = ht
            .cocycle_basis
            .solve(&images)
            .expect("conformable")
            .expect("chain maps send cocycles to cocycles");
        ht.projection.mul(&coords).expect("conformable")
    }

    pub fn is_quasi_iso(&self) -> Result<bool> {
        self.ensure_valid()?;
        let (lo, hi) = self.window();
        Ok((lo..=hi).all(|i| self.induced_unchecked(i).is_invertible()))
    }
}

/// A degree `-1` collection `k^i : A^i -> B^{i-1}`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Homotopy {
    source: Arc<CochainComplex>,
    target: Arc<CochainComplex>,
    components: BTreeMap<i64, Matrix>,
}

impl Homotopy {
    pub fn new(
        source: Arc<CochainComplex>,
        target: Arc<CochainComplex>,
        components: BTreeMap<i64, Matrix>,
    ) -> Result<Self> {
        if source.field() != target.field() {
            return Err(Error::FieldMismatch {
                left: source.field(),
                right: target.field(),
            });
        }
        let components = check_components(source.field(), components, |i| {
            (target.dim(i - 1), source.dim(i))
        })?;
        Ok(Homotopy {
            source,
            target,
            components,
        })
    }

    pub fn zero(source: Arc<CochainComplex>, target: Arc<CochainComplex>) -> Result<Self> {
        Homotopy::new(source, target, BTreeMap::new())
    }

    pub fn source(&self) -> &Arc<CochainComplex> {
        &self.source
    }

    pub fn target(&self) -> &Arc<CochainComplex> {
        &self.target
    }

    pub fn field(&self) -> FieldSpec {
        self.source.field()
    }

    pub fn component(&self, i: i64) -> Cow<'_, Matrix> {
        match self.components.get(&i) {
            Some(m) => Cow::Borrowed(m),
            None => Cow::Owned(Matrix::zeros(
                self.field(),
                self.target.dim(i - 1),
                self.source.dim(i),
            )),
        }
    }

    pub fn nonzero_components(&self) -> impl Iterator<Item = (i64, &Matrix)> {
        self.components.iter().map(|(&i, m)| (i, m))
    }

    /// The null-homotopic chain map `d k + k d`.
    pub fn boundary(&self) -> ChainMap {
        let (lo, hi) = window_union(&self.source, &self.target);
        let components = (lo..=hi)
            .map(|i| {
                let dk = self.target.diff(i - 1).mul(&self.component(i)).expect("conformable");
                let kd = self.component(i + 1).mul(&self.source.diff(i)).expect("conformable");
                (i, dk.add(&kd).expect("same shape"))
            })
            .collect();
        ChainMap::new(self.source.clone(), self.target.clone(), components)
            .expect("shapes follow from the homotopy")
    }
}

pub fn validate_chain_map(f: &ChainMap) -> std::result::Result<(), SquareDefect> {
    f.validate()
}

/// `g ∘ f`.
pub fn compose_chain_maps(g: &ChainMap, f: &ChainMap) -> Result<ChainMap> {
    g.after(f)
}

fn homotopy_ends(f: &ChainMap, g: &ChainMap, k: &Homotopy) -> Result<()> {
    f.same_ends(g)?;
    if !same_complex(&k.source, &f.source) || !same_complex(&k.target, &f.target) {
        return Err(Error::ComplexMismatch("homotopy endpoints differ from the maps'"));
    }
    Ok(())
}

/// Whether `g - f = d k + k d` in every degree.
pub fn check_homotopy(f: &ChainMap, g: &ChainMap, k: &Homotopy) -> Result<bool> {
    homotopy_ends(f, g, k)?;
    Ok(g.sub(f)? == k.boundary())
}

/// `f + d k + k d`, which is homotopic to `f` through `k`.
pub fn perturb_by_homotopy(f: &ChainMap, k: &Homotopy) -> Result<ChainMap> {
    if !same_complex(&k.source, &f.source) || !same_complex(&k.target, &f.target) {
        return Err(Error::ComplexMismatch("homotopy endpoints differ from the map's"));
    }
    f.add(&k.boundary())
}

/// Decides whether `f` and `g` are homotopic, returning a witness `k` with
/// `g - f = d k + k d` when they are.
pub fn find_homotopy(f: &ChainMap, g: &ChainMap) -> Result<Option<Homotopy>> {
    f.same_ends(g)?;
    let (a, b) = (&f.source, &f.target);
    let field = f.field();
    let (lo, hi) = f.window();

    // unknown blocks k^j for j in lo..=hi+1, flattened row-major
    let unknowns: Vec<(i64, usize, usize)> = (lo..=hi + 1)
        .map(|j| (j, b.dim(j - 1), a.dim(j)))
        .filter(|&(_, r, c)| r * c > 0)
        .collect();
    let equations: Vec<(i64, usize, usize)> = (lo..=hi)
        .map(|i| (i, b.dim(i), a.dim(i)))
        .filter(|&(_, r, c)| r * c > 0)
        .collect();
    let n_unknowns: usize = unknowns.iter().map(|&(_, r, c)| r * c).sum();

    if equations.is_empty() {
        return Ok(Some(Homotopy::zero(a.clone(), b.clone())?));
    }

    let diff = g.sub(f)?;
    let mut block_rows = Vec::with_capacity(equations.len());
    let mut rhs_parts = Vec::with_capacity(equations.len());
    for &(i, rows, cols) in &equations {
        // vec(d_B^{i-1} k^i) = (d_B^{i-1} ⊗ I) vec(k^i)
        // vec(k^{i+1} d_A^i) = (I ⊗ (d_A^i)ᵀ) vec(k^{i+1})
        let blocks: Vec<Matrix> = unknowns
            .iter()
            .map(|&(j, r, c)| {
                if j == i {
                    b.diff(i - 1).kron(&Matrix::identity(field, cols))
                } else if j == i + 1 {
                    Matrix::identity(field, rows).kron(&a.diff(i).transpose())
                } else {
                    Ok(Matrix::zeros(field, rows * cols, r * c))
                }
            })
            .collect::<Result<_>>()?;
        let row = if blocks.is_empty() {
            Matrix::zeros(field, rows * cols, 0)
        } else {
            let refs: Vec<&Matrix> = blocks.iter().collect();
            Matrix::hstack(&refs)?
        };
        block_rows.push(row);
        rhs_parts.push(diff.component(i).reshape(rows * cols, 1));
    }
    let system = Matrix::vstack(&block_rows.iter().collect::<Vec<_>>())?;
    let rhs = Matrix::vstack(&rhs_parts.iter().collect::<Vec<_>>())?;
    debug_assert_eq!(system.cols(), n_unknowns);

    let Some(x) = system.solve(&rhs)? else {
        return Ok(None);
    };
    let mut components = BTreeMap::new();
    let mut offset = 0;
    for &(j, r, c) in &unknowns {
        let idx: Vec<usize> = (offset..offset + r * c).collect();
        components.insert(j, x.select_rows(&idx).reshape(r, c));
        offset += r * c;
    }
    let k = Homotopy::new(a.clone(), b.clone(), components)?;
    debug_assert!(check_homotopy(f, g, &k)?);
    Ok(Some(k))
}

pub fn induced_cohomology_map(f: &ChainMap, i: i64) -> Result<Matrix> {
    f.induced_cohomology_map(i)
}

pub fn is_quasi_iso(f: &ChainMap) -> Result<bool> {
    f.is_quasi_iso()
}

/// Whether `g ∘ f ~ id_A` via `k_a` and `f ∘ g ~ id_B` via `k_b`.
pub fn check_homotopy_equivalence(
    f: &ChainMap,
    g: &ChainMap,
    k_b: &Homotopy,
    k_a: &Homotopy,
) -> Result<bool> {
    let fg = f.after(g)?;
    let gf = g.after(f)?;
    let id_b = ChainMap::identity(f.target.clone());
    let id_a = ChainMap::identity(f.source.clone());
    Ok(check_homotopy(&fg, &id_b, k_b)? && check_homotopy(&gf, &id_a, k_a)?)
}
