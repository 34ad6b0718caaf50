//! Mapping cones and the triangles built from them.
//!
//! For `f : A -> B` the cone is `MC(f)^i = A^{i+1} ⊕ B^i`, always with the
//! `A`-block first, and differential
//!
//! ```text
//! d^i = [ -d_A^{i+1}      0   ]
//!       [  f^{i+1}      d_B^i ]
//! ```
//!
//! The roof construction indexes into these blocks directly, so the order must
//! never change.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::chainmap::{check_homotopy, same_complex, ChainMap, Homotopy};
use crate::complex::{window_union, CochainComplex};
use crate::error::{Error, Result};
use crate::exactlin::Matrix;

/// A mapping cone with its structure maps `B -> MC(f)` and `MC(f) -> A[1]`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Cone {
    pub cone: Arc<CochainComplex>,
    pub incl: ChainMap,
    pub proj: ChainMap,
}

pub fn mapping_cone(f: &ChainMap) -> Result<Cone> {
    f.ensure_valid()?;
    Ok(cone_unchecked(f))
}

pub(crate) fn cone_unchecked(f: &ChainMap) -> Cone {
    let field = f.field();
    let a1 = Arc::new(f.source().shift(1));
    let b = f.target();
    let (lo, hi) = window_union(&a1, b);

    let dims = (lo..=hi).map(|i| (i, a1.dim(i) + b.dim(i))).collect();
    let diffs = (lo - 1..=hi)
        .map(|i| {
            let upper_right = Matrix::zeros(field, a1.dim(i + 1), b.dim(i));
            let d = Matrix::from_blocks(&[
                &[&a1.diff(i), &upper_right],
                &[&f.component(i + 1), &b.diff(i)],
            ])
            .expect("cone blocks conform");
            (i, d)
        })
        .collect();
    let cone = Arc::new(CochainComplex::new(field, &dims, diffs).expect("cone shapes"));

    let incl = (lo..=hi)
        .filter(|&i| b.dim(i) > 0)
        .map(|i| {
            let top = Matrix::zeros(field, a1.dim(i), b.dim(i));
            let id = Matrix::identity(field, b.dim(i));
            (i, Matrix::vstack(&[&top, &id]).expect("same width"))
        })
        .collect();
    let proj = (lo..=hi)
        .filter(|&i| a1.dim(i) > 0)
        .map(|i| {
            let id = Matrix::identity(field, a1.dim(i));
            let right = Matrix::zeros(field, a1.dim(i), b.dim(i));
            (i, Matrix::hstack(&[&id, &right]).expect("same height"))
        })
        .collect();

    Cone {
        incl: ChainMap::new(b.clone(), cone.clone(), incl).expect("inclusion shapes"),
        proj: ChainMap::new(cone.clone(), a1, proj).expect("projection shapes"),
        cone,
    }
}

/// `X --f--> Y --g--> Z --h--> X[1]`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Triangle {
    f: ChainMap,
    g: ChainMap,
    h: ChainMap,
}

impl Triangle {
    pub fn new(f: ChainMap, g: ChainMap, h: ChainMap) -> Result<Self> {
        if !same_complex(f.target(), g.source()) {
            return Err(Error::ComplexMismatch("triangle: target of f is not source of g"));
        }
        if !same_complex(g.target(), h.source()) {
            return Err(Error::ComplexMismatch("triangle: target of g is not source of h"));
        }
        if **h.target() != f.source().shift(1) {
            return Err(Error::ComplexMismatch("triangle: target of h is not X[1]"));
        }
        Ok(Triangle { f, g, h })
    }

    pub fn f(&self) -> &ChainMap {
        &self.f
    }

    pub fn g(&self) -> &ChainMap {
        &self.g
    }

    pub fn h(&self) -> &ChainMap {
        &self.h
    }
}

/// `(f, incl, proj)` for the cone of `f`.
pub fn cone_triangle(f: &ChainMap) -> Result<Triangle> {
    let c = mapping_cone(f)?;
    Triangle::new(f.clone(), c.incl, c.proj)
}

/// `(f, g, h) ↦ (g, h, -f[1])`.
pub fn rotate_triangle(t: &Triangle) -> Result<Triangle> {
    Triangle::new(t.g.clone(), t.h.clone(), t.f.shift(1).neg())
}

/// Whether `H(X) -> H(Y) -> H(Z) -> H(X[1]) -> ...` is exact at every node.
///
/// `H^i(X[1])` and `H^{i+1}(X)` have the same canonical basis (the
/// differentials differ by a sign only), so consecutive induced matrices
/// compose directly.
pub fn check_les_exact(t: &Triangle) -> Result<bool> {
    for m in [&t.f, &t.g, &t.h] {
        m.ensure_valid()?;
    }
    let (x, y, z) = (t.f.source(), t.g.source(), t.h.source());
    let (lo1, hi1) = window_union(x, y);
    let (lo2, hi2) = window_union(y, z);
    let (lo, hi) = (lo1.min(lo2) - 1, hi1.max(hi2) + 1);

    let mut seq = Vec::with_capacity(3 * (hi - lo + 1) as usize);
    for i in lo..=hi {
        seq.push(t.f.induced_unchecked(i));
        seq.push(t.g.induced_unchecked(i));
        seq.push(t.h.induced_unchecked(i));
    }
    Ok(seq.windows(2).all(|w| exact_at(&w[0], &w[1])))
}

/// Exactness of `P --u--> Q --v--> R` at `Q`.
fn exact_at(u: &Matrix, v: &Matrix) -> bool {
    debug_assert_eq!(u.rows(), v.cols());
    v.mul(u).expect("conformable").is_zero() && u.rank() + v.rank() == v.cols()
}

/// Given `k1 : X -> X'` and `k2 : Y -> Y'` with `k2 f1 = f2 k1` (or
/// `k2 f1 - f2 k1 = d s + s d` for the supplied `s`), returns the induced
/// `k3 : MC(f1) -> MC(f2)`, `k3^i = [[k1^{i+1}, 0], [s^{i+1}, k2^i]]`.
pub fn complete_triangle_morphism(
    f1: &ChainMap,
    f2: &ChainMap,
    k1: &ChainMap,
    k2: &ChainMap,
    s: Option<&Homotopy>,
) -> Result<ChainMap> {
    if !same_complex(k1.source(), f1.source()) || !same_complex(k1.target(), f2.source()) {
        return Err(Error::ComplexMismatch("k1 must map source(f1) to source(f2)"));
    }
    if !same_complex(k2.source(), f1.target()) || !same_complex(k2.target(), f2.target()) {
        return Err(Error::ComplexMismatch("k2 must map target(f1) to target(f2)"));
    }
    let via_top = k2.after(f1)?;
    let via_bottom = f2.after(k1)?;
    let witnessed = match s {
        None => via_top == via_bottom,
        Some(s) => check_homotopy(&via_bottom, &via_top, s)?,
    };
    if !witnessed {
        return Err(Error::UnwitnessedSquare);
    }

    let c1 = mapping_cone(f1)?;
    let c2 = mapping_cone(f2)?;
    let field = f1.field();
    let (lo, hi) = window_union(&c1.cone, &c2.cone);
    let (x, y1) = (f1.source(), f2.target());
    let components: BTreeMap<i64, Matrix> = (lo..=hi)
        .map(|i| {
            let s_block = match s {
                Some(s) => s.component(i + 1).into_owned(),
                None => Matrix::zeros(field, y1.dim(i), x.dim(i + 1)),
            };
            let upper_right = Matrix::zeros(field, k1.target().dim(i + 1), k2.source().dim(i));
            let m = Matrix::from_blocks(&[
                &[&k1.component(i + 1), &upper_right],
                &[&s_block, &k2.component(i)],
            ])
            .expect("blocks conform");
            (i, m)
        })
        .collect();
    ChainMap::new(c1.cone, c2.cone, components)
}
