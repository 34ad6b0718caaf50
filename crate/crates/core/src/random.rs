//! Random generators for complexes, chain maps, homotopies and
//! quasi-isomorphisms, used by the property and acceptance suites.
//!
//! Chain maps are drawn from the full solution space of the commuting
//! conditions, and quasi-isomorphisms are built so that they are
//! quasi-isomorphisms by construction: a homotopy perturbation of the
//! identity composed with the inclusion of `M` into `M ⊕ MC(id_P)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;

use crate::chainmap::{perturb_by_homotopy, ChainMap, Homotopy};
use crate::complex::{window_union, CochainComplex};
use crate::cone::mapping_cone;
use crate::exactlin::{FieldSpec, Matrix};

/// Shape limits for generated complexes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shape {
    pub lo: i64,
    pub hi: i64,
    pub max_dim: usize,
}

impl Shape {
    pub fn new(lo: i64, hi: i64, max_dim: usize) -> Self {
        assert!(lo <= hi);
        Shape { lo, hi, max_dim }
    }
}

fn scalar<R: Rng + ?Sized>(rng: &mut R, field: FieldSpec) -> i64 {
    match field.modulus() {
        Some(p) => rng.gen_range(0..p as i64),
        None => rng.gen_range(-3..=3),
    }
}

/// Uniform entries in `F_p`, or small integers in `[-3, 3]` over `Q`.
pub fn random_matrix<R: Rng + ?Sized>(
    rng: &mut R,
    field: FieldSpec,
    rows: usize,
    cols: usize,
) -> Matrix {
    let entries: Vec<i64> = (0..rows * cols).map(|_| scalar(rng, field)).collect();
    Matrix::from_i64(field, rows, cols, &entries).expect("length matches")
}

/// A random matrix of rank at most `rank`.
fn random_low_rank<R: Rng + ?Sized>(
    rng: &mut R,
    field: FieldSpec,
    rows: usize,
    cols: usize,
    rank: usize,
) -> Matrix {
    random_matrix(rng, field, rows, rank)
        .mul(&random_matrix(rng, field, rank, cols))
        .expect("conformable")
}

/// A valid complex with dimensions in `0..=max_dim` over `[lo, hi]`.
///
/// Each `d^i` is a random low-rank map precomposed with a projection that
/// kills `im d^{i-1}`, so `d∘d = 0` holds by construction.
pub fn random_complex<R: Rng + ?Sized>(rng: &mut R, field: FieldSpec, shape: Shape) -> CochainComplex {
    let dims: BTreeMap<i64, usize> = (shape.lo..=shape.hi)
        .map(|i| (i, rng.gen_range(0..=shape.max_dim)))
        .collect();
    let dim = |i: i64| dims.get(&i).copied().unwrap_or(0);
    let mut diffs = BTreeMap::new();
    let mut prev = Matrix::zeros(field, dim(shape.lo), 0);
    for i in shape.lo..shape.hi {
        // rows of `coker` span the functionals vanishing on im d^{i-1}
        let coker = prev.transpose().kernel_basis().transpose();
        let rank = rng.gen_range(0..=coker.rows().min(dim(i + 1)));
        let d = random_low_rank(rng, field, dim(i + 1), coker.rows(), rank)
            .mul(&coker)
            .expect("conformable");
        diffs.insert(i, d.clone());
        prev = d;
    }
    CochainComplex::new(field, &dims, diffs).expect("shapes by construction")
}

/// A chain map `a -> b` drawn from the solution space of `d_B f = f d_A`.
pub fn random_chain_map<R: Rng + ?Sized>(
    rng: &mut R,
    a: &Arc<CochainComplex>,
    b: &Arc<CochainComplex>,
) -> ChainMap {
    let field = a.field();
    let (lo, hi) = window_union(a, b);
    let blocks: Vec<(i64, usize, usize)> = (lo..=hi)
        .map(|i| (i, b.dim(i), a.dim(i)))
        .filter(|&(_, r, c)| r * c > 0)
        .collect();
    let n: usize = blocks.iter().map(|&(_, r, c)| r * c).sum();
    if n == 0 {
        return ChainMap::zero(a.clone(), b.clone()).expect("same field");
    }

    // vec(d_B^i f^i) - vec(f^{i+1} d_A^i) = 0 for every degree
    let mut rows = Vec::new();
    for i in lo - 1..=hi {
        let (r, c) = (b.dim(i + 1), a.dim(i));
        if r * c == 0 {
            continue;
        }
        let parts: Vec<Matrix> = blocks
            .iter()
            .map(|&(j, br, bc)| {
                if j == i {
                    b.diff(i).kron(&Matrix::identity(field, bc)).expect("same field")
                } else if j == i + 1 {
                    Matrix::identity(field, br)
                        .kron(&a.diff(i).transpose())
                        .expect("same field")
                        .neg()
                } else {
                    Matrix::zeros(field, r * c, br * bc)
                }
            })
            .collect();
        rows.push(Matrix::hstack(&parts.iter().collect::<Vec<_>>()).expect("same height"));
    }
    let system = if rows.is_empty() {
        Matrix::zeros(field, 0, n)
    } else {
        Matrix::vstack(&rows.iter().collect::<Vec<_>>()).expect("same width")
    };
    let basis = system.kernel_basis();
    let coeffs = random_matrix(rng, field, basis.cols(), 1);
    let x = basis.mul(&coeffs).expect("conformable");

    let mut components = BTreeMap::new();
    let mut offset = 0;
    for &(j, r, c) in &blocks {
        let idx: Vec<usize> = (offset..offset + r * c).collect();
        components.insert(j, x.select_rows(&idx).reshape(r, c));
        offset += r * c;
    }
    let f = ChainMap::new(a.clone(), b.clone(), components).expect("shapes by construction");
    debug_assert!(f.validate().is_ok());
    f
}

/// Arbitrary degree `-1` maps `k^i : A^i -> B^{i-1}`.
pub fn random_homotopy<R: Rng + ?Sized>(
    rng: &mut R,
    a: &Arc<CochainComplex>,
    b: &Arc<CochainComplex>,
) -> Homotopy {
    let field = a.field();
    let (lo, hi) = window_union(a, b);
    let components = (lo..=hi + 1)
        .map(|i| (i, random_matrix(rng, field, b.dim(i - 1), a.dim(i))))
        .collect();
    Homotopy::new(a.clone(), b.clone(), components).expect("shapes by construction")
}

/// A quasi-isomorphism out of `m` into `m ⊕ MC(id_P)` for a random `P`,
/// perturbed by a random homotopy. Returns the map; its target is the new complex.
pub fn random_quasi_iso_from<R: Rng + ?Sized>(
    rng: &mut R,
    m: &Arc<CochainComplex>,
    pad_shape: Shape,
) -> ChainMap {
    let field = m.field();
    let p = Arc::new(random_complex(rng, field, pad_shape));
    let pad = mapping_cone(&ChainMap::identity(p)).expect("identity is a chain map").cone;
    let target = Arc::new(m.direct_sum(&pad).expect("same field"));

    let (lo, hi) = window_union(m, &target);
    let incl_components = (lo..=hi)
        .filter(|&i| m.dim(i) > 0)
        .map(|i| {
            let id = Matrix::identity(field, m.dim(i));
            let below = Matrix::zeros(field, pad.dim(i), m.dim(i));
            (i, Matrix::vstack(&[&id, &below]).expect("same width"))
        })
        .collect();
    let incl = ChainMap::new(m.clone(), target.clone(), incl_components).expect("shapes");

    let k = random_homotopy(rng, &target, &target);
    let auto = perturb_by_homotopy(&ChainMap::identity(target.clone()), &k).expect("same ends");
    auto.after(&incl).expect("composable")
}

/// A quasi-isomorphism that is a homotopy perturbation of the identity on `c`.
pub fn random_self_quasi_iso<R: Rng + ?Sized>(rng: &mut R, c: &Arc<CochainComplex>) -> ChainMap {
    let k = random_homotopy(rng, c, c);
    perturb_by_homotopy(&ChainMap::identity(c.clone()), &k).expect("same ends")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn generated_objects_are_valid() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let f5 = FieldSpec::prime(5).unwrap();
        for field in [f5, FieldSpec::rational()] {
            for _ in 0..30 {
                let shape = Shape::new(-2, 2, 3);
                let a = Arc::new(random_complex(&mut rng, field, shape));
                let b = Arc::new(random_complex(&mut rng, field, shape));
                assert!(a.validate().is_ok());
                let f = random_chain_map(&mut rng, &a, &b);
                assert!(f.validate().is_ok());
                let q = random_quasi_iso_from(&mut rng, &a, Shape::new(-1, 1, 2));
                assert!(q.is_quasi_iso().unwrap());
            }
        }
    }
}
