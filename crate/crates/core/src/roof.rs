//! Roofs `A <-f- B' -g-> B` with `f` a quasi-isomorphism, representing
//! `g ∘ f⁻¹` in the localization of the homotopy category.
//!
//! The central construction is [`flip_cospan`]: given `α : L -> K̄` and a
//! quasi-isomorphism `β : M -> K̄`, it builds
//!
//! ```text
//! K = MC(γ)[-1],  γ = incl ∘ α : L -> MC(β),  K^i = L^i ⊕ M^i ⊕ K̄^{i-1}
//! ```
//!
//! together with `γ₂ : K -> L` (first projection, a quasi-isomorphism),
//! `γ₁ : K -> M` (minus the second projection) and the homotopy
//! `h : (l, m, k̄) ↦ -k̄` between `β γ₁` and `α γ₂`. Composition of roofs
//! flips the middle cospan.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::chainmap::{check_homotopy, find_homotopy, same_complex, ChainMap, Homotopy};
use crate::complex::CochainComplex;
use crate::cone::cone_unchecked;
use crate::error::{Error, Result};
use crate::exactlin::Matrix;

/// A span `A <-denom- apex -numer-> B` whose left leg is a quasi-isomorphism.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Roof {
    denom: ChainMap,
    numer: ChainMap,
}

impl Roof {
    pub fn new(denom: ChainMap, numer: ChainMap) -> Result<Self> {
        if !same_complex(denom.source(), numer.source()) {
            return Err(Error::ComplexMismatch("roof legs must share their source"));
        }
        numer.ensure_valid()?;
        if !denom.is_quasi_iso()? {
            return Err(Error::NotQuasiIso("roof denominator"));
        }
        Ok(Roof { denom, numer })
    }

    pub fn apex(&self) -> &Arc<CochainComplex> {
        self.denom.source()
    }

    pub fn denom(&self) -> &ChainMap {
        &self.denom
    }

    pub fn numer(&self) -> &ChainMap {
        &self.numer
    }

    /// The object `A` the roof starts from.
    pub fn source(&self) -> &Arc<CochainComplex> {
        self.denom.target()
    }

    /// The object `B` the roof points to.
    pub fn target(&self) -> &Arc<CochainComplex> {
        self.numer.target()
    }
}

/// `L -α-> K̄ <-β- M` with `β` a quasi-isomorphism.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Cospan {
    alpha: ChainMap,
    beta: ChainMap,
}

impl Cospan {
    pub fn new(alpha: ChainMap, beta: ChainMap) -> Result<Self> {
        if !same_complex(alpha.target(), beta.target()) {
            return Err(Error::ComplexMismatch("cospan legs must share their target"));
        }
        alpha.ensure_valid()?;
        if !beta.is_quasi_iso()? {
            return Err(Error::NotQuasiIso("beta"));
        }
        Ok(Cospan { alpha, beta })
    }

    pub fn alpha(&self) -> &ChainMap {
        &self.alpha
    }

    pub fn beta(&self) -> &ChainMap {
        &self.beta
    }
}

/// The completed square `L <-γ₂- K -γ₁-> M` over a cospan, with `h`
/// witnessing `β γ₁ ~ α γ₂`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FlipResult {
    pub k_complex: Arc<CochainComplex>,
    pub gamma2: ChainMap,
    pub gamma1: ChainMap,
    pub witness: Homotopy,
}

/// Block selector `[0 .. ±I .. 0]` picking summand `which` out of `K^i`.
fn summand_selector(sizes: [usize; 3], which: usize, negate: bool, field: crate::FieldSpec) -> Matrix {
    let n = sizes[which];
    let blocks: Vec<Matrix> = (0..3)
        .map(|j| {
            if j == which {
                let id = Matrix::identity(field, n);
                if negate {
                    id.neg()
                } else {
                    id
                }
            } else {
                Matrix::zeros(field, n, sizes[j])
            }
        })
        .collect();
    Matrix::hstack(&blocks.iter().collect::<Vec<_>>()).expect("same height")
}

pub fn flip_cospan(c: &Cospan) -> Result<FlipResult> {
    let (alpha, beta) = (&c.alpha, &c.beta);
    let (l, m, kbar) = (alpha.source(), beta.source(), beta.target());
    let field = alpha.field();

    // K = MC(γ)[-1] with γ = incl_β ∘ α : L -> MC(β)
    let cone_beta = cone_unchecked(beta);
    debug_assert!(cone_beta.cone.is_acyclic().expect("cone of a chain map is a complex"));
    let gamma = cone_beta.incl.after(alpha)?;
    let k = Arc::new(cone_unchecked(&gamma).cone.shift(-1));

    let sizes = |i: i64| [l.dim(i), m.dim(i), kbar.dim(i - 1)];
    let (lo, hi) = (k.lo(), k.hi());
    let mut g2 = BTreeMap::new();
    let mut g1 = BTreeMap::new();
    let mut h = BTreeMap::new();
    for i in lo..=hi {
        let s = sizes(i);
        debug_assert_eq!(k.dim(i), s.iter().sum::<usize>());
        g2.insert(i, summand_selector(s, 0, false, field));
        g1.insert(i, summand_selector(s, 1, true, field));
        h.insert(i, summand_selector(s, 2, true, field));
    }
    let gamma2 = ChainMap::new(k.clone(), l.clone(), g2)?;
    let gamma1 = ChainMap::new(k.clone(), m.clone(), g1)?;
    let witness = Homotopy::new(k.clone(), kbar.clone(), h)?;

    let via_alpha = alpha.after(&gamma2)?;
    let via_beta = beta.after(&gamma1)?;

    // (α γ₂ - β γ₁)(l, m, k̄) = α(l) + β(m), before h enters
    let difference = via_alpha.sub(&via_beta)?;
    for i in lo..=hi {
        let s = sizes(i);
        let expect = Matrix::hstack(&[
            &alpha.component(i),
            &beta.component(i),
            &Matrix::zeros(field, kbar.dim(i), s[2]),
        ])?;
        assert_eq!(*difference.component(i), expect, "flip: α γ₂ - β γ₁ at degree {i}");
    }

    assert!(k.validate().is_ok(), "flip: K is not a complex");
    assert!(gamma1.validate().is_ok(), "flip: γ₁ is not a chain map");
    assert!(gamma2.validate().is_ok(), "flip: γ₂ is not a chain map");
    assert!(
        check_homotopy(&via_beta, &via_alpha, &witness)?,
        "flip: h does not witness β γ₁ ~ α γ₂"
    );
    assert!(gamma2.is_quasi_iso()?, "flip: γ₂ is not a quasi-isomorphism");

    Ok(FlipResult {
        k_complex: k,
        gamma2,
        gamma1,
        witness,
    })
}

/// `(f, g) ∘ (f', g')` realised as `(f ∘ f'', g' ∘ g'')` where
/// `(f'', g'')` flips the cospan `g, f'`.
pub fn compose_roofs(r1: &Roof, r2: &Roof) -> Result<Roof> {
    Ok(compose_roofs_with_flip(r1, r2)?.0)
}

/// As [`compose_roofs`], also returning the flip of the middle cospan.
pub fn compose_roofs_with_flip(r1: &Roof, r2: &Roof) -> Result<(Roof, FlipResult)> {
    if !same_complex(r1.target(), r2.source()) {
        return Err(Error::ComplexMismatch("roofs are not composable"));
    }
    let flip = flip_cospan(&Cospan::new(r1.numer.clone(), r2.denom.clone())?)?;
    let roof = Roof::new(r1.denom.after(&flip.gamma2)?, r2.numer.after(&flip.gamma1)?)?;
    Ok((roof, flip))
}

/// `f ↦ (id_A, f)`.
pub fn lift_map_to_roof(f: &ChainMap) -> Result<Roof> {
    f.ensure_valid()?;
    Roof::new(ChainMap::identity(f.source().clone()), f.clone())
}

/// Data for the diagram `B' <-up- B''' -down-> B''` with a third roof
/// `(denom3, numer3)` out of `B'''`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RoofEquivalenceWitness {
    pub apex3: Arc<CochainComplex>,
    pub denom3: ChainMap,
    pub numer3: ChainMap,
    pub up: ChainMap,
    pub down: ChainMap,
}

impl RoofEquivalenceWitness {
    /// The trivial witness `r ≡ r`.
    pub fn reflexive(r: &Roof) -> Self {
        let id = ChainMap::identity(r.apex().clone());
        RoofEquivalenceWitness {
            apex3: r.apex().clone(),
            denom3: r.denom.clone(),
            numer3: r.numer.clone(),
            up: id.clone(),
            down: id,
        }
    }

    /// Witness for `r ≡ lift(h)`, valid exactly when `h ∘ r.denom ~ r.numer`:
    /// the third roof is `r` itself, `up = id`, `down = r.denom`.
    pub fn against_lift(r: &Roof) -> Self {
        RoofEquivalenceWitness {
            apex3: r.apex().clone(),
            denom3: r.denom.clone(),
            numer3: r.numer.clone(),
            up: ChainMap::identity(r.apex().clone()),
            down: r.denom.clone(),
        }
    }
}

/// Whether `w` exhibits `r1` and `r2` as equivalent: `w.denom3` is a
/// quasi-isomorphism and all four triangles commute up to homotopy.
pub fn verify_roof_equivalence(r1: &Roof, r2: &Roof, w: &RoofEquivalenceWitness) -> Result<bool> {
    if !same_complex(r1.source(), r2.source()) || !same_complex(r1.target(), r2.target()) {
        return Err(Error::ComplexMismatch("roofs have different endpoints"));
    }
    let from_apex3 = [&w.denom3, &w.numer3, &w.up, &w.down];
    if from_apex3.iter().any(|m| !same_complex(m.source(), &w.apex3)) {
        return Err(Error::ComplexMismatch("witness maps must start at apex3"));
    }
    if !same_complex(w.up.target(), r1.apex()) || !same_complex(w.down.target(), r2.apex()) {
        return Err(Error::ComplexMismatch("witness up/down must land on the roof apexes"));
    }
    if !same_complex(w.denom3.target(), r1.source()) || !same_complex(w.numer3.target(), r1.target())
    {
        return Err(Error::ComplexMismatch("witness roof must span the same objects"));
    }
    for m in from_apex3 {
        m.ensure_valid()?;
    }
    if !w.denom3.is_quasi_iso()? {
        return Ok(false);
    }
    let checks = [
        (r1.denom.after(&w.up)?, &w.denom3),
        (r1.numer.after(&w.up)?, &w.numer3),
        (r2.denom.after(&w.down)?, &w.denom3),
        (r2.numer.after(&w.down)?, &w.numer3),
    ];
    for (lhs, rhs) in &checks {
        if find_homotopy(lhs, rhs)?.is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlin::FieldSpec;

    fn f5() -> FieldSpec {
        FieldSpec::prime(5).unwrap()
    }
    fn point() -> Arc<CochainComplex> {
        Arc::new(CochainComplex::concentrated(f5(), 0, 1))
    }

    #[test]
    fn flip_on_points() {
        let p = point();
        let id = ChainMap::identity(p.clone());
        let r = flip_cospan(&Cospan::new(id.clone(), id.clone()).unwrap()).unwrap();
        let k = &r.k_complex;
        assert_eq!(k.dims(), BTreeMap::from([(0, 2), (1, 1)]));
        assert_eq!(k.diff(0).into_owned(), Matrix::from_rows(f5(), &[&[-1, -1]]).unwrap());
        let h0 = k.cohomology(0).unwrap();
        assert_eq!(h0.dim, 1);
        // spans (1, -1); the canonical basis vector comes from the free column
        assert_eq!(h0.representatives(), Matrix::from_rows(f5(), &[&[-1], &[1]]).unwrap());
        assert!(r.gamma2.is_quasi_iso().unwrap());
        assert_eq!(r.witness.component(1).into_owned(), Matrix::from_rows(f5(), &[&[-1]]).unwrap());
        assert_eq!(r.witness.nonzero_components().count(), 1);
    }

    #[test]
    fn flip_dims() {
        let l = point();
        let m = Arc::new(CochainComplex::concentrated(f5(), 0, 2));
        let kbar = m.clone();
        let alpha = ChainMap::new(
            l.clone(),
            kbar.clone(),
            BTreeMap::from([(0, Matrix::from_rows(f5(), &[&[1], &[2]]).unwrap())]),
        )
        .unwrap();
        let beta = ChainMap::identity(m.clone());
        let r = flip_cospan(&Cospan::new(alpha, beta).unwrap()).unwrap();
        assert_eq!(r.k_complex.dims(), BTreeMap::from([(0, 3), (1, 2)]));
    }

    #[test]
    fn flip_with_zero_alpha() {
        let p = point();
        let alpha = ChainMap::zero(p.clone(), p.clone()).unwrap();
        let beta = ChainMap::identity(p.clone());
        let r = flip_cospan(&Cospan::new(alpha.clone(), beta.clone()).unwrap()).unwrap();
        let zero = ChainMap::zero(r.k_complex.clone(), p.clone()).unwrap();
        let bg1 = beta.after(&r.gamma1).unwrap();
        assert!(check_homotopy(&bg1, &zero, &r.witness).unwrap());
    }

    #[test]
    fn cospan_requires_quasi_iso() {
        let p = point();
        let z = ChainMap::zero(p.clone(), p.clone()).unwrap();
        assert!(matches!(Cospan::new(z.clone(), z), Err(Error::NotQuasiIso("beta"))));
    }

    #[test]
    fn lift_examples() {
        let p = point();
        let id = ChainMap::identity(p.clone());
        let r = lift_map_to_roof(&id).unwrap();
        assert_eq!(*r.denom(), id);
        assert_eq!(*r.numer(), id);
        let z = ChainMap::zero(p.clone(), p.clone()).unwrap();
        let r = lift_map_to_roof(&z).unwrap();
        assert_eq!(*r.numer(), z);
        assert!(r.denom().is_quasi_iso().unwrap());
    }

    #[test]
    fn compose_identity_lifts() {
        let a = Arc::new(CochainComplex::contractible(f5(), 0, 1).direct_sum(&point()).unwrap());
        let r = lift_map_to_roof(&ChainMap::identity(a.clone())).unwrap();
        let c = compose_roofs(&r, &r).unwrap();
        for i in a.lo() - 1..=a.hi() + 1 {
            assert_eq!(c.apex().dim(i), 2 * a.dim(i) + a.dim(i - 1));
        }
        assert!(c.denom().is_quasi_iso().unwrap());
    }

    #[test]
    fn equivalence_examples() {
        let p = point();
        let id = ChainMap::identity(p.clone());
        let z = ChainMap::zero(p.clone(), p.clone()).unwrap();
        let r = lift_map_to_roof(&id).unwrap();
        assert!(verify_roof_equivalence(&r, &r, &RoofEquivalenceWitness::reflexive(&r)).unwrap());

        let rz = lift_map_to_roof(&z).unwrap();
        let w = RoofEquivalenceWitness::reflexive(&r);
        assert!(!verify_roof_equivalence(&r, &rz, &w).unwrap());
        assert!(!verify_roof_equivalence(&r, &rz, &RoofEquivalenceWitness::against_lift(&r)).unwrap());

        let composite = compose_roofs(&r, &rz).unwrap();
        let w = RoofEquivalenceWitness::against_lift(&composite);
        assert!(verify_roof_equivalence(&composite, &rz, &w).unwrap());
        assert!(!verify_roof_equivalence(&composite, &r, &w).unwrap());
    }

    #[test]
    fn equivalence_shape_errors() {
        let p = point();
        let q = Arc::new(CochainComplex::concentrated(f5(), 1, 1));
        let r = lift_map_to_roof(&ChainMap::identity(p)).unwrap();
        let s = lift_map_to_roof(&ChainMap::identity(q)).unwrap();
        assert!(verify_roof_equivalence(&r, &s, &RoofEquivalenceWitness::reflexive(&r)).is_err());
    }
}
