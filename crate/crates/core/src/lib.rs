//! Exact computations with bounded cochain complexes over a field: mapping
//! cones, homotopies, quasi-isomorphisms, triangles, and roofs in the
//! localization of the homotopy category at quasi-isomorphisms.

pub mod chainmap;
pub mod complex;
pub mod cone;
pub mod error;
pub mod exactlin;
pub mod random;
pub mod roof;

pub use chainmap::{ChainMap, Homotopy};
pub use complex::{CochainComplex, CohomologySpace};
pub use cone::{Cone, Triangle};
pub use error::{Error, Result};
pub use exactlin::{FieldSpec, Matrix, Scalar};
pub use roof::{Cospan, FlipResult, Roof, RoofEquivalenceWitness};
