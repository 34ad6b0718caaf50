use thiserror::Error;

use crate::exactlin::FieldSpec;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("field mismatch: {left} vs {right}")]
    FieldMismatch { left: FieldSpec, right: FieldSpec },
    #[error("{op}: shape mismatch ({}x{} vs {}x{})", left.0, left.1, right.0, right.1)]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("expected {expected} entries, got {got}")]
    DataLength { expected: usize, got: usize },
    #[error("scalar {value} is not representable in {field}")]
    InvalidScalar { value: String, field: FieldSpec },
    #[error("degree {degree}: {what}")]
    DegreeShape { degree: i64, what: String },
    #[error("not a cochain complex: d^{} . d^{} != 0", degree + 1, degree)]
    NotAComplex { degree: i64 },
    #[error("not a chain map: square at degree {degree} does not commute")]
    NotAChainMap { degree: i64 },
    #[error("complexes do not match: {0}")]
    ComplexMismatch(&'static str),
    #[error("{0} is not a quasi-isomorphism")]
    NotQuasiIso(&'static str),
    #[error("square neither commutes nor is witnessed by the supplied homotopy")]
    UnwitnessedSquare,
}
