use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("spacings ({a}, {b}) must both divide the order {order}")]
    NonDivisor { order: usize, a: usize, b: usize },

    #[error("invalid lattice parameters: order {order}, spacings ({a}, {b})")]
    InvalidLattice { order: usize, a: usize, b: usize },

    #[error("{operation} needs an odd order, got L = {order}")]
    EvenOrderUnsupported { order: usize, operation: &'static str },

    #[error("lattice ({order}, {a}, {b}) cannot be halved")]
    Unhalvable { order: usize, a: usize, b: usize },

    #[error("model mismatch: {left} vs {right}")]
    ModelMismatch { left: String, right: String },

    #[error("expected length {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("window list is empty")]
    EmptyList,

    #[error("not a frame: lower bound {lower:e} vs upper bound {upper:e}")]
    NotAFrame { lower: f64, upper: f64 },

    #[error("coefficient sequences live on different lattices")]
    LatticeMismatch,

    #[error("operator is not {kind}-invariant: defect {defect:e} exceeds {tol:e}")]
    NotInvariant { kind: &'static str, defect: f64, tol: f64 },

    #[error("spreading/symbol mass {mass:e} off the adjoint lattice exceeds {tol:e}")]
    SupportLeak { mass: f64, tol: f64 },

    #[error("symbol vanishes at the origin")]
    ZeroSymbolAtOrigin,

    #[error("symbol has mass {mass:e} at a nonzero adjoint lattice point (tolerance {tol:e})")]
    SupportViolation { mass: f64, tol: f64 },

    #[error("lattice ({order}, {a}, {b}) violates {condition}")]
    LatticeConditionViolated { order: usize, a: usize, b: usize, condition: &'static str },

    #[error("{what} = {value} does not land on the sampling grid")]
    OffGridLattice { what: &'static str, value: f64 },

    #[error("invalid sampling grid: {0}")]
    InvalidGrid(String),

    #[error("constant {name} is inconsistent: {detail}")]
    InconsistentConstant { name: String, detail: String },

    #[error("constants table: {0}")]
    ConstantsTable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
