//! Error vocabulary shared by every module in the crate.
//!
//! Each variant carries a stable machine code (see [`Error::code`]) so
//! front-ends can map failures to exit statuses without matching on
//! display strings.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("jet order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("jet order {order} exceeds the supported maximum {max}")]
    OrderTooLarge { order: usize, max: usize },

    #[error("inner jet has nonzero constant term {value}")]
    NonzeroConstantTerm { value: Complex64 },

    #[error("degenerate linear part a={a}, b={b}: |a| and |b| coincide within tolerance")]
    DegenerateLinearPart { a: Complex64, b: Complex64 },

    #[error("ideal division residual {residual:.3e} exceeds tolerance {tol:.3e} (degenerate divisor)")]
    DivisionResidual { residual: f64, tol: f64 },

    #[error("jet is not liftable: mixed pure-z and pure-zbar monomials present")]
    NotLiftable,

    #[error("gluing tuple needs at least one transition map (n >= 2)")]
    TupleTooSmall,

    #[error("transition map {index} is orientation-reversing; gluing maps must preserve orientation")]
    OrientationReversing { index: usize },

    #[error("gauge entry {slot} is not liftable")]
    GaugeNotLiftable { slot: usize },

    #[error("gauge tuple mixes orientation classes; all entries must agree")]
    MixedOrientation,

    #[error("gauge tuple has {gauge} entries but the gluing tuple needs {expected}")]
    SizeMismatch { gauge: usize, expected: usize },

    #[error("mu = {mu:.3e} below tolerance: the level mu = 0 is non-normalizable by this algorithm")]
    MuZero { mu: f64 },

    #[error("jet is not real-valued: max imaginary residue {max_imag:.3e}")]
    NotRealValued { max_imag: f64 },

    #[error("matrix is not a complex structure: |J^2 + I| = {deviation:.3e}")]
    NotAComplexStructure { deviation: f64 },

    #[error("orientation mismatch after sign resolution: |trace| = {trace:.6} < 2")]
    OrientationMismatch { trace: f64 },

    #[error("not a focus-focus hessian pair: {reason}")]
    NotFocusFocus { reason: String },

    #[error("no real null vector found after {attempts} hyperplane resamples (degenerate pencil)")]
    NoRealNullVector { attempts: usize },

    #[error("point is not rank-0: |dF| = {grad_norm:.3e} exceeds tolerance {tol:.3e}")]
    NotCritical { grad_norm: f64, tol: f64 },

    #[error("evaluation point at distance {dist:.3e} lies outside the chart radius {radius:.3e}")]
    OutOfChartRadius { dist: f64, radius: f64 },

    #[error("differential has rank {detected}, expected exactly 1")]
    RankNotOne { detected: usize },

    #[error("eigenvalue quadruple is not of the form {{+-a+-bi}}")]
    MalformedQuadruple,

    #[error("eigenvalue has vanishing real part; sign convention cannot select a representative")]
    ZeroRealPart,

    #[error("vanishing denominator lambda_i + conj(lambda_1) in the invariant formula")]
    VanishingDenominator,

    #[error("obstruction report needs at least 2 valid samples, got {valid}")]
    TooFewSamples { valid: usize },

    #[error("scaling factor must be a positive real number, got {c}")]
    NonPositiveScale { c: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    /// Stable machine-readable code, one per variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::OrderMismatch { .. } => "ORDER_MISMATCH",
            Error::OrderTooLarge { .. } => "ORDER_TOO_LARGE",
            Error::NonzeroConstantTerm { .. } => "NONZERO_CONSTANT",
            Error::DegenerateLinearPart { .. } => "DEGENERATE_LINEAR",
            Error::DivisionResidual { .. } => "DIVISION_RESIDUAL",
            Error::NotLiftable => "NOT_LIFTABLE",
            Error::TupleTooSmall => "TUPLE_TOO_SMALL",
            Error::OrientationReversing { .. } => "ORIENTATION_REVERSING",
            Error::GaugeNotLiftable { .. } => "GAUGE_NOT_LIFTABLE",
            Error::MixedOrientation => "MIXED_ORIENTATION",
            Error::SizeMismatch { .. } => "SIZE_MISMATCH",
            Error::MuZero { .. } => "MU_ZERO",
            Error::NotRealValued { .. } => "NOT_REAL_VALUED",
            Error::NotAComplexStructure { .. } => "NOT_A_COMPLEX_STRUCTURE",
            Error::OrientationMismatch { .. } => "ORIENTATION_MISMATCH",
            Error::NotFocusFocus { .. } => "NOT_FOCUS_FOCUS",
            Error::NoRealNullVector { .. } => "NO_REAL_NULL_VECTOR",
            Error::NotCritical { .. } => "NOT_CRITICAL",
            Error::OutOfChartRadius { .. } => "OUT_OF_CHART_RADIUS",
            Error::RankNotOne { .. } => "RANK_NOT_ONE",
            Error::MalformedQuadruple => "MALFORMED_QUADRUPLE",
            Error::ZeroRealPart => "ZERO_REAL_PART",
            Error::VanishingDenominator => "VANISHING_DENOMINATOR",
            Error::TooFewSamples { .. } => "TOO_FEW_SAMPLES",
            Error::NonPositiveScale { .. } => "NON_POSITIVE_SCALE",
            Error::Parse { .. } => "PARSE",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
