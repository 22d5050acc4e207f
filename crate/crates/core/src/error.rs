use thiserror::Error;

/// Failure modes of the spectral pipeline. Numeric payloads are stored as `f64`
/// so the type does not depend on the scalar parameter.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum KamError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("axis {axis} out of range for a {dim}-dimensional torus")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("grid with {grid} nodes per axis cannot resolve order {order} (needs {needed})")]
    GridTooSmall { grid: usize, order: usize, needed: usize },

    #[error("invalid strip width {0} (must lie in (0, 1])")]
    InvalidWidth(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("re-expansion tail {tail:e} exceeds tolerance {tol:e} (order too small)")]
    TailTooLarge { tail: f64, tol: f64 },

    #[error("inversion certificate violated: |v|_(s+2sigma) = {norm:e} >= sigma = {sigma:e}")]
    CertificateViolated { norm: f64, sigma: f64 },

    #[error("{what} did not converge within {iterations} iterations (last change {last:e})")]
    NonConvergence { what: String, iterations: usize, last: f64 },

    #[error("singular matrix in {0}")]
    Singular(String),

    #[error("nonzero average {mean:e} where a zero-average function is required")]
    NonZeroAverage { mean: f64 },

    #[error("resonant frequency vector: k = {witness:?} gives k.alpha = {value:e}")]
    Resonance { witness: Vec<i64>, value: f64 },

    #[error("generator must be O(r^2): found a term of degree {0}")]
    GeneratorDegree(usize),

    #[error("action translation |R| = {norm:e} exceeds the bound {bound:e}")]
    TranslationTooLarge { norm: f64, bound: f64 },

    #[error("series diverges: {0}")]
    Divergent(String),

    #[error("Newton iteration diverged at step {step}: defect {defect:e}")]
    Divergence { step: usize, defect: f64 },

    #[error("twist condition fails: condition number {cond:e} above threshold {threshold:e}")]
    TwistDegenerate { cond: f64, threshold: f64 },

    #[error("trajectory left the validity region (|r - R*| = {distance:e} > {radius:e})")]
    OutsideValidity { distance: f64, radius: f64 },

    #[error("serialization: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, KamError>;
