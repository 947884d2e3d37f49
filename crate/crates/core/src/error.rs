use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unknown example structure `{0}`")]
    UnknownExample(String),
    #[error("bad parameter: {0}")]
    BadParam(String),
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("structure is not expressed in an orthonormal frame (Gram defect {0:e})")]
    NotOrthonormalFrame(f64),
    #[error("torsion does not match -(R + Rbar): max deviation {0:e}")]
    TorsionMismatch(f64),
    #[error("horizontal Ricci tensor is not symmetric: max asymmetry {0:e}")]
    AsymmetricRicci(f64),
    #[error("horizontal bundle is integrable (M_R = 0); vertical normalization is meaningless")]
    ZeroCurvature,
    #[error("structure is not of step 2 (step {0:?})")]
    NotStepTwo(Option<usize>),
    #[error("vertical metric is not normalized (M_R = {0})")]
    NotNormalized(f64),
    #[error("constant `{0}` is unbounded; curvature-dimension parameters are unavailable")]
    UnboundedConstant(&'static str),
    #[error("drift field must be a nonzero vertical vector: {0}")]
    NotVertical(String),
    #[error("bad dimension parameter: {0}")]
    BadDimension(String),
    #[error("2-jet violates the Hessian commutation constraint (residual {0:e})")]
    ConstraintViolated(f64),
    #[error("operation requires a parallel vertical metric (M_nabla_v = {0:e})")]
    RequiresParallelVerticalMetric(f64),
    #[error("rho_2,0 = {0} is not positive")]
    NonPositiveRho20(f64),
    #[error("rho_H = {0} is not positive")]
    NonPositiveRhoH(f64),
    #[error("kappa bound requires a parallel metric (M_nabla_v = {0:e})")]
    RequiresParallelMetric(f64),
    #[error("kappa = {0} is not positive")]
    NonPositiveKappa(f64),
    #[error("unsupported algebra for the representation oracle: {0}")]
    UnsupportedAlgebra(String),
    #[error("j_max = {0} admits no nonzero eigenvalue")]
    JMaxTooSmall(f64),
    #[error("structure `{0}` has no matrix realization")]
    NoRealization(String),
    #[error("numerical blow-up: matrix norm {0:e} exceeded the limit")]
    NumericalBlowup(f64),
    #[error("insufficient paths: {0}")]
    InsufficientPaths(String),
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}

impl Error {
    /// Errors that signal an implementation inconsistency rather than bad input.
    pub fn is_internal_consistency(&self) -> bool {
        matches!(
            self,
            Error::TorsionMismatch(_) | Error::AsymmetricRicci(_) | Error::Inconsistent(_)
        )
    }
}
