use crate::fitting::FitResult;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite value: {0}")]
    Numeric(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("steady state is not unique: {0}")]
    Ambiguous(String),
    #[error("no convergence within {iterations} periods, last residual {residual:e}")]
    Convergence { iterations: usize, residual: f64 },
    #[error("step size underflow at t = {t}")]
    Stiffness { t: f64 },
    #[error("singular system: {0}")]
    Singular(String),
    #[error("Bessel sum truncation unstable: {0}")]
    Truncation(String),
    #[error("argument out of range: {0}")]
    Range(String),
    #[error("outside domain: {0}")]
    Domain(String),
    #[error("fit did not converge in {iterations} iterations (best rss {:e})", best.rss)]
    Fit { iterations: usize, best: Box<FitResult> },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn ensure_finite(x: f64, what: &str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Numeric(format!("{what} = {x}")))
    }
}
