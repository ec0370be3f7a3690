use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix dimension {n} outside supported range {min}..={max}")]
    Dimension { n: usize, min: usize, max: usize },

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("polynomial degrees differ: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },

    #[error("polynomial degree {degree} exceeds cap {cap}")]
    DegreeCap { degree: usize, cap: usize },

    #[error("division by uv left residue {residue:e} on a pure power")]
    DivisionResidue { residue: f64 },

    #[error("odd powers of r do not cancel (residue {residue:e})")]
    ResidualR { residue: f64 },

    #[error("ketket recurrence failed its closing equation (residue {residue:e})")]
    ConsistencyFailure { residue: f64 },

    #[error("coefficient matrix pattern check failed: {0}")]
    PatternFailure(String),

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("invariant breached: {0}")]
    Invariant(String),

    #[error("eigensolver did not converge; best subdiagonal residual {best_residual:e}")]
    ConvergenceFailure { best_residual: f64 },

    #[error("layer bounds (mu, nu) for N = {n} must be supplied")]
    MissingBounds { n: usize },
}

impl Error {
    /// True for failures of internal consistency checks, as opposed to bad input.
    pub fn is_invariant_breach(&self) -> bool {
        matches!(
            self,
            Error::ConsistencyFailure { .. }
                | Error::PatternFailure(_)
                | Error::Invariant(_)
                | Error::DivisionResidue { .. }
                | Error::ResidualR { .. }
                | Error::ConvergenceFailure { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
