//! The tolerance set shared by the library entry points and the CLI.

/// Every threshold a computation may consult. [`Tolerances::uniform`] sets them
/// all at once, which is what the CLI `--tol` flag does.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Division and `r`-cancellation residues in polynomial arithmetic.
    pub residue: f64,
    /// Closing equation of the ketket recurrence and fixed coefficient-matrix patterns.
    pub consistency: f64,
    /// Largest imaginary part still counted as real.
    pub reality: f64,
    /// Pivot threshold for rank decisions in null-space solves.
    pub nullspace: f64,
    /// Half-width of the boundary band in layer classification.
    pub boundary: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            residue: 1e-10,
            consistency: 1e-9,
            reality: 1e-9,
            nullspace: 1e-9,
            boundary: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn uniform(tol: f64) -> Self {
        Tolerances {
            residue: tol,
            consistency: tol,
            reality: tol,
            nullspace: tol,
            boundary: tol,
        }
    }
}
