//! Eigensolvers, real-time propagation and signal analysis.

pub mod dense;
pub mod gauge;
pub mod lanczos;
pub mod propagate;
pub mod spectrum;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::Serialize;

pub use dense::{dense_solve, dense_solve_with_limit, DENSE_LIMIT_DEFAULT};
pub use gauge::{
    check_gauge_invariance, check_gauge_invariance_with, GaugeReport, RefinementLevel,
};
pub use lanczos::{solve_lowest, solve_lowest_with, LanczosOptions};
pub use propagate::{propagate, HamiltonianAction, Trajectory};
pub use spectrum::{absorption_spectrum, AbsorptionSpectrum, Peak, Window};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Dense,
    Iterative,
}

/// Eigenpairs with their residual contract. Eigenvalues ascend; eigenvectors,
/// when present, are the columns of `eigenvectors` and orthonormal; residuals
/// are ‖Hv − Ev‖ per pair.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<Array2<C64>>,
    pub residuals: Vec<f64>,
    pub method: SolveMethod,
}

impl SpectrumResult {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// k-th eigenvector as an owned column, if vectors were kept.
    pub fn eigenvector(&self, k: usize) -> Option<Array1<C64>> {
        self.eigenvectors.as_ref().map(|v| v.column(k).to_owned())
    }

    /// Largest residual of the retained pairs.
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}
