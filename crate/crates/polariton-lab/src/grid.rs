//! Uniform 1D real-space grids and kinetic-energy discretizations.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Grid1D> {
        let g = Grid1D {
            x_min,
            x_max,
            n_points,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points < 2 {
            return Err(Error::InvalidModel(format!(
                "grid needs n_points >= 2, got {}",
                self.n_points
            )));
        }
        if !(self.x_min < self.x_max) {
            return Err(Error::InvalidModel(format!(
                "grid needs x_min < x_max, got [{}, {}]",
                self.x_min, self.x_max
            )));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points as f64 - 1.0)
    }

    pub fn point(&self, i: usize) -> f64 {
        self.x_min + self.dx() * i as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.point(i)).collect()
    }

    /// True when the grid maps onto itself under x → −x (point i ↔ n−1−i),
    /// which is what the parity checks require.
    pub fn is_symmetric(&self) -> bool {
        (self.x_min + self.x_max).abs() < 1e-12 * self.dx().max(1.0)
    }
}

/// Kinetic-energy discretization. The 3-point stencil is the default; the
/// sine-spectral form (exact for Dirichlet boxes) exists for convergence
/// cross-checks and is dense.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KineticScheme {
    #[default]
    FiniteDifference,
    SineSpectral,
}

/// Nonzero entries of −(1/2m)∂² on the grid with Dirichlet boundaries,
/// 3-point stencil: (i, j, value).
pub fn fd_kinetic_entries(grid: &Grid1D, mass: f64) -> Vec<(usize, usize, f64)> {
    let dx2 = grid.dx() * grid.dx();
    let diag = 1.0 / (mass * dx2);
    let hop = -0.5 / (mass * dx2);
    let n = grid.n_points;
    let mut out = Vec::with_capacity(3 * n);
    for i in 0..n {
        out.push((i, i, diag));
        if i + 1 < n {
            out.push((i, i + 1, hop));
            out.push((i + 1, i, hop));
        }
    }
    out
}

/// Dense sine-spectral kinetic matrix T = S diag(k²/2m) Sᵀ with
/// S_ij = √(2/(n+1)) sin(π(i+1)(j+1)/(n+1)) and k_j = π(j+1)/((n+1)dx).
pub fn sine_spectral_kinetic(grid: &Grid1D, mass: f64) -> Array2<f64> {
    let n = grid.n_points;
    let dx = grid.dx();
    let norm = 2.0 / (n as f64 + 1.0);
    let mut t = Array2::<f64>::zeros((n, n));
    // T_ij = Σ_k sin(π(i+1)(k+1)/(n+1)) sin(π(j+1)(k+1)/(n+1)) k²/(2m) · norm
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for k in 0..n {
                let kk = std::f64::consts::PI * (k as f64 + 1.0) / ((n as f64 + 1.0) * dx);
                let si = (std::f64::consts::PI * (i as f64 + 1.0) * (k as f64 + 1.0)
                    / (n as f64 + 1.0))
                    .sin();
                let sj = (std::f64::consts::PI * (j as f64 + 1.0) * (k as f64 + 1.0)
                    / (n as f64 + 1.0))
                    .sin();
                acc += si * sj * kk * kk / (2.0 * mass);
            }
            t[(i, j)] = acc * norm;
            t[(j, i)] = acc * norm;
        }
    }
    t
}

/// Nonzero entries of p = −i d/dx (central difference): purely imaginary,
/// returned as (i, j, imag_part).
pub fn fd_momentum_entries(grid: &Grid1D) -> Vec<(usize, usize, f64)> {
    let c = 1.0 / (2.0 * grid.dx());
    let n = grid.n_points;
    let mut out = Vec::with_capacity(2 * n);
    for i in 0..n {
        if i + 1 < n {
            // (pψ)_i = −i (ψ_{i+1} − ψ_{i−1}) / 2dx
            out.push((i, i + 1, -c));
            out.push((i + 1, i, c));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_bounds_and_spacing() {
        let g = Grid1D::new(-4.0, 4.0, 81).unwrap();
        assert!((g.dx() - 0.1).abs() < 1e-14);
        assert!((g.point(80) - 4.0).abs() < 1e-12);
        assert!(g.is_symmetric());
        assert!(Grid1D::new(1.0, -1.0, 10).is_err());
        assert!(Grid1D::new(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn spectral_kinetic_matches_box_ground_state() {
        // Dirichlet box [0, L] with interior points: exact ground energy
        // π²/(2L²). The sine basis diagonalizes the box exactly, so the
        // spectral matrix applied to sin(πx/L) reproduces it to rounding.
        let n = 31;
        let l = 1.0;
        let dx = l / (n as f64 + 1.0);
        let g = Grid1D {
            x_min: dx,
            x_max: l - dx,
            n_points: n,
        };
        let t = sine_spectral_kinetic(&g, 1.0);
        let psi: Vec<f64> = (0..n)
            .map(|i| (std::f64::consts::PI * g.point(i) / l).sin())
            .collect();
        let norm: f64 = psi.iter().map(|v| v * v).sum();
        let mut e = 0.0;
        for i in 0..n {
            for j in 0..n {
                e += psi[i] * t[(i, j)] * psi[j];
            }
        }
        e /= norm;
        let exact = std::f64::consts::PI.powi(2) / (2.0 * l * l);
        assert!((e - exact).abs() < 1e-10, "e = {e}, exact = {exact}");
    }
}
