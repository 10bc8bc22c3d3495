//! Canonical ensembles, reduced density matrices and mode fluctuations.
//!
//! Temperatures are in Hartree with k_B = 1 (Kelvin conversion happens at the
//! configuration boundary). Ensembles are exact canonical ensembles of the
//! closed coupled system over the retained lowest eigenstates; the neglected
//! weight is tracked as a per-state truncation bound. Entanglement of mixed
//! states is quantified by the reduced-state von Neumann entropy of each
//! retained eigenstate together with the ensemble weights — no
//! entanglement-of-formation computation.

use ndarray::{Array2, ArrayView1};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    mode_displacement_operator, mode_momentum_operator, mode_p_squared_operator,
    mode_q_squared_operator, ModeSet, PolaritonBasis,
};
use crate::operator::OperatorMatrix;
use crate::solver::dense::eigh_complex;
use crate::solver::SpectrumResult;

/// Degenerate-manifold window at T = 0, relative to max(1, |E₀|).
const GROUND_DEGENERACY_TOL: f64 = 1e-12;

/// Truncation bounds above this attach a warning to the ensemble.
pub const TRUNCATION_WARN: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct ThermalEnsemble {
    /// Temperature in Hartree (k_B = 1).
    pub temperature: f64,
    /// Boltzmann weights over the retained states, summing to one.
    pub weights: Vec<f64>,
    /// Retained eigenvalues (ascending, from the source spectrum).
    pub energies: Vec<f64>,
    /// Upper estimate of the neglected weight per state: the weight the
    /// first dropped state would carry.
    pub truncation_bound: f64,
    /// Present when the truncation bound exceeds [`TRUNCATION_WARN`].
    pub warning: Option<String>,
}

impl ThermalEnsemble {
    /// Σ w_i E_i.
    pub fn mean_energy(&self) -> f64 {
        self.weights
            .iter()
            .zip(self.energies.iter())
            .map(|(w, e)| w * e)
            .sum()
    }
}

/// Boltzmann ensemble over the `n_states` lowest states of a spectrum.
/// T = 0 returns the equal-weight ground manifold.
pub fn canonical_ensemble(
    spec: &SpectrumResult,
    temperature: f64,
    n_states: usize,
) -> Result<ThermalEnsemble> {
    if n_states == 0 || spec.len() < n_states {
        return Err(Error::InvalidArgument(format!(
            "spectrum has {} states, need n_states in 1..={}",
            spec.len(),
            spec.len()
        )));
    }
    if temperature < 0.0 || !temperature.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "temperature must be >= 0, got {temperature}"
        )));
    }
    let energies: Vec<f64> = spec.eigenvalues[..n_states].to_vec();
    let e0 = energies[0];

    let (weights, truncation_bound) = if temperature == 0.0 {
        let tol = GROUND_DEGENERACY_TOL * e0.abs().max(1.0);
        let deg = energies.iter().filter(|e| (**e - e0).abs() <= tol).count();
        let mut w = vec![0.0; n_states];
        w.iter_mut().take(deg).for_each(|x| *x = 1.0 / deg as f64);
        (w, 0.0)
    } else {
        let boltz: Vec<f64> = energies
            .iter()
            .map(|e| (-(e - e0) / temperature).exp())
            .collect();
        let z: f64 = boltz.iter().sum();
        let next_energy = spec
            .eigenvalues
            .get(n_states)
            .copied()
            .unwrap_or(*energies.last().unwrap());
        let bound = (-(next_energy - e0) / temperature).exp() / z;
        (boltz.iter().map(|b| b / z).collect(), bound)
    };

    let warning = (truncation_bound > TRUNCATION_WARN).then(|| {
        format!(
            "truncation bound {truncation_bound:.3e} exceeds {TRUNCATION_WARN:.0e}; retain more states"
        )
    });

    Ok(ThermalEnsemble {
        temperature,
        weights,
        energies,
        truncation_bound,
        warning,
    })
}

/// Σ w_i ⟨ψ_i|O|ψ_i⟩ over the retained states.
pub fn thermal_expectation(
    ens: &ThermalEnsemble,
    op: &OperatorMatrix,
    spec: &SpectrumResult,
) -> Result<f64> {
    let vecs = spec
        .eigenvectors
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("spectrum carries no eigenvectors".into()))?;
    if op.dim() != vecs.nrows() {
        return Err(Error::InvalidArgument("operator dimension mismatch".into()));
    }
    Ok(ens
        .weights
        .iter()
        .enumerate()
        .filter(|(_, w)| **w > 0.0)
        .map(|(i, w)| w * op.expectation(vecs.column(i)))
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Subsystem {
    Photon,
    Matter,
}

#[derive(Debug, Clone)]
pub struct ReducedDensityMatrix {
    pub subsystem: Subsystem,
    pub matrix: Array2<C64>,
    /// Eigenvalues of the reduced matrix, ascending, clamped to [−1e−12, 1].
    pub eigenvalues: Vec<f64>,
}

impl ReducedDensityMatrix {
    pub fn trace(&self) -> f64 {
        (0..self.matrix.nrows()).map(|i| self.matrix[(i, i)].re).sum()
    }

    /// tr ρ².
    pub fn purity(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l * l).sum()
    }
}

/// Partial trace of a pure state over the complementary tensor factor.
pub fn reduce_state(
    psi: ArrayView1<C64>,
    subsystem: Subsystem,
    basis: &PolaritonBasis,
) -> Result<ReducedDensityMatrix> {
    if psi.len() != basis.total_dim() {
        return Err(Error::InvalidArgument(format!(
            "state dimension {} does not match basis {}",
            psi.len(),
            basis.total_dim()
        )));
    }
    let (md, pd) = (basis.matter_dim(), basis.photon_dim());
    let rho = match subsystem {
        Subsystem::Photon => {
            let mut rho = Array2::<C64>::zeros((pd, pd));
            for m in 0..md {
                for p in 0..pd {
                    let a = psi[basis.flat(m, p)];
                    if a == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for q in 0..pd {
                        rho[(p, q)] += a * psi[basis.flat(m, q)].conj();
                    }
                }
            }
            rho
        }
        Subsystem::Matter => {
            let mut rho = Array2::<C64>::zeros((md, md));
            for p in 0..pd {
                for m in 0..md {
                    let a = psi[basis.flat(m, p)];
                    if a == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for n in 0..md {
                        rho[(m, n)] += a * psi[basis.flat(n, p)].conj();
                    }
                }
            }
            rho
        }
    };
    finish_rdm(rho, subsystem)
}

/// Weighted partial trace of an ensemble: ρ_sub = Σ w_i Tr_comp |ψ_i⟩⟨ψ_i|.
pub fn reduce_ensemble(
    ens: &ThermalEnsemble,
    spec: &SpectrumResult,
    subsystem: Subsystem,
    basis: &PolaritonBasis,
) -> Result<ReducedDensityMatrix> {
    let vecs = spec
        .eigenvectors
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("spectrum carries no eigenvectors".into()))?;
    let dim = match subsystem {
        Subsystem::Photon => basis.photon_dim(),
        Subsystem::Matter => basis.matter_dim(),
    };
    let mut acc = Array2::<C64>::zeros((dim, dim));
    for (i, &w) in ens.weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let rdm = reduce_state(vecs.column(i), subsystem, basis)?;
        acc.iter_mut().zip(rdm.matrix.iter()).for_each(|(a, r)| {
            *a += C64::new(w, 0.0) * r;
        });
    }
    finish_rdm(acc, subsystem)
}

fn finish_rdm(rho: Array2<C64>, subsystem: Subsystem) -> Result<ReducedDensityMatrix> {
    let (mut vals, _) = eigh_complex(rho.clone())?;
    for v in &mut vals {
        if *v < -1e-12 || *v > 1.0 + 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "reduced density matrix eigenvalue {v} outside [0, 1]"
            )));
        }
        *v = v.clamp(0.0, 1.0);
    }
    let rdm = ReducedDensityMatrix {
        subsystem,
        matrix: rho,
        eigenvalues: vals,
    };
    if (rdm.trace() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "reduced density matrix trace {} != 1",
            rdm.trace()
        )));
    }
    Ok(rdm)
}

/// Von Neumann entropy −Σ λ ln λ over eigenvalues ≥ 1e−14 (natural log).
pub fn entanglement_entropy(rdm: &ReducedDensityMatrix) -> f64 {
    rdm.eigenvalues
        .iter()
        .filter(|l| **l >= 1e-14)
        .map(|l| -l * l.ln())
        .sum()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModeFluctuations {
    pub mean_q: f64,
    pub var_q: f64,
    pub mean_p: f64,
    pub var_p: f64,
}

impl ModeFluctuations {
    /// var_q · var_p, bounded below by 1/4 for pure states.
    pub fn uncertainty_product(&self) -> f64 {
        self.var_q * self.var_p
    }
}

/// First and second moments of q_α and p_α in a pure state.
pub fn mode_fluctuations_state(
    psi: ArrayView1<C64>,
    modes: &ModeSet,
    basis: &PolaritonBasis,
    alpha: usize,
) -> Result<ModeFluctuations> {
    let q = mode_displacement_operator(modes, basis, alpha)?;
    let p = mode_momentum_operator(modes, basis, alpha)?;
    let q2 = mode_q_squared_operator(modes, basis, alpha)?;
    let p2 = mode_p_squared_operator(modes, basis, alpha)?;
    let mean_q = q.expectation(psi);
    let mean_p = p.expectation(psi);
    Ok(ModeFluctuations {
        mean_q,
        var_q: q2.expectation(psi) - mean_q * mean_q,
        mean_p,
        var_p: p2.expectation(psi) - mean_p * mean_p,
    })
}

/// Ensemble moments: means and variances against the thermal average.
pub fn mode_fluctuations_ensemble(
    ens: &ThermalEnsemble,
    spec: &SpectrumResult,
    modes: &ModeSet,
    basis: &PolaritonBasis,
    alpha: usize,
) -> Result<ModeFluctuations> {
    let q = mode_displacement_operator(modes, basis, alpha)?;
    let p = mode_momentum_operator(modes, basis, alpha)?;
    let q2 = mode_q_squared_operator(modes, basis, alpha)?;
    let p2 = mode_p_squared_operator(modes, basis, alpha)?;
    let mean_q = thermal_expectation(ens, &q, spec)?;
    let mean_p = thermal_expectation(ens, &p, spec)?;
    Ok(ModeFluctuations {
        mean_q,
        var_q: thermal_expectation(ens, &q2, spec)? - mean_q * mean_q,
        mean_p,
        var_p: thermal_expectation(ens, &p2, spec)? - mean_p * mean_p,
    })
}

/// Smallest retention count whose truncation bound stays below `target` at
/// temperature T, extrapolating the level spacing geometrically past the
/// known spectrum. Returns `spec.len()` when even the full set falls short.
pub fn suggest_retention(spec: &SpectrumResult, temperature: f64, target: f64) -> usize {
    if temperature == 0.0 {
        return 1;
    }
    let e0 = spec.eigenvalues[0];
    let mut z = 0.0;
    for (n, e) in spec.eigenvalues.iter().enumerate() {
        z += (-(e - e0) / temperature).exp();
        let next = spec
            .eigenvalues
            .get(n + 1)
            .copied()
            .unwrap_or_else(|| {
                // geometric extrapolation of the last spacing
                let last = spec.eigenvalues[n];
                let spacing = if n > 0 {
                    (last - spec.eigenvalues[n - 1]).max(f64::MIN_POSITIVE)
                } else {
                    temperature
                };
                last + spacing
            });
        let bound = (-(next - e0) / temperature).exp() / z;
        if bound < target {
            return n + 1;
        }
    }
    spec.len()
}
