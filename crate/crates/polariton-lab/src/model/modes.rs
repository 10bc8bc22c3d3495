//! The discretized photon sector: mode frequencies, couplings, polarizations
//! and Fock cutoffs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::PhotonBasis;

/// One quantized cavity mode. The coupling strength `g` multiplies the total
/// dipole in the length-gauge shifted-oscillator term (ω²/2)(q − (g/ω) ε·R)²;
/// the free-space association would be g = √(1/ε₀L³), but the configuration
/// takes g directly since the mode structure is an input here.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Mode {
    /// Frequency ω in Hartree.
    pub omega: f64,
    /// Coupling strength g in atomic units.
    pub g: f64,
    /// Polarization vector; one component per model dimension (1D here, so a
    /// single entry of ±1), unit Euclidean norm.
    pub polarization: Vec<f64>,
    /// Fock cutoff: the mode keeps photon numbers 0..=n_max.
    pub n_max: usize,
}

impl Mode {
    pub fn new(omega: f64, g: f64, polarization: Vec<f64>, n_max: usize) -> Mode {
        Mode {
            omega,
            g,
            polarization,
            n_max,
        }
    }

    /// Scalar polarization for the 1D model.
    pub fn eps(&self) -> f64 {
        self.polarization[0]
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeSet {
    pub modes: Vec<Mode>,
}

impl ModeSet {
    pub fn new(modes: Vec<Mode>) -> Result<ModeSet> {
        let set = ModeSet { modes };
        set.validate()?;
        Ok(set)
    }

    /// Single mode with polarization +1.
    pub fn single(omega: f64, g: f64, n_max: usize) -> ModeSet {
        ModeSet::new(vec![Mode::new(omega, g, vec![1.0], n_max)])
            .expect("single positive-frequency mode is valid")
    }

    pub fn validate(&self) -> Result<()> {
        for (i, m) in self.modes.iter().enumerate() {
            if !(m.omega > 0.0) || !m.omega.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "mode {i}: omega must be positive and finite, got {}",
                    m.omega
                )));
            }
            if !m.g.is_finite() {
                return Err(Error::InvalidModel(format!("mode {i}: non-finite coupling")));
            }
            if m.polarization.is_empty() {
                return Err(Error::InvalidModel(format!(
                    "mode {i}: empty polarization vector"
                )));
            }
            let norm: f64 = m.polarization.iter().map(|c| c * c).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidModel(format!(
                    "mode {i}: polarization must have unit norm, got {norm}"
                )));
            }
            if m.n_max < 1 {
                return Err(Error::InvalidModel(format!(
                    "mode {i}: n_max must be >= 1"
                )));
            }
        }
        Ok(())
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    /// Π_α (n_max + 1).
    pub fn photon_dim(&self) -> usize {
        self.modes.iter().map(|m| m.n_max + 1).product::<usize>().max(1)
    }

    pub fn photon_basis(&self) -> PhotonBasis {
        let n_maxes: Vec<usize> = self.modes.iter().map(|m| m.n_max).collect();
        PhotonBasis::new(&n_maxes)
    }

    /// Same modes with every cutoff replaced by `n_max`.
    pub fn with_n_max(&self, n_max: usize) -> ModeSet {
        let modes = self
            .modes
            .iter()
            .map(|m| Mode::new(m.omega, m.g, m.polarization.clone(), n_max))
            .collect();
        ModeSet { modes }
    }

    /// Same modes with every coupling replaced by `g`.
    pub fn with_g(&self, g: f64) -> ModeSet {
        let modes = self
            .modes
            .iter()
            .map(|m| Mode::new(m.omega, g, m.polarization.clone(), m.n_max))
            .collect();
        ModeSet { modes }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_rejects_bad_modes() {
        assert!(ModeSet::new(vec![Mode::new(-1.0, 0.0, vec![1.0], 2)]).is_err());
        assert!(ModeSet::new(vec![Mode::new(1.0, 0.0, vec![0.5], 2)]).is_err());
        assert!(ModeSet::new(vec![Mode::new(1.0, 0.0, vec![1.0], 0)]).is_err());
        assert!(ModeSet::new(vec![Mode::new(1.0, 0.1, vec![-1.0], 4)]).is_ok());
    }

    #[test]
    fn photon_dim_is_product_of_cutoffs() {
        let set = ModeSet::new(vec![
            Mode::new(1.0, 0.0, vec![1.0], 3),
            Mode::new(2.0, 0.0, vec![1.0], 1),
        ])
        .unwrap();
        assert_eq!(set.photon_dim(), 8);
    }
}
