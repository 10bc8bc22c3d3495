//! Photon-induced mass and the bare-mass relation.
//!
//! In the dipole approximation the physical electron mass splits as
//! m_e = m + m_ph with the photon contribution
//!
//! ```text
//! m_ph = (4 / 3π) · α · (ħ/c) · Λ
//! ```
//!
//! for an ultraviolet cutoff wave number Λ. In atomic units ħ = 1 and
//! c = 1/α, so m_ph = (4/3π) α² Λ. A cutoff large enough that m_ph ≥ m_e
//! would demand a negative bare mass, which is the non-renormalizable regime;
//! it is reported as a flag, not an error.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::units::FINE_STRUCTURE;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PhotonMassResult {
    /// Cutoff wave number Λ (1/bohr).
    pub cutoff: f64,
    /// m_ph in electron masses.
    pub photon_mass: f64,
    /// Bare mass m = m_e − m_ph.
    pub bare_mass: f64,
    /// False when the cutoff implies m ≤ 0.
    pub renormalizable: bool,
}

/// Photon mass and bare-mass solve for a physical electron (m_e = 1 a.u.).
pub fn photon_mass(cutoff: f64, fine_structure: f64) -> Result<PhotonMassResult> {
    photon_mass_for(cutoff, fine_structure, 1.0)
}

/// Same, for an arbitrary physical mass.
pub fn photon_mass_for(
    cutoff: f64,
    fine_structure: f64,
    physical_mass: f64,
) -> Result<PhotonMassResult> {
    if cutoff < 0.0 || !cutoff.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "cutoff must be >= 0, got {cutoff}"
        )));
    }
    if !(fine_structure > 0.0) {
        return Err(Error::InvalidArgument(
            "fine-structure constant must be positive".into(),
        ));
    }
    let m_ph = 4.0 / (3.0 * std::f64::consts::PI) * fine_structure * fine_structure * cutoff;
    let bare = physical_mass - m_ph;
    Ok(PhotonMassResult {
        cutoff,
        photon_mass: m_ph,
        bare_mass: bare,
        renormalizable: bare > 0.0,
    })
}

/// Cutoff at which the bare mass hits zero: Λ* = 3π m_e / (4α²).
pub fn critical_cutoff(fine_structure: f64, physical_mass: f64) -> f64 {
    3.0 * std::f64::consts::PI * physical_mass / (4.0 * fine_structure * fine_structure)
}

/// Convenience wrapper using the CODATA fine-structure constant.
pub fn photon_mass_codata(cutoff: f64) -> Result<PhotonMassResult> {
    photon_mass(cutoff, FINE_STRUCTURE)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_cutoff_gives_zero_mass() {
        let r = photon_mass_codata(0.0).unwrap();
        assert_eq!(r.photon_mass, 0.0);
        assert_eq!(r.bare_mass, 1.0);
        assert!(r.renormalizable);
    }

    #[test]
    fn unit_cutoff_value() {
        // direct high-precision evaluation of (4/3π) α² for α = 1/137.035999
        let alpha = 1.0 / 137.035999;
        let r = photon_mass(1.0, alpha).unwrap();
        let expected = 4.0 / (3.0 * std::f64::consts::PI) * alpha * alpha;
        assert!((r.photon_mass - expected).abs() < 1e-18);
        assert!((r.photon_mass - 2.2598e-5).abs() < 1e-8);
        assert!(r.renormalizable);
    }

    #[test]
    fn critical_cutoff_is_boundary() {
        let alpha = FINE_STRUCTURE;
        let crit = critical_cutoff(alpha, 1.0);
        let r = photon_mass(crit, alpha).unwrap();
        assert!(r.bare_mass.abs() < 1e-12);
        assert!(!r.renormalizable);
        let r2 = photon_mass(crit * 1.01, alpha).unwrap();
        assert!(r2.bare_mass < 0.0);
        assert!(!r2.renormalizable);
    }

    #[test]
    fn negative_cutoff_rejected() {
        assert!(photon_mass_codata(-1.0).is_err());
    }
}
