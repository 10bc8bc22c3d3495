//! Unit conventions and conversions.
//!
//! Everything inside the library is expressed in Hartree atomic units:
//! `ħ = |e| = m_e = 1`, `4πε₀ = 1`, and `k_B = 1` for temperatures, so the
//! speed of light is `c = 1/α`. Conversions to laboratory units happen only
//! at the configuration and output boundary.

/// CODATA fine structure constant.
pub const FINE_STRUCTURE: f64 = 7.297_352_569_3e-3;

/// Hartree energy in electron volts.
pub const HARTREE_EV: f64 = 27.211_386_245_988;

/// Hartree energy in spectroscopic wavenumbers (cm⁻¹).
pub const HARTREE_WAVENUMBER: f64 = 219_474.631_363_2;

/// Hartree energy in Kelvin (E_h / k_B).
pub const HARTREE_KELVIN: f64 = 315_775.024_804_07;

/// One atomic unit of time in femtoseconds.
pub const AU_TIME_FS: f64 = 0.024_188_843_265_857;

pub fn wavenumber_to_hartree(cm: f64) -> f64 {
    cm / HARTREE_WAVENUMBER
}

pub fn hartree_to_wavenumber(e: f64) -> f64 {
    e * HARTREE_WAVENUMBER
}

pub fn ev_to_hartree(ev: f64) -> f64 {
    ev / HARTREE_EV
}

pub fn kelvin_to_hartree(t: f64) -> f64 {
    t / HARTREE_KELVIN
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn si_c_stretch_wavenumber_converts_to_expected_scale() {
        // 856 cm^-1 is a mid-infrared vibrational resonance; in atomic units
        // it must land near 3.9e-3 Hartree.
        let omega = wavenumber_to_hartree(856.0);
        assert!((omega - 3.9e-3).abs() < 2e-4, "omega = {omega}");
        assert!((hartree_to_wavenumber(omega) - 856.0).abs() < 1e-9);
    }

    #[test]
    fn room_temperature_in_hartree() {
        let t = kelvin_to_hartree(300.0);
        assert!((t - 9.5e-4).abs() < 1e-5, "t = {t}");
    }
}
