//! Few-level model reductions: Rabi, Jaynes-Cummings and Tavis-Cummings.
//!
//! These are the standard phenomenological limits of the dipole-coupled
//! Hamiltonian: matter reduced to two levels, the dipole self-energy dropped
//! (a constant there), and optionally the rotating-wave approximation.
//! Energies are measured from the uncoupled vacuum, so the g = 0 spectrum is
//! {0, ω_a} ⊗ {n ω_c} without zero-point offsets.

use crate::error::{Error, Result};
use crate::operator::{OperatorBuilder, OperatorMatrix, MAX_ASSEMBLY_DIM};

/// Two-level emitter coupled to one mode:
///
/// ```text
/// H = ω_c a†a + ω_a σ⁺σ⁻ + g (σ⁺ + σ⁻)(a + a†)     (rwa = false)
/// H = ω_c a†a + ω_a σ⁺σ⁻ + g (σ⁺ a + σ⁻ a†)          (rwa = true)
/// ```
///
/// Basis: |s⟩⊗|n⟩ with flat index s·(n_max+1) + n, s ∈ {0 = ground,
/// 1 = excited}.
pub fn build_rabi(
    omega_c: f64,
    omega_a: f64,
    g: f64,
    rwa: bool,
    n_max: usize,
) -> Result<OperatorMatrix> {
    build_tavis_cummings(1, omega_c, omega_a, g, rwa, n_max)
}

/// N identical two-level emitters symmetrically coupled to one mode. N = 1
/// reduces exactly to [`build_rabi`]. The basis is the full 2^N ⊗ Fock
/// product: flat index = spin_bits·(n_max+1) + n, emitter i excited when bit
/// i of spin_bits is set.
pub fn build_tavis_cummings(
    n_emitters: usize,
    omega_c: f64,
    omega_a: f64,
    g: f64,
    rwa: bool,
    n_max: usize,
) -> Result<OperatorMatrix> {
    if n_emitters < 1 {
        return Err(Error::InvalidModel("need at least one emitter".into()));
    }
    if n_max < 1 {
        return Err(Error::InvalidModel("n_max must be >= 1".into()));
    }
    if n_emitters >= usize::BITS as usize {
        return Err(Error::DimensionOverflow {
            requested: usize::MAX,
            limit: MAX_ASSEMBLY_DIM,
        });
    }
    let fock = n_max + 1;
    let dim = (1usize << n_emitters)
        .checked_mul(fock)
        .filter(|&d| d <= MAX_ASSEMBLY_DIM)
        .ok_or(Error::DimensionOverflow {
            requested: usize::MAX,
            limit: MAX_ASSEMBLY_DIM,
        })?;

    let flat = |bits: usize, n: usize| bits * fock + n;
    let mut b = OperatorBuilder::new(dim);

    for bits in 0..(1usize << n_emitters) {
        let excited = bits.count_ones() as f64;
        for n in 0..fock {
            b.add_real(
                flat(bits, n),
                flat(bits, n),
                omega_c * n as f64 + omega_a * excited,
            );
        }
        for i in 0..n_emitters {
            let mask = 1usize << i;
            if bits & mask == 0 {
                let up = bits | mask;
                // σ⁺_i a: |g, n⟩ → |e, n−1⟩ with √n
                for n in 1..fock {
                    let v = g * (n as f64).sqrt();
                    b.add_real(flat(up, n - 1), flat(bits, n), v);
                    b.add_real(flat(bits, n), flat(up, n - 1), v);
                }
                if !rwa {
                    // counter-rotating σ⁺_i a†: |g, n⟩ → |e, n+1⟩ with √(n+1)
                    for n in 0..fock - 1 {
                        let v = g * ((n + 1) as f64).sqrt();
                        b.add_real(flat(up, n + 1), flat(bits, n), v);
                        b.add_real(flat(bits, n), flat(up, n + 1), v);
                    }
                }
            }
        }
    }

    let label = match (n_emitters, rwa) {
        (1, true) => "Jaynes-Cummings".to_string(),
        (1, false) => "Rabi".to_string(),
        (n, true) => format!("Tavis-Cummings N={n}"),
        (n, false) => format!("Dicke N={n}"),
    };
    b.finalize(&label)
}

/// Closed-form Jaynes-Cummings doublet in the n-excitation block at detuning
/// Δ = ω_a − ω_c: test oracle for the rwa spectrum.
pub fn jaynes_cummings_doublet(omega_c: f64, omega_a: f64, g: f64, n: usize) -> (f64, f64) {
    let delta = omega_a - omega_c;
    let np1 = (n + 1) as f64;
    let mid = omega_c * np1 + delta / 2.0;
    let rabi = (delta * delta / 4.0 + g * g * np1).sqrt();
    (mid - rabi, mid + rabi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::dense::dense_solve;

    #[test]
    fn jc_resonant_vacuum_doublet_split_by_2g() {
        let g = 0.1;
        let h = build_rabi(1.0, 1.0, g, true, 6).unwrap();
        let spec = dense_solve(&h).unwrap();
        // E0 = 0, then the n = 0 doublet at 1 ± g
        assert!(spec.eigenvalues[0].abs() < 1e-13);
        let split = spec.eigenvalues[2] - spec.eigenvalues[1];
        assert!((split - 2.0 * g).abs() < 1e-13, "split = {split}");
        let (lo, hi) = jaynes_cummings_doublet(1.0, 1.0, g, 0);
        assert!((spec.eigenvalues[1] - lo).abs() < 1e-13);
        assert!((spec.eigenvalues[2] - hi).abs() < 1e-13);
    }

    #[test]
    fn decoupled_spectrum_is_ladder_product() {
        let (wc, wa) = (0.9, 1.3);
        let h = build_rabi(wc, wa, 0.0, true, 3).unwrap();
        let spec = dense_solve(&h).unwrap();
        let mut expected: Vec<f64> = (0..=3)
            .flat_map(|n| [wc * n as f64, wa + wc * n as f64])
            .collect();
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (e, x) in spec.eigenvalues.iter().zip(expected.iter()) {
            assert!((e - x).abs() < 1e-14);
        }
    }

    #[test]
    fn full_rabi_ground_below_rwa_ground() {
        // Bloch-Siegert-type shift: the counter-rotating terms push the
        // ground state strictly down
        let h_full = build_rabi(1.0, 1.0, 0.1, false, 12).unwrap();
        let h_rwa = build_rabi(1.0, 1.0, 0.1, true, 12).unwrap();
        let e_full = dense_solve(&h_full).unwrap().eigenvalues[0];
        let e_rwa = dense_solve(&h_rwa).unwrap().eigenvalues[0];
        assert!(e_full < e_rwa - 1e-6, "full {e_full} vs rwa {e_rwa}");
        assert!(e_rwa.abs() < 1e-13);
    }

    #[test]
    fn tavis_cummings_n1_equals_rabi() {
        for rwa in [true, false] {
            let a = build_rabi(1.0, 0.8, 0.05, rwa, 4).unwrap();
            let b = build_tavis_cummings(1, 1.0, 0.8, 0.05, rwa, 4).unwrap();
            let (da, db) = (a.to_dense(), b.to_dense());
            let diff = (&da - &db).iter().map(|v| v.norm()).fold(0.0, f64::max);
            assert!(diff == 0.0);
        }
    }

    #[test]
    fn tavis_cummings_bright_doublet_and_dark_states() {
        // N = 4 at resonance: bright doublet split by 2g√4, N−1 = 3 dark
        // states pinned at ω_a in the single-excitation sector
        let (n, g, omega) = (4usize, 0.07, 1.0);
        let h = build_tavis_cummings(n, omega, omega, g, true, 2).unwrap();
        let spec = dense_solve(&h).unwrap();
        let sqrt_n = (n as f64).sqrt();
        let lower = omega - g * sqrt_n;
        let upper = omega + g * sqrt_n;
        let found_lower = spec
            .eigenvalues
            .iter()
            .any(|e| (e - lower).abs() < 1e-12);
        let found_upper = spec
            .eigenvalues
            .iter()
            .any(|e| (e - upper).abs() < 1e-12);
        assert!(found_lower && found_upper);
        let dark = spec
            .eigenvalues
            .iter()
            .filter(|e| (**e - omega).abs() < 1e-10)
            .count();
        assert_eq!(dark, n - 1, "dark states at ω_a");
    }
}
