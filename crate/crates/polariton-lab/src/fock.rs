//! Truncated bosonic Fock spaces and ladder-operator matrix elements.
//!
//! Each photon mode α is represented on the number basis {|0⟩ … |n_max⟩}.
//! The displacement coordinate and its conjugate momentum follow the
//! oscillator convention
//!
//! ```text
//! q = (a + a†) / sqrt(2ω),    p = i sqrt(ω/2) (a† − a),
//! ```
//!
//! so that the mode Hamiltonian p²/2 + ω²q²/2 equals ω(a†a + 1/2). Second
//! moments (q², p²) use exact matrix elements on the truncated space rather
//! than squares of truncated matrices, which keeps vacuum expectation values
//! exact at any cutoff.

use ndarray::Array2;
use num_complex::Complex64 as C64;

/// a: lowering operator on a (n_max+1)-dimensional number basis.
pub fn lowering(n_max: usize) -> Array2<f64> {
    let d = n_max + 1;
    let mut a = Array2::zeros((d, d));
    for n in 1..d {
        a[(n - 1, n)] = (n as f64).sqrt();
    }
    a
}

/// a†a.
pub fn number(n_max: usize) -> Array2<f64> {
    let d = n_max + 1;
    Array2::from_diag(&ndarray::Array1::from_iter((0..d).map(|n| n as f64)))
}

/// a + a† (dimensionless field amplitude).
pub fn field_amplitude(n_max: usize) -> Array2<f64> {
    let a = lowering(n_max);
    &a + &a.t()
}

/// Displacement coordinate q = (a + a†)/√(2ω).
pub fn displacement_q(omega: f64, n_max: usize) -> Array2<f64> {
    field_amplitude(n_max) * (1.0 / (2.0 * omega).sqrt())
}

/// Conjugate momentum p = i√(ω/2)(a† − a); purely imaginary entries.
pub fn momentum_p(omega: f64, n_max: usize) -> Array2<C64> {
    let d = n_max + 1;
    let s = (omega / 2.0).sqrt();
    let mut p = Array2::zeros((d, d));
    for n in 1..d {
        let v = s * (n as f64).sqrt();
        // i (a† − a): ⟨n|·|n−1⟩ = i√n, ⟨n−1|·|n⟩ = −i√n
        p[(n, n - 1)] = C64::new(0.0, v);
        p[(n - 1, n)] = C64::new(0.0, -v);
    }
    p
}

/// q² with exact truncated-space matrix elements:
/// (a² + a†² + 2a†a + 1)/(2ω).
pub fn q_squared(omega: f64, n_max: usize) -> Array2<f64> {
    let d = n_max + 1;
    let mut m = Array2::zeros((d, d));
    for n in 0..d {
        m[(n, n)] = (2.0 * n as f64 + 1.0) / (2.0 * omega);
        if n + 2 < d {
            let v = ((n + 1) as f64 * (n + 2) as f64).sqrt() / (2.0 * omega);
            m[(n, n + 2)] = v;
            m[(n + 2, n)] = v;
        }
    }
    m
}

/// p² with exact truncated-space matrix elements:
/// (ω/2)(2a†a + 1 − a² − a†²).
pub fn p_squared(omega: f64, n_max: usize) -> Array2<f64> {
    let d = n_max + 1;
    let mut m = Array2::zeros((d, d));
    for n in 0..d {
        m[(n, n)] = omega * (2.0 * n as f64 + 1.0) / 2.0;
        if n + 2 < d {
            let v = -omega * ((n + 1) as f64 * (n + 2) as f64).sqrt() / 2.0;
            m[(n, n + 2)] = v;
            m[(n + 2, n)] = v;
        }
    }
    m
}

/// Photon parity (−1)^n on one mode.
pub fn mode_parity(n_max: usize) -> Array2<f64> {
    let d = n_max + 1;
    Array2::from_diag(&ndarray::Array1::from_iter(
        (0..d).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }),
    ))
}

/// Tensor-product index bookkeeping for a set of truncated modes.
///
/// Occupations are stored row-major with mode 0 slowest, so
/// `flat = Σ_α n_α · stride_α` with `stride_{M−1} = 1`.
#[derive(Debug, Clone)]
pub struct PhotonBasis {
    dims: Vec<usize>,
    strides: Vec<usize>,
    dim: usize,
}

impl PhotonBasis {
    /// `n_maxes[α]` is the Fock cutoff of mode α (dimension n_max + 1).
    pub fn new(n_maxes: &[usize]) -> PhotonBasis {
        let dims: Vec<usize> = n_maxes.iter().map(|&n| n + 1).collect();
        let mut strides = vec![1usize; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        let dim = dims.iter().product::<usize>().max(1);
        PhotonBasis { dims, strides, dim }
    }

    pub fn n_modes(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode_dim(&self, mode: usize) -> usize {
        self.dims[mode]
    }

    pub fn occupation(&self, flat: usize) -> Vec<usize> {
        debug_assert!(flat < self.dim);
        self.dims
            .iter()
            .zip(self.strides.iter())
            .map(|(&d, &s)| (flat / s) % d)
            .collect()
    }

    pub fn flat(&self, occ: &[usize]) -> usize {
        debug_assert_eq!(occ.len(), self.dims.len());
        occ.iter()
            .zip(self.strides.iter())
            .map(|(&n, &s)| n * s)
            .sum()
    }

    /// All (row, col, value) triplets of a single-mode operator lifted to the
    /// full photon space (identity on the other modes).
    pub fn lift_mode_op(&self, mode: usize, op: &Array2<C64>) -> Vec<(usize, usize, C64)> {
        let d = self.dims[mode];
        assert_eq!(op.nrows(), d);
        let stride = self.strides[mode];
        let outer = self.dim / d;
        let mut out = Vec::new();
        for (m, n) in (0..d).flat_map(|m| (0..d).map(move |n| (m, n))) {
            let v = op[(m, n)];
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            // enumerate all occupations of the other modes
            for rest in 0..outer {
                let (hi, lo) = (rest / stride, rest % stride);
                let base = hi * stride * d + lo;
                out.push((base + m * stride, base + n * stride, v));
            }
        }
        out
    }

    /// Real-matrix convenience wrapper around [`Self::lift_mode_op`].
    pub fn lift_mode_op_real(&self, mode: usize, op: &Array2<f64>) -> Vec<(usize, usize, C64)> {
        self.lift_mode_op(mode, &op.mapv(|v| C64::new(v, 0.0)))
    }

    /// Joint photon parity Π_α (−1)^{n_α} as a diagonal.
    pub fn parity_diagonal(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|p| {
                let occ = self.occupation(p);
                if occ.iter().sum::<usize>() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ladder_commutator_below_cutoff() {
        let n_max = 6;
        let a = lowering(n_max);
        let comm = a.dot(&a.t()) - a.t().dot(&a);
        // [a, a†] = 1 except in the top corner where truncation bites
        for n in 0..n_max {
            assert!((comm[(n, n)] - 1.0).abs() < 1e-14);
        }
        assert!((comm[(n_max, n_max)] + n_max as f64).abs() < 1e-12);
    }

    #[test]
    fn vacuum_moments_are_exact() {
        let omega = 0.7;
        let q2 = q_squared(omega, 3);
        let p2 = p_squared(omega, 3);
        assert!((q2[(0, 0)] - 1.0 / (2.0 * omega)).abs() < 1e-15);
        assert!((p2[(0, 0)] - omega / 2.0).abs() < 1e-15);
    }

    #[test]
    fn mode_hamiltonian_is_number_ladder() {
        let omega = 1.3;
        let n_max = 5;
        let h = p_squared(omega, n_max) * 0.5 + q_squared(omega, n_max) * (omega * omega / 2.0);
        for n in 0..=n_max {
            assert!((h[(n, n)] - omega * (n as f64 + 0.5)).abs() < 1e-12);
        }
        // off-diagonal Δn = ±2 elements cancel between p² and ω²q²
        for n in 0..=n_max.saturating_sub(2) {
            assert!(h[(n, n + 2)].abs() < 1e-14);
        }
    }

    #[test]
    fn lift_is_identity_on_other_modes() {
        let basis = PhotonBasis::new(&[2, 1]);
        let num = number(2).mapv(|v| C64::new(v, 0.0));
        let lifted = lift_to_dense(&basis, 0, &num);
        for p in 0..basis.dim() {
            let occ = basis.occupation(p);
            assert!((lifted[(p, p)].re - occ[0] as f64).abs() < 1e-15);
        }
    }

    fn lift_to_dense(basis: &PhotonBasis, mode: usize, op: &Array2<C64>) -> Array2<C64> {
        let mut m = Array2::zeros((basis.dim(), basis.dim()));
        for (i, j, v) in basis.lift_mode_op(mode, op) {
            m[(i, j)] += v;
        }
        m
    }

    proptest! {
        #[test]
        fn occupation_flat_roundtrip(n1 in 0usize..4, n2 in 0usize..3, n3 in 0usize..5) {
            let basis = PhotonBasis::new(&[3, 2, 4]);
            let occ = vec![n1, n2, n3];
            let flat = basis.flat(&occ);
            prop_assert!(flat < basis.dim());
            prop_assert_eq!(basis.occupation(flat), occ);
        }

        #[test]
        fn flat_occupation_roundtrip(flat in 0usize..60) {
            let basis = PhotonBasis::new(&[3, 2, 4]);
            prop_assert_eq!(basis.dim(), 60);
            let occ = basis.occupation(flat);
            prop_assert_eq!(basis.flat(&occ), flat);
        }
    }
}
