//! Independent analytic and brute-force references.
//!
//! The all-harmonic (bilinear) specialization of the length-gauge Hamiltonian
//! is exactly solvable: with unit-mass harmonic dipoles x_j and modes q_α the
//! potential is a quadratic form
//!
//! ```text
//! V_xx[j,j'] = δ_jj' ω0_j² + Σ_α g_jα g_j'α      (self-polarization part)
//! V_xq[j,α]  = −g_jα ω_α
//! V_qq[α,β]  = δ_αβ ω_α²
//! ```
//!
//! whose eigenvalues μ are squared normal-mode frequencies. With the
//! self-polarization term the form is ω0-diagonal plus Σ_α v_α v_αᵀ with
//! v_α = (−g_1α, …, −g_Jα, 0, …, ω_α, …, 0): manifestly positive definite for
//! every coupling. Without it, μ can turn negative — the energy is not
//! bounded from below and no basis-set limit exists, which the instability
//! scan demonstrates on the grid model.

use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock;
use crate::grid::Grid1D;
use crate::model::{build_length_gauge, GaugeForm, MatterModel, ModeSet};
use crate::operator::OperatorBuilder;
use crate::solver::dense::{dense_solve_with_limit, eigh_real};
use crate::solver::lanczos::{solve_lowest_with, LanczosOptions};

/// Harmonic matter dipoles bilinearly coupled to harmonic modes.
#[derive(Debug, Clone)]
pub struct BilinearModel {
    /// Matter dipole frequencies ω0_j (unit masses).
    pub matter_freqs: Vec<f64>,
    /// Mode frequencies ω_α.
    pub mode_freqs: Vec<f64>,
    /// couplings[(j, α)] = g_jα.
    pub couplings: Array2<f64>,
    pub include_self_polarization: bool,
}

impl BilinearModel {
    pub fn new(
        matter_freqs: Vec<f64>,
        mode_freqs: Vec<f64>,
        couplings: Array2<f64>,
        include_self_polarization: bool,
    ) -> Result<BilinearModel> {
        if couplings.nrows() != matter_freqs.len() || couplings.ncols() != mode_freqs.len() {
            return Err(Error::InvalidArgument(format!(
                "coupling matrix {}×{} does not match {} dipoles × {} modes",
                couplings.nrows(),
                couplings.ncols(),
                matter_freqs.len(),
                mode_freqs.len()
            )));
        }
        if matter_freqs.iter().chain(mode_freqs.iter()).any(|&w| !(w > 0.0)) {
            return Err(Error::InvalidModel(
                "bilinear model frequencies must be positive".into(),
            ));
        }
        Ok(BilinearModel {
            matter_freqs,
            mode_freqs,
            couplings,
            include_self_polarization,
        })
    }

    /// N identical dipoles (ω0, g) against a single mode ω.
    pub fn collective(n_dipoles: usize, omega0: f64, omega: f64, g: f64) -> BilinearModel {
        let couplings = Array2::from_elem((n_dipoles, 1), g);
        BilinearModel {
            matter_freqs: vec![omega0; n_dipoles],
            mode_freqs: vec![omega],
            couplings,
            include_self_polarization: true,
        }
    }

    fn form_matrix(&self) -> Array2<f64> {
        let j = self.matter_freqs.len();
        let m = self.mode_freqs.len();
        let n = j + m;
        let mut v = Array2::<f64>::zeros((n, n));
        for (a, &w0) in self.matter_freqs.iter().enumerate() {
            v[(a, a)] = w0 * w0;
        }
        for (al, &w) in self.mode_freqs.iter().enumerate() {
            v[(j + al, j + al)] = w * w;
        }
        for a in 0..j {
            for al in 0..m {
                let c = -self.couplings[(a, al)] * self.mode_freqs[al];
                v[(a, j + al)] += c;
                v[(j + al, a)] += c;
            }
        }
        if self.include_self_polarization {
            for a in 0..j {
                for b in 0..j {
                    let mut s = 0.0;
                    for al in 0..m {
                        s += self.couplings[(a, al)] * self.couplings[(b, al)];
                    }
                    v[(a, b)] += s;
                }
            }
        }
        v
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NormalModeResult {
    /// Real eigenfrequencies √μ in ascending order.
    pub frequencies: Vec<f64>,
    /// |μ|^(1/2) of each negative eigenvalue: growth rates of the unstable
    /// directions. Empty for a stable form.
    pub unstable_rates: Vec<f64>,
    pub stable: bool,
}

/// Squared-frequency eigenvalues below this count as unstable rather than as
/// rounding noise.
const INSTABILITY_TOL: f64 = -1e-12;

/// Exact normal-mode frequencies of the bilinear model; an indefinite form is
/// an instability result, not an error.
pub fn bilinear_normal_modes(model: &BilinearModel) -> Result<NormalModeResult> {
    let v = model.form_matrix();
    let (mu, _) = eigh_real(v)?;
    let mut frequencies = Vec::new();
    let mut unstable_rates = Vec::new();
    for m in mu {
        if m < INSTABILITY_TOL {
            unstable_rates.push((-m).sqrt());
        } else {
            frequencies.push(m.max(0.0).sqrt());
        }
    }
    frequencies.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let stable = unstable_rates.is_empty();
    Ok(NormalModeResult {
        frequencies,
        unstable_rates,
        stable,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EdOracleLevel {
    pub n_max: usize,
    pub dim: usize,
    /// ED single-excitation gaps matched (ascending) to the oracle
    /// frequencies.
    pub gaps: Vec<f64>,
    /// max_j |gap_j − ν_j|.
    pub max_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EdOracleReport {
    pub oracle_frequencies: Vec<f64>,
    pub levels: Vec<EdOracleLevel>,
    pub final_deviation: f64,
    /// Ground energy per rung; diverges on unstable models.
    pub ground_energies: Vec<f64>,
    pub oracle_stable: bool,
}

/// Fock-space exact diagonalization of the bilinear model along an n_max
/// ladder, against the normal-mode oracle.
///
/// Every coordinate (matter dipole and photon mode alike) is expanded in its
/// own oscillator ladder basis; the single-excitation gaps E_i − E_0 must
/// converge to the oracle frequencies from above as n_max grows.
pub fn ed_vs_oracle(model: &BilinearModel, n_max_ladder: &[usize]) -> Result<EdOracleReport> {
    if n_max_ladder.is_empty() {
        return Err(Error::InvalidArgument("empty n_max ladder".into()));
    }
    let oracle = bilinear_normal_modes(model)?;
    let n_coords = model.matter_freqs.len() + model.mode_freqs.len();

    let mut levels = Vec::new();
    let mut ground_energies = Vec::new();
    for &n_max in n_max_ladder {
        let h = bilinear_fock_hamiltonian(model, n_max)?;
        let dim = h.dim();
        let want = n_coords + 1;
        let spec = dense_solve_with_limit(&h, 4096).or_else(|_| {
            solve_lowest_with(
                &h,
                want + 2,
                1e-10,
                LanczosOptions::default(),
            )
        })?;
        let e0 = spec.eigenvalues[0];
        ground_energies.push(e0);

        // match each oracle frequency to the closest unused excitation gap
        let gaps_all: Vec<f64> = spec.eigenvalues[1..spec.len().min(want + 2)]
            .iter()
            .map(|e| e - e0)
            .collect();
        let mut used = vec![false; gaps_all.len()];
        let mut gaps = Vec::with_capacity(oracle.frequencies.len());
        let mut max_dev = 0.0f64;
        for &nu in &oracle.frequencies {
            let mut best: Option<(usize, f64)> = None;
            for (i, &g) in gaps_all.iter().enumerate() {
                if used[i] {
                    continue;
                }
                let d = (g - nu).abs();
                if best.map_or(true, |(_, bd)| d < bd) {
                    best = Some((i, d));
                }
            }
            if let Some((i, d)) = best {
                used[i] = true;
                gaps.push(gaps_all[i]);
                max_dev = max_dev.max(d);
            }
        }
        levels.push(EdOracleLevel {
            n_max,
            dim,
            gaps,
            max_deviation: max_dev,
        });
    }

    let final_deviation = levels.last().map(|l| l.max_deviation).unwrap_or(f64::NAN);
    Ok(EdOracleReport {
        oracle_frequencies: oracle.frequencies,
        levels,
        final_deviation,
        ground_energies,
        oracle_stable: oracle.stable,
    })
}

/// Assemble the bilinear Hamiltonian in a product of oscillator ladder bases,
/// one per coordinate, all truncated at n_max.
fn bilinear_fock_hamiltonian(
    model: &BilinearModel,
    n_max: usize,
) -> Result<crate::operator::OperatorMatrix> {
    let j = model.matter_freqs.len();
    let m = model.mode_freqs.len();
    let freqs: Vec<f64> = model
        .matter_freqs
        .iter()
        .chain(model.mode_freqs.iter())
        .copied()
        .collect();
    let basis = fock::PhotonBasis::new(&vec![n_max; j + m]);
    let dim = basis.dim();
    if dim > crate::operator::MAX_ASSEMBLY_DIM {
        return Err(Error::DimensionOverflow {
            requested: dim,
            limit: crate::operator::MAX_ASSEMBLY_DIM,
        });
    }
    let mut b = OperatorBuilder::new(dim);

    // Σ ω_c (n_c + 1/2) for every coordinate
    for p in 0..dim {
        let occ = basis.occupation(p);
        let e: f64 = freqs
            .iter()
            .zip(occ.iter())
            .map(|(w, &n)| w * (n as f64 + 0.5))
            .sum();
        b.add_real(p, p, e);
    }

    // bilinear couplings −ω_α g_jα x_j q_α with x = (a+a†)/√(2ω)
    let amp = fock::field_amplitude(n_max);
    for a in 0..j {
        for al in 0..m {
            let g = model.couplings[(a, al)];
            if g == 0.0 {
                continue;
            }
            let w_m = model.mode_freqs[al];
            let c = -w_m * g / (2.0 * (model.matter_freqs[a] * w_m).sqrt());
            add_two_coordinate_product(&mut b, &basis, a, j + al, &amp, c);
        }
    }

    // self-polarization (1/2)(Σ_j g_jα x_j)² per mode
    if model.include_self_polarization {
        let x2 = fock::field_amplitude(n_max); // reused for both factors
        for al in 0..m {
            for a1 in 0..j {
                for a2 in 0..j {
                    let g1 = model.couplings[(a1, al)];
                    let g2 = model.couplings[(a2, al)];
                    if g1 == 0.0 || g2 == 0.0 {
                        continue;
                    }
                    if a1 == a2 {
                        // x² on one coordinate: exact second-moment elements
                        let q2 = fock::q_squared(model.matter_freqs[a1], n_max);
                        let scale = 0.5 * g1 * g2;
                        for (p, q, v) in basis.lift_mode_op_real(a1, &q2) {
                            b.add(p, q, v * scale);
                        }
                    } else {
                        let norm = (2.0 * model.matter_freqs[a1]).sqrt()
                            * (2.0 * model.matter_freqs[a2]).sqrt();
                        add_two_coordinate_product(&mut b, &basis, a1, a2, &x2, 0.5 * g1 * g2 / norm);
                    }
                }
            }
        }
    }

    b.finalize("bilinear Fock Hamiltonian")
}

/// Add c · A_i ⊗ A_j (i ≠ j) where A is a single-coordinate real operator.
fn add_two_coordinate_product(
    b: &mut OperatorBuilder,
    basis: &fock::PhotonBasis,
    coord_i: usize,
    coord_j: usize,
    op: &Array2<f64>,
    c: f64,
) {
    assert_ne!(coord_i, coord_j);
    let d = op.nrows();
    for p in 0..basis.dim() {
        let occ = basis.occupation(p);
        let (ni, nj) = (occ[coord_i], occ[coord_j]);
        for mi in 0..d {
            let vi = op[(mi, ni)];
            if vi == 0.0 {
                continue;
            }
            for mj in 0..d {
                let vj = op[(mj, nj)];
                if vj == 0.0 {
                    continue;
                }
                let mut target = occ.clone();
                target[coord_i] = mi;
                target[coord_j] = mj;
                b.add_real(basis.flat(&target), p, c * vi * vj);
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CollectiveShiftReport {
    pub n_dipoles: usize,
    pub bare_omega: f64,
    /// Top hybridized branch carrying photon weight: grows like
    /// √(ω² + N g² + …), the size-extensive blue shift of the cavity
    /// resonance.
    pub dressed_omega: f64,
    pub shift: f64,
    /// Upper − lower hybridized branch distance (the polariton splitting).
    pub splitting: f64,
    /// Collective coupling g√N driving the size-extensive growth.
    pub collective_coupling: f64,
    /// Set when the dressed frequency exceeds twice the bare one — a
    /// blue-shift regime incompatible with observed cavity spectra.
    pub exceeds_twice_bare: bool,
}

/// Photon weight below which a normal mode counts as dark.
const BRIGHT_WEIGHT_TOL: f64 = 1e-9;

/// Dressed-mode frequency and splitting for N identical dipoles on one mode.
/// With N identical couplings the N−1 dark combinations stay exactly at ω0;
/// the two bright branches hybridize matter and photon.
pub fn collective_mode_shift(
    n_dipoles: usize,
    omega0: f64,
    omega: f64,
    g: f64,
) -> Result<CollectiveShiftReport> {
    if n_dipoles == 0 {
        return Ok(CollectiveShiftReport {
            n_dipoles: 0,
            bare_omega: omega,
            dressed_omega: omega,
            shift: 0.0,
            splitting: 0.0,
            collective_coupling: 0.0,
            exceeds_twice_bare: false,
        });
    }
    let model = BilinearModel::collective(n_dipoles, omega0, omega, g);
    let v = model.form_matrix();
    let j = n_dipoles;
    let (mu, vecs) = eigh_real(v)?;

    let mut bright: Vec<f64> = mu
        .iter()
        .enumerate()
        .filter(|(k, _)| {
            let w = vecs[(j, *k)] * vecs[(j, *k)];
            w > BRIGHT_WEIGHT_TOL
        })
        .map(|(_, &m)| m.max(0.0).sqrt())
        .collect();
    bright.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let dressed = bright.last().copied().unwrap_or(omega);
    let splitting = if bright.len() >= 2 {
        bright[bright.len() - 1] - bright[0]
    } else {
        0.0
    };

    Ok(CollectiveShiftReport {
        n_dipoles,
        bare_omega: omega,
        dressed_omega: dressed,
        shift: dressed - omega,
        splitting,
        collective_coupling: g * (n_dipoles as f64).sqrt(),
        exceeds_twice_bare: dressed > 2.0 * omega,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct InstabilityRung {
    /// Half-extent of the box: the grid spans [−extent, extent].
    pub extent: f64,
    pub n_points: usize,
    pub n_max: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct InstabilityRow {
    pub extent: f64,
    pub n_points: usize,
    pub n_max: usize,
    pub dim: usize,
    pub ground_energy: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InstabilityReport {
    pub include_self_polarization: bool,
    pub rows: Vec<InstabilityRow>,
    /// E₀(rung i) − E₀(rung i+1): positive when the energy keeps dropping.
    pub decrements: Vec<f64>,
    /// 10% of the first decrement: the scale-free descent threshold δ.
    pub delta_threshold: f64,
    /// Successive |ΔE| decreasing and the final one below 1e−8.
    pub cauchy: bool,
    pub final_delta_abs: f64,
    /// Strictly decreasing energies with non-shrinking decrements, each
    /// above δ.
    pub unbounded_descent: bool,
}

/// Ground energy along a basis-doubling ladder with the self-polarization
/// term kept or dropped. The matter template supplies the particle content
/// and potential; each rung rebuilds its grid on [−extent, extent] and sets
/// every mode cutoff to the rung's n_max.
pub fn instability_scan(
    matter_template: &MatterModel,
    modes: &ModeSet,
    ladder: &[InstabilityRung],
    include_self_polarization: bool,
    seed: u64,
) -> Result<InstabilityReport> {
    if ladder.len() < 2 {
        return Err(Error::InvalidArgument(
            "instability scan needs at least two rungs".into(),
        ));
    }
    let mut rows = Vec::with_capacity(ladder.len());
    for rung in ladder {
        let grid = Grid1D::new(-rung.extent, rung.extent, rung.n_points)?;
        let m = matter_template.with_grid(grid);
        let ms = modes.with_n_max(rung.n_max);
        let h = build_length_gauge(
            &m,
            &ms,
            &GaugeForm::LengthGauge {
                include_self_polarization,
            },
            None,
        )?;
        let opts = LanczosOptions {
            max_iter_per_pass: 1200,
            seed,
            ..Default::default()
        };
        let e0 = solve_lowest_with(&h, 1, 1e-9, opts)?.eigenvalues[0];
        rows.push(InstabilityRow {
            extent: rung.extent,
            n_points: rung.n_points,
            n_max: rung.n_max,
            dim: h.dim(),
            ground_energy: e0,
        });
    }

    let decrements: Vec<f64> = rows
        .windows(2)
        .map(|w| w[0].ground_energy - w[1].ground_energy)
        .collect();
    let delta_threshold = 0.1 * decrements[0].abs();
    let abs_deltas: Vec<f64> = decrements.iter().map(|d| d.abs()).collect();
    let final_delta_abs = *abs_deltas.last().unwrap();
    let cauchy = abs_deltas.windows(2).all(|w| w[1] <= w[0]) && final_delta_abs < 1e-8;
    let unbounded_descent = decrements.iter().all(|&d| d > delta_threshold)
        && decrements.windows(2).all(|w| w[1] >= w[0]);

    Ok(InstabilityReport {
        include_self_polarization,
        rows,
        decrements,
        delta_threshold,
        cauchy,
        final_delta_abs,
        unbounded_descent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoupled_normal_modes_are_the_bare_frequencies() {
        let model = BilinearModel::new(
            vec![0.8, 1.2],
            vec![1.0],
            Array2::zeros((2, 1)),
            true,
        )
        .unwrap();
        let nm = bilinear_normal_modes(&model).unwrap();
        assert!(nm.stable);
        let expect = [0.8, 1.0, 1.2];
        for (f, x) in nm.frequencies.iter().zip(expect.iter()) {
            assert!((f - x).abs() < 1e-13);
        }
    }

    #[test]
    fn resonant_pair_splits_symmetrically_to_second_order() {
        // closed-form 2×2: V = [[1 + g², −g], [−g, 1]] for ω0 = ω = 1
        let g = 0.1;
        let model = BilinearModel::new(
            vec![1.0],
            vec![1.0],
            Array2::from_elem((1, 1), g),
            true,
        )
        .unwrap();
        let nm = bilinear_normal_modes(&model).unwrap();
        let h = g * g / 2.0;
        let disc = (h * h + g * g).sqrt();
        let mu_lo = 1.0 + h - disc;
        let mu_hi = 1.0 + h + disc;
        assert!((nm.frequencies[0] - mu_lo.sqrt()).abs() < 1e-13);
        assert!((nm.frequencies[1] - mu_hi.sqrt()).abs() < 1e-13);
        // symmetric about 1 to O(g²)
        let mid = (nm.frequencies[0] + nm.frequencies[1]) / 2.0;
        assert!((mid - 1.0).abs() < g * g);
    }

    #[test]
    fn dropping_self_polarization_destabilizes_strong_coupling() {
        // without the quadratic counter-term the form turns indefinite once
        // g > ω0
        let model = BilinearModel::new(
            vec![0.3],
            vec![1.0],
            Array2::from_elem((1, 1), 0.5),
            false,
        )
        .unwrap();
        let nm = bilinear_normal_modes(&model).unwrap();
        assert!(!nm.stable);
        assert_eq!(nm.unstable_rates.len(), 1);

        // the same couplings with self-polarization stay positive definite
        let model_on = BilinearModel::new(
            vec![0.3],
            vec![1.0],
            Array2::from_elem((1, 1), 0.5),
            true,
        )
        .unwrap();
        assert!(bilinear_normal_modes(&model_on).unwrap().stable);
    }

    #[test]
    fn permutation_symmetry_of_dipole_labels() {
        let mut c = Array2::zeros((3, 1));
        c[(0, 0)] = 0.05;
        c[(1, 0)] = 0.08;
        c[(2, 0)] = 0.03;
        let a = BilinearModel::new(vec![0.9, 1.1, 1.3], vec![1.0], c, true).unwrap();
        let mut c2 = Array2::zeros((3, 1));
        c2[(0, 0)] = 0.03;
        c2[(1, 0)] = 0.05;
        c2[(2, 0)] = 0.08;
        let b = BilinearModel::new(vec![1.3, 0.9, 1.1], vec![1.0], c2, true).unwrap();
        let fa = bilinear_normal_modes(&a).unwrap().frequencies;
        let fb = bilinear_normal_modes(&b).unwrap().frequencies;
        for (x, y) in fa.iter().zip(fb.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn ed_gaps_converge_to_oracle_from_above() {
        let model = BilinearModel::new(
            vec![1.0],
            vec![1.0],
            Array2::from_elem((1, 1), 0.1),
            true,
        )
        .unwrap();
        let report = ed_vs_oracle(&model, &[2, 4, 8, 16]).unwrap();
        assert!(report.oracle_stable);
        // monotone convergence from above under basis enlargement
        for w in report.levels.windows(2) {
            assert!(w[1].max_deviation <= w[0].max_deviation + 1e-13);
        }
        assert!(
            report.final_deviation < 1e-8,
            "final deviation {:.3e}",
            report.final_deviation
        );
        // g = 0 agrees exactly at any cutoff
        let free = BilinearModel::new(vec![1.0], vec![1.3], Array2::zeros((1, 1)), true).unwrap();
        let r = ed_vs_oracle(&free, &[1]).unwrap();
        assert!(r.final_deviation < 1e-12);
    }

    #[test]
    fn collective_splitting_scales_as_sqrt_n() {
        let r1 = collective_mode_shift(1, 1.0, 1.0, 0.05).unwrap();
        let r4 = collective_mode_shift(4, 1.0, 1.0, 0.05).unwrap();
        let ratio = r4.splitting / r1.splitting;
        // √4 = 2 up to O(g²) corrections from the self-polarization term
        assert!((ratio - 2.0).abs() < 0.01, "ratio {ratio}");
        assert_eq!(collective_mode_shift(0, 1.0, 1.0, 0.05).unwrap().shift, 0.0);
    }

    #[test]
    fn huge_ensembles_blue_shift_beyond_twice_bare() {
        // size extensivity: with enough coherently coupled dipoles the
        // dressed mode exceeds 2ω (expected near N g² ≈ 3ω²)
        let g = 0.2;
        let mut n = 1usize;
        loop {
            let r = collective_mode_shift(n, 1.0, 1.0, g).unwrap();
            if r.exceeds_twice_bare {
                break;
            }
            n *= 2;
            assert!(n <= 1 << 10, "no blue-shift regime found");
        }
        // and the shift grows monotonically with N
        let s1 = collective_mode_shift(8, 1.0, 1.0, g).unwrap().shift;
        let s2 = collective_mode_shift(32, 1.0, 1.0, g).unwrap().shift;
        assert!(s2 > s1 && s1 > 0.0);
    }
}
