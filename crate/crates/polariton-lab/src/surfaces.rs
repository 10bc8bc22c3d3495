//! Clamped-coordinate energy surfaces.
//!
//! Two partitionings of the dipole-coupled problem:
//!
//! * cavity Born-Oppenheimer surfaces E_i(R, q): nuclear positions R and
//!   photon displacements q are clamped, their kinetic terms dropped
//!   entirely, and the electronic Hamiltonian — including the shifted
//!   oscillator potential Σ (ω²/2)(q − (g/ω) ε·R_tot)² evaluated at the
//!   clamped q — is diagonalized per node;
//! * polaritonic surfaces E_i^pol(R): only nuclear positions are clamped,
//!   the photons stay quantum (Fock-truncated).
//!
//! Non-adiabatic couplings d_ij = ⟨ψ_i|∂ψ_j⟩ come from central finite
//! differences of phase-aligned eigenvectors along one scan axis.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::matter::{matter_dipole_diagonal, matter_hamiltonian, MatterBasis};
use crate::model::{build_length_gauge, GaugeForm, MatterModel, ModeSet};
use crate::operator::OperatorBuilder;
use crate::solver::dense::dense_solve_with_limit;
use crate::solver::lanczos::{solve_lowest_with, LanczosOptions};
use crate::solver::SpectrumResult;

/// What a scan axis clamps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "target", rename_all = "snake_case")]
pub enum AxisTarget {
    /// Position of clamped particle `index` of species `species`.
    ClampedPosition { species: usize, index: usize },
    /// Displacement coordinate q_α of mode `mode` (cavity-BO scans only).
    ModeDisplacement { mode: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct Axis {
    pub name: String,
    pub target: AxisTarget,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn clamped_position(name: &str, species: usize, index: usize, values: Vec<f64>) -> Axis {
        Axis {
            name: name.to_string(),
            target: AxisTarget::ClampedPosition { species, index },
            values,
        }
    }

    pub fn mode_displacement(name: &str, mode: usize, values: Vec<f64>) -> Axis {
        Axis {
            name: name.to_string(),
            target: AxisTarget::ModeDisplacement { mode },
            values,
        }
    }

    pub fn spacing(&self) -> f64 {
        if self.values.len() > 1 {
            self.values[1] - self.values[0]
        } else {
            0.0
        }
    }
}

/// Node where the per-node eigensolve failed; the scan continues.
#[derive(Debug, Clone, Serialize)]
pub struct NodeFlag {
    pub node: usize,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SurfaceGrid {
    pub axes: Vec<Axis>,
    /// energies[(node, i)]: i-th energy at the node, ascending in i.
    #[serde(skip)]
    pub energies: Array2<f64>,
    /// Eigenvector cache per node (dim × k), kept when requested.
    #[serde(skip)]
    pub eigenvectors: Option<Vec<Array2<C64>>>,
    pub flagged: Vec<NodeFlag>,
    pub k: usize,
}

impl SurfaceGrid {
    pub fn n_nodes(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    /// Row-major multi-index of a node (first axis slowest).
    pub fn node_coords(&self, node: usize) -> Vec<usize> {
        let mut rem = node;
        let mut out = vec![0; self.axes.len()];
        for (i, a) in self.axes.iter().enumerate().rev() {
            out[i] = rem % a.values.len();
            rem /= a.values.len();
        }
        out
    }

    pub fn node_index(&self, coords: &[usize]) -> usize {
        let mut idx = 0;
        for (a, &c) in self.axes.iter().zip(coords.iter()) {
            idx = idx * a.values.len() + c;
        }
        idx
    }

    /// Axis values at a node.
    pub fn node_values(&self, node: usize) -> Vec<f64> {
        self.node_coords(node)
            .iter()
            .zip(self.axes.iter())
            .map(|(&c, a)| a.values[c])
            .collect()
    }

    /// Nodes whose energy jump to the next node along `axis` exceeds the
    /// local derivative estimate × spacing × 10: refinement candidates.
    pub fn continuity_flags(&self, axis: usize) -> Vec<usize> {
        let mut flags = Vec::new();
        let h = self.axes[axis].spacing().abs();
        if h == 0.0 {
            return flags;
        }
        for line in self.lines_along(axis) {
            for w in line.windows(3) {
                let (a, b, c) = (w[0], w[1], w[2]);
                for i in 0..self.k {
                    let jump = (self.energies[(c, i)] - self.energies[(b, i)]).abs();
                    let deriv = (self.energies[(b, i)] - self.energies[(a, i)]).abs() / h;
                    if jump > 10.0 * (deriv * h).max(1e-12) {
                        flags.push(b);
                    }
                }
            }
        }
        flags.sort_unstable();
        flags.dedup();
        flags
    }

    /// All 1D node-index lines along one axis.
    pub fn lines_along(&self, axis: usize) -> Vec<Vec<usize>> {
        let n_axis = self.axes[axis].values.len();
        let mut lines = Vec::new();
        let other_sizes: Vec<usize> = self
            .axes
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != axis)
            .map(|(_, a)| a.values.len())
            .collect();
        let n_other: usize = other_sizes.iter().product::<usize>().max(1);
        for flat_other in 0..n_other {
            let mut rem = flat_other;
            let mut coords = vec![0usize; self.axes.len()];
            for (i, size) in other_sizes.iter().enumerate().rev() {
                let ax = if i >= axis { i + 1 } else { i };
                coords[ax] = rem % size;
                rem /= size;
            }
            let mut line = Vec::with_capacity(n_axis);
            for j in 0..n_axis {
                coords[axis] = j;
                line.push(self.node_index(&coords));
            }
            lines.push(line);
        }
        lines
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    pub keep_eigenvectors: bool,
    pub dense_limit: usize,
    pub seed: u64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            keep_eigenvectors: false,
            dense_limit: crate::solver::DENSE_LIMIT_DEFAULT,
            seed: 7,
        }
    }
}

fn solve_k(
    h: &crate::operator::OperatorMatrix,
    k: usize,
    opts: &ScanOptions,
) -> Result<SpectrumResult> {
    if h.dim() <= opts.dense_limit {
        dense_solve_with_limit(h, opts.dense_limit)
    } else {
        solve_lowest_with(
            h,
            k,
            1e-9,
            LanczosOptions {
                seed: opts.seed,
                ..Default::default()
            },
        )
    }
}

/// Cavity Born-Oppenheimer scan: at each node the clamped-R, clamped-q
/// electronic Hamiltonian is solved for the k lowest surfaces. Axes may mix
/// clamped positions and mode displacements; photon kinetic terms are dropped
/// entirely at this level.
pub fn cavity_bo_surface(
    matter: &MatterModel,
    modes: &ModeSet,
    axes: Vec<Axis>,
    k: usize,
    opts: ScanOptions,
) -> Result<SurfaceGrid> {
    validate_axes(matter, modes, &axes, true)?;
    let n_nodes: usize = axes.iter().map(|a| a.values.len()).product();
    let proto = SurfaceGrid {
        axes,
        energies: Array2::zeros((0, 0)),
        eigenvectors: None,
        flagged: Vec::new(),
        k,
    };

    // q values not scanned stay clamped at 0
    let results: Vec<std::result::Result<(Vec<f64>, Option<Array2<C64>>), String>> = (0..n_nodes)
        .into_par_iter()
        .map(|node| {
            let coords = proto.node_coords(node);
            let mut model = matter.clone();
            let mut q_clamp = vec![0.0; modes.n_modes()];
            for (axis, &c) in proto.axes.iter().zip(coords.iter()) {
                match axis.target {
                    AxisTarget::ClampedPosition { species, index } => {
                        model = model
                            .with_clamped_position(species, index, axis.values[c])
                            .map_err(|e| e.to_string())?;
                    }
                    AxisTarget::ModeDisplacement { mode } => {
                        q_clamp[mode] = axis.values[c];
                    }
                }
            }
            let h = clamped_electronic_hamiltonian(&model, modes, &q_clamp)
                .map_err(|e| e.to_string())?;
            let spec = solve_k(&h, k, &opts).map_err(|e| e.to_string())?;
            let energies: Vec<f64> = spec.eigenvalues.iter().take(k).copied().collect();
            let vecs = if opts.keep_eigenvectors {
                spec.eigenvectors
                    .map(|v| v.slice(ndarray::s![.., ..k]).to_owned())
            } else {
                None
            };
            Ok((energies, vecs))
        })
        .collect();

    assemble_grid(proto, results, k, opts.keep_eigenvectors)
}

/// Electronic Hamiltonian at clamped (R, q): matter terms plus the diagonal
/// photonic potential Σ_α (ω_α²/2)(q_α − (g_α/ω_α) ε_α·R_tot)².
fn clamped_electronic_hamiltonian(
    matter: &MatterModel,
    modes: &ModeSet,
    q_clamp: &[f64],
) -> Result<crate::operator::OperatorMatrix> {
    let basis = MatterBasis::new(matter)?;
    let hm = matter_hamiltonian(matter, &basis)?;
    let dipole = matter_dipole_diagonal(matter, &basis);
    let mut b = OperatorBuilder::new(basis.dim());
    for (i, j, v) in hm.entries() {
        b.add(i, j, v);
    }
    for (m, &r) in dipole.iter().enumerate() {
        let mut v = 0.0;
        for (alpha, mode) in modes.modes.iter().enumerate() {
            let shift = q_clamp[alpha] - mode.g / mode.omega * mode.eps() * r;
            v += 0.5 * mode.omega * mode.omega * shift * shift;
        }
        b.add_real(m, m, v);
    }
    b.finalize("clamped electronic Hamiltonian")
}

/// Polaritonic scan: only nuclear positions are clamped; the photon sector
/// stays fully quantum.
pub fn polaritonic_surface(
    matter: &MatterModel,
    modes: &ModeSet,
    axes: Vec<Axis>,
    k: usize,
    opts: ScanOptions,
) -> Result<SurfaceGrid> {
    validate_axes(matter, modes, &axes, false)?;
    let n_nodes: usize = axes.iter().map(|a| a.values.len()).product();
    let proto = SurfaceGrid {
        axes,
        energies: Array2::zeros((0, 0)),
        eigenvectors: None,
        flagged: Vec::new(),
        k,
    };

    let results: Vec<std::result::Result<(Vec<f64>, Option<Array2<C64>>), String>> = (0..n_nodes)
        .into_par_iter()
        .map(|node| {
            let coords = proto.node_coords(node);
            let mut model = matter.clone();
            for (axis, &c) in proto.axes.iter().zip(coords.iter()) {
                if let AxisTarget::ClampedPosition { species, index } = axis.target {
                    model = model
                        .with_clamped_position(species, index, axis.values[c])
                        .map_err(|e| e.to_string())?;
                }
            }
            let h = build_length_gauge(
                &model,
                modes,
                &GaugeForm::LengthGauge {
                    include_self_polarization: true,
                },
                None,
            )
            .map_err(|e| e.to_string())?;
            let spec = solve_k(&h, k, &opts).map_err(|e| e.to_string())?;
            let energies: Vec<f64> = spec.eigenvalues.iter().take(k).copied().collect();
            let vecs = if opts.keep_eigenvectors {
                spec.eigenvectors
                    .map(|v| v.slice(ndarray::s![.., ..k]).to_owned())
            } else {
                None
            };
            Ok((energies, vecs))
        })
        .collect();

    assemble_grid(proto, results, k, opts.keep_eigenvectors)
}

fn validate_axes(
    matter: &MatterModel,
    modes: &ModeSet,
    axes: &[Axis],
    allow_mode_axes: bool,
) -> Result<()> {
    if axes.is_empty() {
        return Err(Error::InvalidArgument("scan needs at least one axis".into()));
    }
    for a in axes {
        if a.values.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "axis '{}' needs at least two nodes",
                a.name
            )));
        }
        match a.target {
            AxisTarget::ClampedPosition { species, index } => {
                let s = matter.species.get(species).ok_or_else(|| {
                    Error::InvalidArgument(format!("axis '{}': no species {species}", a.name))
                })?;
                if s.quantum || index >= s.positions.len() {
                    return Err(Error::InvalidArgument(format!(
                        "axis '{}' must clamp an existing clamped particle",
                        a.name
                    )));
                }
            }
            AxisTarget::ModeDisplacement { mode } => {
                if !allow_mode_axes {
                    return Err(Error::InvalidArgument(format!(
                        "axis '{}': polaritonic scans clamp nuclear coordinates only",
                        a.name
                    )));
                }
                if mode >= modes.n_modes() {
                    return Err(Error::InvalidArgument(format!(
                        "axis '{}': no mode {mode}",
                        a.name
                    )));
                }
            }
        }
    }
    Ok(())
}

fn assemble_grid(
    mut proto: SurfaceGrid,
    results: Vec<std::result::Result<(Vec<f64>, Option<Array2<C64>>), String>>,
    k: usize,
    keep_vectors: bool,
) -> Result<SurfaceGrid> {
    let n_nodes = results.len();
    let mut energies = Array2::<f64>::from_elem((n_nodes, k), f64::NAN);
    let mut vecs: Vec<Array2<C64>> = Vec::new();
    let mut flagged = Vec::new();
    for (node, r) in results.into_iter().enumerate() {
        match r {
            Ok((e, v)) => {
                for (i, &ei) in e.iter().enumerate().take(k) {
                    energies[(node, i)] = ei;
                }
                if keep_vectors {
                    vecs.push(v.ok_or_else(|| {
                        Error::InvalidArgument("solver returned no eigenvectors".into())
                    })?);
                }
            }
            Err(message) => {
                flagged.push(NodeFlag { node, message });
                if keep_vectors {
                    vecs.push(Array2::zeros((0, 0)));
                }
            }
        }
    }
    proto.energies = energies;
    proto.eigenvectors = if keep_vectors { Some(vecs) } else { None };
    proto.flagged = flagged;
    Ok(proto)
}

/// Non-adiabatic coupling tensor along one axis.
#[derive(Debug, Clone)]
pub struct CouplingTensor {
    pub axis: usize,
    /// values[node][(i, j)] = d_ij at the node; NaN where undefined
    /// (endpoints, flagged nodes, degenerate pairs).
    pub values: Vec<Array2<f64>>,
    /// (node, i, j) triples where a degenerate pair made the coupling
    /// undefined.
    pub degenerate: Vec<(usize, usize, usize)>,
}

/// Pairs closer than this are treated as degenerate and their coupling is
/// reported as undefined instead of regularized.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Antisymmetry tolerance for raw central-difference couplings: 1e−8 of the
/// finite-difference scale 1/(2h). The raw estimator violates d_ij = −d_ji
/// at O(h²), so scans must be sampled finely enough to sit below this.
pub fn fd_antisymmetry_tol(h: f64) -> f64 {
    1e-8 / (2.0 * h.abs())
}

/// Central-difference couplings d_ij = ⟨ψ_i|∂ψ_j⟩ along the named axis.
/// Eigenvector phases are first aligned line-by-line (each vector rotated to
/// maximize overlap with its predecessor); the surface must have been
/// computed with `keep_eigenvectors`.
pub fn nonadiabatic_couplings(surface: &mut SurfaceGrid, axis: usize) -> Result<CouplingTensor> {
    if axis >= surface.axes.len() {
        return Err(Error::InvalidArgument(format!("no axis {axis}")));
    }
    let k = surface.k;
    let h = surface.axes[axis].spacing();
    if h == 0.0 {
        return Err(Error::InvalidArgument("axis has no spacing".into()));
    }
    let lines = surface.lines_along(axis);
    {
        let vecs = surface
            .eigenvectors
            .as_mut()
            .ok_or_else(|| Error::InvalidArgument("surface has no eigenvector cache".into()))?;
        for line in &lines {
            align_phases_along(vecs, line, k);
        }
    }
    let vecs = surface.eigenvectors.as_ref().unwrap();

    let n_nodes = surface.energies.nrows();
    let mut values = vec![Array2::<f64>::from_elem((k, k), f64::NAN); n_nodes];
    let mut degenerate = Vec::new();

    for line in &lines {
        for w in line.windows(3) {
            let (prev, node, next) = (w[0], w[1], w[2]);
            if vecs[prev].nrows() == 0 || vecs[node].nrows() == 0 || vecs[next].nrows() == 0 {
                continue; // flagged node somewhere in the stencil
            }
            for i in 0..k {
                for j in 0..k {
                    if i == j {
                        values[node][(i, j)] = 0.0;
                        continue;
                    }
                    let gap = (surface.energies[(node, i)] - surface.energies[(node, j)]).abs();
                    if gap < DEGENERACY_TOL {
                        degenerate.push((node, i, j));
                        continue;
                    }
                    let fwd = overlap(&vecs[node], i, &vecs[next], j);
                    let bwd = overlap(&vecs[node], i, &vecs[prev], j);
                    values[node][(i, j)] = (fwd - bwd).re / (2.0 * h);
                }
            }
        }
    }

    Ok(CouplingTensor {
        axis,
        values,
        degenerate,
    })
}

fn overlap(a: &Array2<C64>, col_a: usize, b: &Array2<C64>, col_b: usize) -> C64 {
    a.column(col_a)
        .iter()
        .zip(b.column(col_b).iter())
        .map(|(x, y)| x.conj() * y)
        .sum()
}

/// Rotate each eigenvector so its overlap with the same state at the previous
/// node along the line is real positive. Idempotent.
fn align_phases_along(vecs: &mut [Array2<C64>], line: &[usize], k: usize) {
    for w in line.windows(2) {
        let (prev, cur) = (w[0], w[1]);
        if vecs[prev].nrows() == 0 || vecs[cur].nrows() == 0 {
            continue;
        }
        for i in 0..k {
            let o = overlap(&vecs[prev], i, &vecs[cur], i);
            let mag = o.norm();
            if mag < 1e-14 {
                continue; // orthogonal crossing; nothing to fix here
            }
            let phase = o / C64::new(mag, 0.0);
            let correction = phase.conj();
            let mut col = vecs[cur].column_mut(i);
            col.iter_mut().for_each(|x| *x *= correction);
        }
    }
}

/// Ground-state column of a per-node eigenvector cache (first surface).
pub fn node_state(surface: &SurfaceGrid, node: usize, state: usize) -> Option<Array1<C64>> {
    surface
        .eigenvectors
        .as_ref()
        .and_then(|v| v.get(node))
        .filter(|m| m.nrows() > 0)
        .map(|m| m.column(state).to_owned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;
    use crate::model::matter::{ExternalPotential, Species};

    fn electron_near_clamped_proton() -> MatterModel {
        MatterModel::new(
            vec![
                Species::quantum("electron", 1.0, -1.0, 1),
                Species::clamped("proton", 1836.0, 1.0, vec![0.0]),
            ],
            Grid1D::new(-10.0, 10.0, 121).unwrap(),
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn decoupled_bo_surface_separates_exactly() {
        // g = 0: E_i(R, q) = E_i^matter(R) + Σ (ω²/2) q² at every node
        let matter = electron_near_clamped_proton();
        let modes = ModeSet::single(1.0, 0.0, 4);
        let r_axis = Axis::clamped_position("R", 1, 0, vec![-0.5, 0.0, 0.5]);
        let q_axis = Axis::mode_displacement("q", 0, vec![-1.0, 0.0, 1.0, 2.0]);
        let surface = cavity_bo_surface(
            &matter,
            &modes,
            vec![r_axis, q_axis],
            3,
            ScanOptions::default(),
        )
        .unwrap();
        assert!(surface.flagged.is_empty());

        for node in 0..surface.n_nodes() {
            let vals = surface.node_values(node);
            let (r, q) = (vals[0], vals[1]);
            let m = matter.with_clamped_position(1, 0, r).unwrap();
            let mb = MatterBasis::new(&m).unwrap();
            let hm = matter_hamiltonian(&m, &mb).unwrap();
            let spec = dense_solve_with_limit(&hm, 4096).unwrap();
            for i in 0..3 {
                let expect = spec.eigenvalues[i] + 0.5 * q * q;
                let got = surface.energies[(node, i)];
                assert!(
                    (got - expect).abs() < 1e-12,
                    "node {node} state {i}: {got} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn bo_minimum_over_q_sits_at_the_stationarity_point() {
        // coupled scan over q at fixed R: the E₀ minimum must sit at
        // q* = (g/ω)⟨ε·R_tot⟩ of the node's own electronic ground state
        let matter = electron_near_clamped_proton();
        let g = 0.3;
        let modes = ModeSet::single(1.0, g, 4);
        let q_values: Vec<f64> = (-40..=40).map(|i| i as f64 * 0.05).collect();
        let q_axis = Axis::mode_displacement("q", 0, q_values.clone());
        let mut surface = cavity_bo_surface(
            &matter,
            &modes,
            vec![q_axis],
            1,
            ScanOptions {
                keep_eigenvectors: true,
                ..Default::default()
            },
        )
        .unwrap();

        // locate the minimum of E0 over q
        let e0: Vec<f64> = (0..surface.n_nodes())
            .map(|n| surface.energies[(n, 0)])
            .collect();
        let min_node = (0..e0.len())
            .min_by(|&a, &b| e0[a].partial_cmp(&e0[b]).unwrap())
            .unwrap();
        let q_min = q_values[min_node];

        // self-consistency: dipole expectation of that node's ground state
        let mb = MatterBasis::new(&matter).unwrap();
        let dip = matter_dipole_diagonal(&matter, &mb);
        let psi = node_state(&surface, min_node, 0).unwrap();
        let r_expect: f64 = psi
            .iter()
            .zip(dip.iter())
            .map(|(c, &d)| c.norm_sqr() * d)
            .sum();
        let q_star = g / 1.0 * r_expect;
        assert!(
            (q_min - q_star).abs() <= 0.05 + 1e-9,
            "q_min {q_min} vs q* {q_star}"
        );
        let _ = nonadiabatic_couplings(&mut surface, 0).unwrap();
    }

    #[test]
    fn polaritonic_decoupled_matches_ladder() {
        let matter = electron_near_clamped_proton();
        let modes = ModeSet::single(0.7, 0.0, 3);
        let axis = Axis::clamped_position("R", 1, 0, vec![-0.4, 0.0, 0.4]);
        let surface =
            polaritonic_surface(&matter, &modes, vec![axis], 4, ScanOptions::default()).unwrap();
        for node in 0..surface.n_nodes() {
            let r = surface.node_values(node)[0];
            let m = matter.with_clamped_position(1, 0, r).unwrap();
            let mb = MatterBasis::new(&m).unwrap();
            let hm = matter_hamiltonian(&m, &mb).unwrap();
            let mat = dense_solve_with_limit(&hm, 4096).unwrap();
            // decoupled ladder: E_j + (n + 1/2)ω, merged ascending
            let mut ladder: Vec<f64> = Vec::new();
            for j in 0..8 {
                for n in 0..4 {
                    ladder.push(mat.eigenvalues[j] + (n as f64 + 0.5) * 0.7);
                }
            }
            ladder.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for i in 0..4 {
                assert!(
                    (surface.energies[(node, i)] - ladder[i]).abs() < 1e-10,
                    "node {node} level {i}"
                );
            }
        }
    }

    #[test]
    fn polaritonic_scan_rejects_mode_axes() {
        let matter = electron_near_clamped_proton();
        let modes = ModeSet::single(1.0, 0.1, 2);
        let axis = Axis::mode_displacement("q", 0, vec![0.0, 0.5]);
        assert!(polaritonic_surface(&matter, &modes, vec![axis], 2, ScanOptions::default())
            .is_err());
    }

    #[test]
    fn couplings_vanish_for_q_scan_at_zero_coupling() {
        // g = 0 along a q axis: matter states are q-independent, so all
        // couplings must vanish identically
        let matter = electron_near_clamped_proton();
        let modes = ModeSet::single(1.0, 0.0, 2);
        let q_axis = Axis::mode_displacement("q", 0, (0..9).map(|i| i as f64 * 0.1).collect());
        let mut surface = cavity_bo_surface(
            &matter,
            &modes,
            vec![q_axis],
            3,
            ScanOptions {
                keep_eigenvectors: true,
                ..Default::default()
            },
        )
        .unwrap();
        let tensor = nonadiabatic_couplings(&mut surface, 0).unwrap();
        for node in 1..surface.n_nodes() - 1 {
            for i in 0..3 {
                for j in 0..3 {
                    let d = tensor.values[node][(i, j)];
                    assert!(d.abs() < 1e-10, "d_{i}{j} at node {node} = {d}");
                }
            }
        }
    }

    #[test]
    fn diagonal_couplings_vanish_and_antisymmetry_holds() {
        // a genuinely R-dependent scan: electron bound to a moving proton.
        // The raw central-difference estimator violates antisymmetry at
        // O(h²), so the spacing must be fine enough for the defect to sit
        // below fd_antisymmetry_tol.
        let matter = electron_near_clamped_proton()
            .with_potential(ExternalPotential::Harmonic { omega: 0.5, center: 0.0 });
        let modes = ModeSet::single(1.0, 0.1, 2);
        let h = 1e-3;
        let axis = Axis::clamped_position(
            "R",
            1,
            0,
            (0..13).map(|i| (i as f64 - 6.0) * h).collect(),
        );
        let mut surface = polaritonic_surface(
            &matter,
            &modes,
            vec![axis],
            3,
            ScanOptions {
                keep_eigenvectors: true,
                ..Default::default()
            },
        )
        .unwrap();
        let tensor = nonadiabatic_couplings(&mut surface, 0).unwrap();
        let fd_tol = fd_antisymmetry_tol(h);
        let mut some_nonzero = false;
        for node in 1..surface.n_nodes() - 1 {
            for i in 0..3 {
                assert_eq!(tensor.values[node][(i, i)], 0.0);
                for j in 0..3 {
                    if i != j {
                        let dij = tensor.values[node][(i, j)];
                        let dji = tensor.values[node][(j, i)];
                        if dij.is_nan() {
                            continue;
                        }
                        some_nonzero |= dij.abs() > 1e-6;
                        assert!(
                            (dij + dji).abs() <= fd_tol,
                            "antisymmetry violated at node {node}: d_{i}{j} = {dij}, d_{j}{i} = {dji}"
                        );
                    }
                }
            }
        }
        assert!(some_nonzero, "scan produced no nontrivial couplings");
    }
}
