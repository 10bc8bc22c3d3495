//! Few-particle matter models on a 1D grid.
//!
//! Quantum particles live on a uniform Dirichlet grid; clamped species enter
//! as fixed point charges (parameters, not basis dimensions). All two-body
//! interactions use the soft-Coulomb kernel
//!
//! ```text
//! w(x, x') = Z Z' / sqrt((x − x')² + a²),
//! ```
//!
//! the standard regularization of the singular 1D Coulomb interaction.
//! Identical quantum particles are spinless fermions: the basis keeps only
//! strictly increasing grid-index tuples within a species (antisymmetrized
//! product grid).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{fd_kinetic_entries, sine_spectral_kinetic, Grid1D, KineticScheme};
use crate::operator::{OperatorBuilder, OperatorMatrix};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Species {
    pub name: String,
    /// Mass in electron masses.
    pub mass: f64,
    /// Signed charge number, electron = −1.
    pub charge: f64,
    /// Quantum species get grid coordinates, clamped species fixed positions.
    pub quantum: bool,
    pub count: usize,
    /// Positions of clamped particles (length = count). Ignored for quantum
    /// species.
    #[serde(default)]
    pub positions: Vec<f64>,
}

impl Species {
    pub fn quantum(name: &str, mass: f64, charge: f64, count: usize) -> Species {
        Species {
            name: name.to_string(),
            mass,
            charge,
            quantum: true,
            count,
            positions: Vec::new(),
        }
    }

    pub fn clamped(name: &str, mass: f64, charge: f64, positions: Vec<f64>) -> Species {
        Species {
            name: name.to_string(),
            mass,
            charge,
            quantum: false,
            count: positions.len(),
            positions,
        }
    }
}

/// External one-body potential v(x).
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExternalPotential {
    #[default]
    None,
    /// ½ ω² (x − center)².
    Harmonic { omega: f64, center: f64 },
    /// quadratic (x − center)² + quartic (x − center)⁴; a negative quadratic
    /// coefficient with positive quartic gives a double well.
    Quartic {
        quadratic: f64,
        quartic: f64,
        center: f64,
    },
    /// Values sampled on the model grid (length must match n_points).
    Tabulated { values: Vec<f64> },
}

impl ExternalPotential {
    pub fn evaluate(&self, grid: &Grid1D, i: usize) -> f64 {
        match self {
            ExternalPotential::None => 0.0,
            ExternalPotential::Harmonic { omega, center } => {
                let d = grid.point(i) - center;
                0.5 * omega * omega * d * d
            }
            ExternalPotential::Quartic {
                quadratic,
                quartic,
                center,
            } => {
                let d = grid.point(i) - center;
                quadratic * d * d + quartic * d * d * d * d
            }
            ExternalPotential::Tabulated { values } => values[i],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatterModel {
    pub species: Vec<Species>,
    pub grid: Grid1D,
    /// Soft-Coulomb length a > 0.
    pub softening: f64,
    #[serde(default)]
    pub external_potential: ExternalPotential,
    #[serde(default)]
    pub kinetic: KineticScheme,
}

impl MatterModel {
    pub fn new(species: Vec<Species>, grid: Grid1D, softening: f64) -> Result<MatterModel> {
        let m = MatterModel {
            species,
            grid,
            softening,
            external_potential: ExternalPotential::None,
            kinetic: KineticScheme::FiniteDifference,
        };
        m.validate()?;
        Ok(m)
    }

    /// Single quantum particle of mass 1 and charge −1 in a harmonic trap;
    /// the workhorse fixture.
    pub fn single_electron_harmonic(grid: Grid1D, omega: f64) -> MatterModel {
        let mut m = MatterModel::new(vec![Species::quantum("electron", 1.0, -1.0, 1)], grid, 1.0)
            .expect("valid single-particle model");
        m.external_potential = ExternalPotential::Harmonic { omega, center: 0.0 };
        m
    }

    pub fn with_potential(mut self, v: ExternalPotential) -> MatterModel {
        self.external_potential = v;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if !(self.softening > 0.0) {
            return Err(Error::InvalidModel(format!(
                "softening length must be positive, got {}",
                self.softening
            )));
        }
        for s in &self.species {
            if !(s.mass > 0.0) {
                return Err(Error::InvalidModel(format!(
                    "species '{}': mass must be positive",
                    s.name
                )));
            }
            if s.count == 0 {
                return Err(Error::InvalidModel(format!(
                    "species '{}': count must be >= 1",
                    s.name
                )));
            }
            if !s.quantum && s.positions.len() != s.count {
                return Err(Error::InvalidModel(format!(
                    "species '{}': clamped species needs {} positions, got {}",
                    s.name,
                    s.count,
                    s.positions.len()
                )));
            }
        }
        if let ExternalPotential::Tabulated { values } = &self.external_potential {
            if values.len() != self.grid.n_points {
                return Err(Error::InvalidModel(format!(
                    "tabulated potential has {} samples, grid has {} points",
                    values.len(),
                    self.grid.n_points
                )));
            }
        }
        Ok(())
    }

    /// Flattened list of quantum particles as (species index, mass, charge).
    pub fn quantum_particles(&self) -> Vec<(usize, f64, f64)> {
        let mut out = Vec::new();
        for (si, s) in self.species.iter().enumerate() {
            if s.quantum {
                for _ in 0..s.count {
                    out.push((si, s.mass, s.charge));
                }
            }
        }
        out
    }

    /// (charge, position) of every clamped particle.
    pub fn clamped_charges(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for s in &self.species {
            if !s.quantum {
                for &x in &s.positions {
                    out.push((s.charge, x));
                }
            }
        }
        out
    }

    /// Σ Z·x over clamped particles: the static part of the total dipole.
    pub fn clamped_dipole(&self) -> f64 {
        self.clamped_charges().iter().map(|(z, x)| z * x).sum()
    }

    pub fn soft_coulomb(&self, z1: f64, z2: f64, x1: f64, x2: f64) -> f64 {
        let d = x1 - x2;
        z1 * z2 / (d * d + self.softening * self.softening).sqrt()
    }

    /// Replace the grid, keeping everything else (refinement ladders).
    pub fn with_grid(&self, grid: Grid1D) -> MatterModel {
        let mut m = self.clone();
        m.grid = grid;
        m
    }

    /// Move one clamped particle (surface scans).
    pub fn with_clamped_position(&self, species: usize, index: usize, x: f64) -> Result<MatterModel> {
        let mut m = self.clone();
        let s = m
            .species
            .get_mut(species)
            .ok_or_else(|| Error::InvalidArgument(format!("no species {species}")))?;
        if s.quantum {
            return Err(Error::InvalidArgument(format!(
                "species '{}' is quantum, cannot clamp its position",
                s.name
            )));
        }
        if index >= s.positions.len() {
            return Err(Error::InvalidArgument(format!(
                "species '{}' has {} clamped particles, no index {index}",
                s.name,
                s.positions.len()
            )));
        }
        s.positions[index] = x;
        Ok(m)
    }
}

/// Basis of the quantum matter sector: one grid index per quantum particle,
/// strictly increasing within each identical-fermion group.
#[derive(Debug, Clone)]
pub struct MatterBasis {
    /// (species index, mass, charge) per particle, in canonical order.
    particles: Vec<(usize, f64, f64)>,
    /// Ranges of `particles` that belong to the same quantum species.
    groups: Vec<std::ops::Range<usize>>,
    states: Vec<Vec<u16>>,
    index: HashMap<Vec<u16>, usize>,
    n_points: usize,
}

impl MatterBasis {
    pub fn new(model: &MatterModel) -> Result<MatterBasis> {
        MatterBasis::with_limit(model, crate::operator::MAX_ASSEMBLY_DIM)
    }

    pub fn with_limit(model: &MatterModel, max_dim: usize) -> Result<MatterBasis> {
        model.validate()?;
        let particles = model.quantum_particles();
        if particles.is_empty() {
            return Err(Error::InvalidModel(
                "matter model has no quantum species; nothing to diagonalize".into(),
            ));
        }
        let n = model.grid.n_points;

        let mut groups = Vec::new();
        let mut start = 0usize;
        while start < particles.len() {
            let mut end = start + 1;
            while end < particles.len() && particles[end].0 == particles[start].0 {
                end += 1;
            }
            groups.push(start..end);
            start = end;
        }

        // dimension check before enumerating
        let mut dim_estimate = 1f64;
        for g in &groups {
            let k = g.len() as f64;
            let mut c = 1f64;
            for i in 0..g.len() {
                c *= (n as f64 - i as f64) / (k - i as f64);
            }
            dim_estimate *= c;
        }
        if dim_estimate > max_dim as f64 {
            return Err(Error::DimensionOverflow {
                requested: dim_estimate as usize,
                limit: max_dim,
            });
        }

        let mut states: Vec<Vec<u16>> = vec![Vec::new()];
        for g in &groups {
            let k = g.len();
            let combos = increasing_tuples(n, k);
            let mut next = Vec::with_capacity(states.len() * combos.len());
            for s in &states {
                for c in &combos {
                    let mut t = s.clone();
                    t.extend_from_slice(c);
                    next.push(t);
                }
            }
            states = next;
        }

        let index: HashMap<Vec<u16>, usize> = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();

        Ok(MatterBasis {
            particles,
            groups,
            states,
            index,
            n_points: n,
        })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn n_particles(&self) -> usize {
        self.particles.len()
    }

    pub fn state(&self, i: usize) -> &[u16] {
        &self.states[i]
    }

    pub fn particles(&self) -> &[(usize, f64, f64)] {
        &self.particles
    }

    /// Canonicalize a raw index tuple: sort each fermion group ascending and
    /// track the permutation sign. Returns None for Pauli-excluded tuples.
    pub fn canonicalize(&self, config: &mut Vec<u16>) -> Option<f64> {
        let mut sign = 1.0;
        for g in &self.groups {
            let slice = &mut config[g.clone()];
            // insertion sort, counting transpositions
            for i in 1..slice.len() {
                let mut j = i;
                while j > 0 && slice[j - 1] > slice[j] {
                    slice.swap(j - 1, j);
                    sign = -sign;
                    j -= 1;
                }
            }
            for w in slice.windows(2) {
                if w[0] == w[1] {
                    return None;
                }
            }
        }
        Some(sign)
    }

    pub fn lookup(&self, config: &[u16]) -> Option<usize> {
        self.index.get(config).copied()
    }

    /// Map under spatial inversion x → −x (grid must be symmetric):
    /// basis index → (target index, sign from fermion reordering).
    pub fn parity_map(&self, grid: &Grid1D) -> Result<Vec<(usize, f64)>> {
        if !grid.is_symmetric() {
            return Err(Error::InvalidArgument(
                "parity map requires a grid symmetric about 0".into(),
            ));
        }
        let n = self.n_points as u16;
        let mut out = Vec::with_capacity(self.dim());
        for s in &self.states {
            let mut flipped: Vec<u16> = s.iter().map(|&i| n - 1 - i).collect();
            let sign = self
                .canonicalize(&mut flipped)
                .expect("inversion cannot collide distinct indices");
            let target = self.lookup(&flipped).expect("inversion stays in basis");
            out.push((target, sign));
        }
        Ok(out)
    }
}

fn increasing_tuples(n: usize, k: usize) -> Vec<Vec<u16>> {
    if k == 1 {
        return (0..n).map(|i| vec![i as u16]).collect();
    }
    let mut out = Vec::new();
    let mut cur: Vec<u16> = (0..k as u16).collect();
    loop {
        out.push(cur.clone());
        // next combination in lexicographic order
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < (n - k + i) as u16 {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Matter-only Hamiltonian T + W + v_ext (no photons).
pub fn matter_hamiltonian(model: &MatterModel, basis: &MatterBasis) -> Result<OperatorMatrix> {
    let mut b = OperatorBuilder::new(basis.dim());

    // one-body kinetic terms
    match model.kinetic {
        KineticScheme::FiniteDifference => {
            let entries_per_mass: HashMap<u64, Vec<(usize, usize, f64)>> = basis
                .particles()
                .iter()
                .map(|&(_, mass, _)| (mass.to_bits(), fd_kinetic_entries(&model.grid, mass)))
                .collect();
            // per-site hop lists so the state loop touches only relevant rows
            for (p, &(_, mass, _)) in basis.particles().iter().enumerate() {
                let mut by_site: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.grid.n_points];
                for &(i, j, v) in &entries_per_mass[&mass.to_bits()] {
                    by_site[i].push((j, v));
                }
                for (m, state) in basis.states.iter().enumerate() {
                    for &(j, v) in &by_site[state[p] as usize] {
                        let mut target = state.clone();
                        target[p] = j as u16;
                        if let Some(sign) = basis.canonicalize(&mut target) {
                            let mt = basis.lookup(&target).expect("target in basis");
                            b.add_real(m, mt, v * sign);
                        }
                    }
                }
            }
        }
        KineticScheme::SineSpectral => {
            for (p, &(_, mass, _)) in basis.particles().iter().enumerate() {
                let t = sine_spectral_kinetic(&model.grid, mass);
                for (m, state) in basis.states.iter().enumerate() {
                    let i = state[p] as usize;
                    for j in 0..model.grid.n_points {
                        let v = t[(i, j)];
                        if v == 0.0 {
                            continue;
                        }
                        let mut target = state.clone();
                        target[p] = j as u16;
                        if let Some(sign) = basis.canonicalize(&mut target) {
                            let mt = basis.lookup(&target).expect("target in basis");
                            b.add_real(m, mt, v * sign);
                        }
                    }
                }
            }
        }
    }

    // diagonal: external potential + all pairwise soft-Coulomb terms
    let diag = matter_potential_diagonal(model, basis);
    for (m, v) in diag.iter().enumerate() {
        b.add_real(m, m, *v);
    }
    b.finalize("matter Hamiltonian")
}

/// Potential-energy diagonal: v_ext per particle, quantum-quantum and
/// quantum-clamped soft-Coulomb pairs, plus the constant clamped-clamped term.
pub fn matter_potential_diagonal(model: &MatterModel, basis: &MatterBasis) -> Vec<f64> {
    let grid = &model.grid;
    let clamped = model.clamped_charges();
    let mut clamped_const = 0.0;
    for i in 0..clamped.len() {
        for j in i + 1..clamped.len() {
            clamped_const += model.soft_coulomb(clamped[i].0, clamped[j].0, clamped[i].1, clamped[j].1);
        }
    }

    basis
        .states
        .iter()
        .map(|state| {
            let mut v = clamped_const;
            for (p, &(_, _, zp)) in basis.particles().iter().enumerate() {
                let xp = grid.point(state[p] as usize);
                v += model.external_potential.evaluate(grid, state[p] as usize);
                for &(zc, xc) in &clamped {
                    v += model.soft_coulomb(zp, zc, xp, xc);
                }
                for (q, &(_, _, zq)) in basis.particles().iter().enumerate().skip(p + 1) {
                    let xq = grid.point(state[q] as usize);
                    v += model.soft_coulomb(zp, zq, xp, xq);
                }
            }
            v
        })
        .collect()
}

/// Diagonal of the total dipole R = Σ Z x over quantum particles plus the
/// clamped-charge constant.
pub fn matter_dipole_diagonal(model: &MatterModel, basis: &MatterBasis) -> Vec<f64> {
    let grid = &model.grid;
    let offset = model.clamped_dipole();
    basis
        .states
        .iter()
        .map(|state| {
            offset
                + basis
                    .particles()
                    .iter()
                    .zip(state.iter())
                    .map(|(&(_, _, z), &i)| z * grid.point(i as usize))
                    .sum::<f64>()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::dense::dense_solve;

    fn harmonic_model(n: usize) -> MatterModel {
        MatterModel::single_electron_harmonic(Grid1D::new(-8.0, 8.0, n).unwrap(), 1.0)
    }

    #[test]
    fn harmonic_ground_state_energy() {
        let model = harmonic_model(201);
        let basis = MatterBasis::new(&model).unwrap();
        let h = matter_hamiltonian(&model, &basis).unwrap();
        let spec = dense_solve(&h).unwrap();
        // 3-point FD error is O(dx²); dx = 0.08 here
        assert!((spec.eigenvalues[0] - 0.5).abs() < 1e-3);
        assert!((spec.eigenvalues[1] - 1.5).abs() < 3e-3);
    }

    #[test]
    fn two_fermions_pauli_excluded_diagonal() {
        let grid = Grid1D::new(-3.0, 3.0, 11).unwrap();
        let model = MatterModel::new(vec![Species::quantum("electron", 1.0, -1.0, 2)], grid, 1.0)
            .unwrap();
        let basis = MatterBasis::new(&model).unwrap();
        assert_eq!(basis.dim(), 11 * 10 / 2);
        for i in 0..basis.dim() {
            let s = basis.state(i);
            assert!(s[0] < s[1]);
        }
    }

    #[test]
    fn clamped_only_matter_is_rejected() {
        let grid = Grid1D::new(-3.0, 3.0, 11).unwrap();
        let model = MatterModel::new(
            vec![Species::clamped("proton", 1836.0, 1.0, vec![0.0])],
            grid,
            1.0,
        )
        .unwrap();
        match MatterBasis::new(&model) {
            Err(Error::InvalidModel(_)) => {}
            other => panic!("expected InvalidModel, got {other:?}"),
        }
    }

    #[test]
    fn fermion_antisymmetry_lowers_nothing_below_distinguishable() {
        // two identical fermions vs two distinguishable particles with the
        // same mass/charge: the fermionic ground energy must be >= the
        // distinguishable one (it is a restriction of the search space).
        let grid = Grid1D::new(-5.0, 5.0, 41).unwrap();
        let ferm = MatterModel::new(vec![Species::quantum("e", 1.0, -1.0, 2)], grid, 1.0)
            .unwrap()
            .with_potential(ExternalPotential::Harmonic { omega: 1.0, center: 0.0 });
        let dist = MatterModel::new(
            vec![
                Species::quantum("e1", 1.0, -1.0, 1),
                Species::quantum("e2", 1.0, -1.0, 1),
            ],
            grid,
            1.0,
        )
        .unwrap()
        .with_potential(ExternalPotential::Harmonic { omega: 1.0, center: 0.0 });

        let bf = MatterBasis::new(&ferm).unwrap();
        let bd = MatterBasis::new(&dist).unwrap();
        let ef = dense_solve(&matter_hamiltonian(&ferm, &bf).unwrap()).unwrap().eigenvalues[0];
        let ed = dense_solve(&matter_hamiltonian(&dist, &bd).unwrap()).unwrap().eigenvalues[0];
        assert!(ef >= ed - 1e-12, "fermionic {ef} vs distinguishable {ed}");
        // and strictly above: the antisymmetric sector excludes the nodeless
        // product ground state
        assert!(ef > ed + 0.1);
    }

    #[test]
    fn parity_map_is_involution_with_unit_sign_product() {
        let grid = Grid1D::new(-3.0, 3.0, 13).unwrap();
        let model = MatterModel::new(vec![Species::quantum("e", 1.0, -1.0, 2)], grid, 1.0).unwrap();
        let basis = MatterBasis::new(&model).unwrap();
        let map = basis.parity_map(&grid).unwrap();
        for (i, &(j, s)) in map.iter().enumerate() {
            let (back, s2) = map[j];
            assert_eq!(back, i);
            assert!((s * s2 - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn increasing_tuples_count() {
        assert_eq!(increasing_tuples(5, 2).len(), 10);
        assert_eq!(increasing_tuples(6, 3).len(), 20);
    }
}
