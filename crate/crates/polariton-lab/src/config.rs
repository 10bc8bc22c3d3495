//! Declarative run configuration.
//!
//! Runs are described by a TOML file with a model section (species table,
//! grid block, potential), a modes table, a gauge block, exactly one task
//! and optional numerics/output blocks. Unknown keys are rejected. Mode
//! frequencies take exactly one of `omega` (Hartree), `omega_cm`
//! (wavenumbers) or `omega_ev`; temperatures may be given in Kelvin via
//! `unit = "kelvin"`. The resolved configuration is echoed into the run
//! manifest.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid1D, KineticScheme};
use crate::model::hamiltonian::Envelope;
use crate::model::matter::ExternalPotential;
use crate::model::{GaugeForm, MatterModel, Mode, ModeSet, Species};
use crate::units;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub modes: Vec<ModeSection>,
    #[serde(default)]
    pub gauge: GaugeSection,
    pub task: TaskSection,
    #[serde(default)]
    pub numerics: NumericsSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub species: Vec<SpeciesSection>,
    pub grid: GridSection,
    #[serde(default = "default_softening")]
    pub softening: f64,
    #[serde(default)]
    pub potential: PotentialSection,
    #[serde(default)]
    pub kinetic: KineticScheme,
}

fn default_softening() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesSection {
    pub name: String,
    pub mass: f64,
    pub charge: f64,
    #[serde(default = "default_true")]
    pub quantum: bool,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default)]
    pub positions: Vec<f64>,
}

fn default_true() -> bool {
    true
}

fn default_count() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum PotentialSection {
    #[default]
    None,
    Harmonic {
        omega: f64,
        #[serde(default)]
        center: f64,
    },
    Quartic {
        quadratic: f64,
        quartic: f64,
        #[serde(default)]
        center: f64,
    },
    Tabulated {
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSection {
    /// Frequency in Hartree; exactly one of omega / omega_cm / omega_ev.
    pub omega: Option<f64>,
    pub omega_cm: Option<f64>,
    pub omega_ev: Option<f64>,
    pub g: f64,
    #[serde(default = "default_polarization")]
    pub polarization: f64,
    pub n_max: usize,
}

fn default_polarization() -> f64 {
    1.0
}

impl ModeSection {
    fn omega_hartree(&self) -> Result<f64> {
        let given = [
            self.omega,
            self.omega_cm.map(units::wavenumber_to_hartree),
            self.omega_ev.map(units::ev_to_hartree),
        ];
        let mut set = given.iter().flatten();
        match (set.next(), set.next()) {
            (Some(&w), None) => Ok(w),
            (None, _) => Err(Error::Config(
                "mode needs one of omega / omega_cm / omega_ev".into(),
            )),
            (Some(_), Some(_)) => Err(Error::Config(
                "mode frequency given in more than one unit; pick one of omega / omega_cm / omega_ev"
                    .into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeSection {
    #[serde(default = "default_gauge_form")]
    pub form: String,
    #[serde(default = "default_true")]
    pub self_polarization: bool,
}

fn default_gauge_form() -> String {
    "length".to_string()
}

impl Default for GaugeSection {
    fn default() -> Self {
        GaugeSection {
            form: default_gauge_form(),
            self_polarization: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum TaskSection {
    /// Lowest part of the spectrum, CSV of eigenvalues.
    Spectrum {
        #[serde(default = "default_n_states")]
        n_states: usize,
        /// "auto" | "dense" | "lanczos"
        #[serde(default = "default_method")]
        method: String,
        /// Also export the assembled Hamiltonian in coordinate-list form.
        #[serde(default)]
        export_matrix: bool,
    },
    /// Real-time propagation from the ground state with optional drive.
    Propagate {
        dt: f64,
        t_end: f64,
        #[serde(default)]
        drive: Vec<DriveSection>,
        /// Observable to Fourier-analyze ("dipole" by default).
        #[serde(default = "default_spectrum_of")]
        spectrum_of: String,
    },
    /// Clamped-coordinate surface scan.
    Surface {
        /// "cavity_bo" | "polaritonic"
        variant: String,
        axes: Vec<AxisSection>,
        #[serde(default = "default_k")]
        k: usize,
        /// Axis name for non-adiabatic couplings (optional).
        #[serde(default)]
        couplings_along: Option<String>,
    },
    /// Temperature sweep: T, ⟨H⟩, S_photon, var_q per mode.
    ThermalSweep {
        t_min: f64,
        t_max: f64,
        n_temps: usize,
        /// "hartree" (default) or "kelvin"
        #[serde(default = "default_unit")]
        unit: String,
        #[serde(default = "default_n_states")]
        n_states: usize,
    },
    /// Length- vs velocity-gauge ground energies along a refinement ladder.
    GaugeCheck {
        ladder: Vec<LadderLevel>,
        #[serde(default)]
        ablate_diamagnetic: bool,
    },
    /// Ground-energy ladder with and without the self-polarization term.
    InstabilityScan {
        ladder: Vec<InstabilityLevel>,
        /// "both" (default) reproduces the dichotomy; "on"/"off" run a
        /// single branch.
        #[serde(default = "default_branches")]
        branches: String,
    },
    /// Collective dressed-mode frequencies over emitter counts.
    CollectiveScan {
        n_values: Vec<usize>,
        omega0: f64,
        omega: f64,
        g: f64,
    },
}

fn default_n_states() -> usize {
    8
}

fn default_method() -> String {
    "auto".into()
}

fn default_spectrum_of() -> String {
    "dipole".into()
}

fn default_k() -> usize {
    2
}

fn default_unit() -> String {
    "hartree".into()
}

fn default_branches() -> String {
    "both".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    /// "mode_current" (q_α channel) or "potential" (tabulated φ(x)).
    pub channel: String,
    #[serde(default)]
    pub mode: usize,
    #[serde(default)]
    pub values: Vec<f64>,
    pub envelope: Envelope,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSection {
    pub name: String,
    /// "clamped" (species/index) or "mode" (mode index).
    pub target: String,
    #[serde(default)]
    pub species: Option<String>,
    #[serde(default)]
    pub index: usize,
    #[serde(default)]
    pub mode: usize,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderLevel {
    pub n_points: usize,
    pub n_max: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstabilityLevel {
    pub extent: f64,
    pub n_points: usize,
    pub n_max: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSection {
    #[serde(default = "default_dense_limit")]
    pub dense_limit: usize,
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
    #[serde(default = "default_tol")]
    pub tolerance: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_dense_limit() -> usize {
    crate::solver::DENSE_LIMIT_DEFAULT
}

fn default_max_dim() -> usize {
    crate::operator::MAX_ASSEMBLY_DIM
}

fn default_tol() -> f64 {
    1e-9
}

fn default_seed() -> u64 {
    7
}

impl Default for NumericsSection {
    fn default() -> Self {
        NumericsSection {
            dense_limit: default_dense_limit(),
            max_dim: default_max_dim(),
            tolerance: default_tol(),
            seed: default_seed(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_outdir")]
    pub directory: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            directory: default_outdir(),
        }
    }
}

fn default_outdir() -> String {
    "out".into()
}

impl RunConfig {
    /// Parse and validate a configuration file; schema violations carry the
    /// offending key and line from the TOML parser.
    pub fn parse(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::parse_str(&text)
    }

    pub fn parse_str(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.matter_model()?;
        self.mode_set()?;
        self.gauge_form()?;
        match &self.task {
            TaskSection::Spectrum { n_states, method, .. } => {
                if *n_states == 0 {
                    return Err(Error::Config("task.n_states must be >= 1".into()));
                }
                if !["auto", "dense", "lanczos"].contains(&method.as_str()) {
                    return Err(Error::Config(format!(
                        "task.method must be auto|dense|lanczos, got '{method}'"
                    )));
                }
            }
            TaskSection::Propagate { dt, t_end, .. } => {
                if !(*dt > 0.0) || !(t_end >= dt) {
                    return Err(Error::Config("task needs 0 < dt <= t_end".into()));
                }
            }
            TaskSection::Surface { variant, axes, k, .. } => {
                if !["cavity_bo", "polaritonic"].contains(&variant.as_str()) {
                    return Err(Error::Config(format!(
                        "task.variant must be cavity_bo|polaritonic, got '{variant}'"
                    )));
                }
                if axes.is_empty() || *k == 0 {
                    return Err(Error::Config("surface task needs axes and k >= 1".into()));
                }
                for a in axes {
                    if a.n < 2 {
                        return Err(Error::Config(format!("axis '{}' needs n >= 2", a.name)));
                    }
                    if !["clamped", "mode"].contains(&a.target.as_str()) {
                        return Err(Error::Config(format!(
                            "axis '{}': target must be clamped|mode",
                            a.name
                        )));
                    }
                }
            }
            TaskSection::ThermalSweep { t_min, t_max, n_temps, unit, n_states } => {
                if !(*t_min >= 0.0) || t_max < t_min || *n_temps == 0 || *n_states == 0 {
                    return Err(Error::Config("thermal sweep bounds are inconsistent".into()));
                }
                if !["hartree", "kelvin"].contains(&unit.as_str()) {
                    return Err(Error::Config(format!(
                        "task.unit must be hartree|kelvin, got '{unit}'"
                    )));
                }
            }
            TaskSection::GaugeCheck { ladder, .. } => {
                if ladder.len() < 3 {
                    return Err(Error::Config(
                        "gauge check needs a refinement ladder of >= 3 levels".into(),
                    ));
                }
            }
            TaskSection::InstabilityScan { ladder, branches } => {
                if ladder.len() < 4 {
                    return Err(Error::Config(
                        "instability scan needs a basis ladder of >= 4 rungs".into(),
                    ));
                }
                if !["both", "on", "off"].contains(&branches.as_str()) {
                    return Err(Error::Config(format!(
                        "task.branches must be both|on|off, got '{branches}'"
                    )));
                }
            }
            TaskSection::CollectiveScan { n_values, omega0, omega, g } => {
                if n_values.is_empty() {
                    return Err(Error::Config("collective scan needs n_values".into()));
                }
                if !(*omega0 > 0.0) || !(*omega > 0.0) || !g.is_finite() {
                    return Err(Error::Config("collective scan frequencies must be positive".into()));
                }
            }
        }
        Ok(())
    }

    pub fn matter_model(&self) -> Result<MatterModel> {
        let grid = Grid1D::new(
            self.model.grid.x_min,
            self.model.grid.x_max,
            self.model.grid.n_points,
        )?;
        let species: Vec<Species> = self
            .model
            .species
            .iter()
            .map(|s| Species {
                name: s.name.clone(),
                mass: s.mass,
                charge: s.charge,
                quantum: s.quantum,
                count: s.count,
                positions: s.positions.clone(),
            })
            .collect();
        let potential = match &self.model.potential {
            PotentialSection::None => ExternalPotential::None,
            PotentialSection::Harmonic { omega, center } => {
                if !(*omega > 0.0) {
                    return Err(Error::Config(format!(
                        "model.potential.omega must be positive, got {omega}"
                    )));
                }
                ExternalPotential::Harmonic {
                    omega: *omega,
                    center: *center,
                }
            }
            PotentialSection::Quartic {
                quadratic,
                quartic,
                center,
            } => ExternalPotential::Quartic {
                quadratic: *quadratic,
                quartic: *quartic,
                center: *center,
            },
            PotentialSection::Tabulated { values } => ExternalPotential::Tabulated {
                values: values.clone(),
            },
        };
        let mut model = MatterModel::new(species, grid, self.model.softening)
            .map_err(|e| Error::Config(e.to_string()))?;
        model.external_potential = potential;
        model.kinetic = self.model.kinetic;
        model.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(model)
    }

    pub fn mode_set(&self) -> Result<ModeSet> {
        let mut modes = Vec::with_capacity(self.modes.len());
        for (i, m) in self.modes.iter().enumerate() {
            let omega = m.omega_hartree()?;
            if !(omega > 0.0) {
                return Err(Error::Config(format!(
                    "modes[{i}].omega must be positive, got {omega}"
                )));
            }
            if m.polarization.abs() != 1.0 {
                return Err(Error::Config(format!(
                    "modes[{i}].polarization must be +1 or -1 in one dimension"
                )));
            }
            modes.push(Mode::new(omega, m.g, vec![m.polarization], m.n_max));
        }
        let set = ModeSet::new(modes).map_err(|e| Error::Config(e.to_string()))?;
        Ok(set)
    }

    pub fn gauge_form(&self) -> Result<GaugeForm> {
        match self.gauge.form.as_str() {
            "length" => Ok(GaugeForm::LengthGauge {
                include_self_polarization: self.gauge.self_polarization,
            }),
            "velocity" => Ok(GaugeForm::VelocityGauge),
            other => Err(Error::Config(format!(
                "gauge.form must be length|velocity, got '{other}'"
            ))),
        }
    }

    /// Species index by name, for axis sections.
    pub fn species_index(&self, name: &str) -> Result<usize> {
        self.model
            .species
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| Error::Config(format!("no species named '{name}'")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [model]
        [[model.species]]
        name = "electron"
        mass = 1.0
        charge = -1.0

        [model.grid]
        x_min = -8.0
        x_max = 8.0
        n_points = 101

        [model.potential]
        kind = "harmonic"
        omega = 1.0

        [[modes]]
        omega = 1.0
        g = 0.05
        n_max = 4

        [task]
        kind = "spectrum"
    "#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = RunConfig::parse_str(MINIMAL).unwrap();
        assert_eq!(cfg.numerics.seed, 7);
        assert_eq!(cfg.output.directory, "out");
        assert!(matches!(cfg.task, TaskSection::Spectrum { n_states: 8, .. }));
        let modes = cfg.mode_set().unwrap();
        assert_eq!(modes.n_modes(), 1);
        assert!(cfg.matter_model().is_ok());
        assert!(matches!(
            cfg.gauge_form().unwrap(),
            GaugeForm::LengthGauge { include_self_polarization: true }
        ));
    }

    #[test]
    fn negative_omega_is_a_schema_error_naming_the_key() {
        let text = MINIMAL.replace("omega = 1.0\n        g", "omega = -1.0\n        g");
        let err = RunConfig::parse_str(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("omega"), "message was: {msg}");
    }

    #[test]
    fn wavenumber_unit_flag_converts_to_hartree() {
        // only the mode's frequency key changes, not the trap potential's
        let text = MINIMAL.replace("omega = 1.0\n        g", "omega_cm = 856.0\n        g");
        let cfg = RunConfig::parse_str(&text).unwrap();
        let modes = cfg.mode_set().unwrap();
        let omega = modes.modes[0].omega;
        assert!((omega - 856.0 / units::HARTREE_WAVENUMBER).abs() < 1e-15);
        assert!((omega - 0.0039).abs() < 2e-4, "omega = {omega}");
    }

    #[test]
    fn conflicting_units_are_rejected() {
        let text = MINIMAL.replace("omega = 1.0\n        g", "omega = 1.0\n        omega_cm = 856.0\n        g");
        assert!(RunConfig::parse_str(&text).is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("[task]", "frobnicate = 3\n        [task]");
        let err = RunConfig::parse_str(&text).unwrap_err();
        assert!(err.to_string().contains("frobnicate"));
    }

    #[test]
    fn exactly_one_task_enforced_by_schema() {
        let text = format!("{MINIMAL}\n[task2]\nkind = \"spectrum\"\n");
        assert!(RunConfig::parse_str(&text).is_err());
    }
}
