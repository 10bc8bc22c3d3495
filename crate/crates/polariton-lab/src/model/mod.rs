//! Physical model types and Hamiltonian assembly.

pub mod basis;
pub mod hamiltonian;
pub mod mass;
pub mod matter;
pub mod modes;
pub mod twolevel;

pub use basis::PolaritonBasis;
pub use hamiltonian::{
    build_length_gauge, build_velocity_gauge, build_velocity_gauge_with, drive_channels,
    field_identity_residual, mode_displacement_operator, mode_momentum_operator,
    mode_number_operator, mode_p_squared_operator, mode_q_squared_operator, parity_operator,
    total_dipole_operator, Envelope, ExternalDrive, GaugeForm, VelocityGaugeOptions,
};
pub use mass::{critical_cutoff, photon_mass, photon_mass_for, PhotonMassResult};
pub use matter::{
    matter_dipole_diagonal, matter_hamiltonian, matter_potential_diagonal, ExternalPotential,
    MatterBasis, MatterModel, Species,
};
pub use modes::{Mode, ModeSet};
pub use twolevel::{build_rabi, build_tavis_cummings, jaynes_cummings_doublet};
