//! A numerical laboratory for dipole-coupled cavity QED.
//!
//! The crate assembles length- and velocity-gauge Hamiltonians for
//! few-particle model molecules coupled to quantized cavity modes,
//! diagonalizes them (dense LAPACK or Lanczos), propagates states in real
//! time, scans clamped-coordinate energy surfaces and evaluates canonical
//! thermal observables. Every derived quantity is validated against analytic
//! model reductions (Jaynes-Cummings, Tavis-Cummings, bilinear normal modes)
//! and brute-force dense diagonalization.
//!
//! Everything is in Hartree atomic units (ħ = |e| = m_e = 1, 4πε₀ = 1,
//! k_B = 1); see [`units`] for conversions.
//!
//! The `examples/` directory holds one runnable program per capability:
//!
//! ```text
//! cargo run --release --example spectrum
//! cargo run --release --example jaynes_cummings
//! cargo run --release --example tavis_cummings_dark_states
//! cargo run --release --example vacuum_rabi_dynamics
//! cargo run --release --example gauge_check
//! cargo run --release --example instability
//! cargo run --release --example cavity_surfaces
//! cargo run --release --example thermal_sweep
//! cargo run --release --example collective_shift
//! cargo run --release --example mass_renormalization
//! ```
//!
//! The `polariton-lab` binary drives the same machinery from declarative
//! TOML configurations; see the README for the schema.

pub mod config;
pub mod error;
pub mod fock;
pub mod grid;
pub mod model;
pub mod operator;
pub mod oracle;
pub mod run;
pub mod solver;
pub mod surfaces;
pub mod thermo;
pub mod units;

pub use error::{Error, Result};
pub use operator::{OperatorBuilder, OperatorMatrix};
