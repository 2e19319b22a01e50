//! Landau–Zener population transfer in rings of coupled two-level sites.
//!
//! Each site is a two-level system swept linearly through an avoided
//! crossing; sites interact through first- and second-neighbor `σz σz`
//! couplings on a periodic ring. The crate builds the many-body Hamiltonian,
//! integrates the Schrödinger equation across the sweep, and reports
//! per-site transition probabilities, their late-time average (FTPE), and
//! parameter-grid sweeps of that average.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod observables;
pub mod operators;
pub mod sweep;

pub use dynamics::{
    evolve, initial_state, lz_closed_form, rk4_step, InitMode, IntegratorConfig, StateVector,
    Trajectory,
};
pub use error::{Error, Result};
pub use model::{
    build_hamiltonian, hamiltonian_at, ring_topology, CouplingParams, LzHamiltonian, RingTopology,
};
pub use observables::{ftpe, FtpeResult};
pub use operators::{ComplexMatrix, Pauli};
