//! Linear mutual information of two coupled oscillators, computed quantum
//! mechanically and from the classical Liouville flow of Husimi densities.
//!
//! The quantum side evolves either Gaussian covariances ([`gaussian`]) or
//! state vectors in a truncated number basis ([`fock`]). The classical side
//! transports phase-space densities along trajectories ([`flows`]) and
//! integrates their marginals by quadrature or sampling ([`liouville`]).

pub mod analytic;
pub mod config;
pub mod error;
pub mod flows;
pub mod fock;
pub mod gaussian;
pub mod liouville;
pub mod pipeline;
pub mod poincare;
pub mod series;
pub mod sum;
pub mod types;

pub use config::{validate, RunConfig, ValidatedConfig};
pub use error::{Error, Result};
pub use flows::{energy, FlowMethod, FlowPlan};
pub use pipeline::{simulate, Diagnostics, SimulationOutput};
pub use poincare::{poincare_section, SectionPoint};
pub use series::{EntropyRecord, EntropySeries};
pub use types::{
    build_time_grid, DensitySpec, Entropies, Factor, FactorKind, ModelKind, ModelSpec, PhasePoint,
    Subsystem, TimeGrid,
};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
