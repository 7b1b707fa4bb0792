//! Classical phase-space densities transported by the Liouville equation,
//! their marginals and the classical linear entropies.

pub mod density;
pub mod grid;
pub mod monte_carlo;
pub mod quadrature;

pub use density::{factor_density, initial_density, DensityEvaluator};
pub use grid::{Axis, QuadratureGrid};
pub use monte_carlo::{mc_entropies, mc_series, McEstimate, McSettings};
pub use quadrature::{
    classical_series, csle, cslmi, marginal, purity_integral, ClassicalPoint, GridIntegrals,
    MarginalField, QuadratureSettings,
};
