//! Truncated number-basis quantum dynamics.

pub mod operators;
pub mod propagate;
pub mod states;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::Result;
use crate::types::{DensitySpec, Entropies, ModelSpec, Subsystem};

pub use operators::{
    build_hamiltonian, FockBasis, Hamiltonian, KronTerm, ModeOperators, SparseMode,
};
pub use propagate::{bessel_series, Method, Propagator, DENSE_LIMIT};
pub use states::{initial_state, mode_state, MAX_TRUNCATION_LOSS};

/// A pure state on a [`FockBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub basis: FockBasis,
    pub amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(basis: FockBasis, amps: Vec<Complex64>) -> Self {
        assert_eq!(
            amps.len(),
            basis.dim(),
            "amplitude count must match the basis"
        );
        Self { basis, amps }
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Amplitudes as a `(n1_max + 1) x (n2_max + 1)` matrix.
    pub fn coefficient_matrix(&self) -> DMatrix<Complex64> {
        let (n1, n2) = self.basis.dims();
        DMatrix::from_row_slice(n1, n2, &self.amps)
    }

    pub fn population(&self, n1: usize, n2: usize) -> f64 {
        self.amps[self.basis.index(n1, n2)].norm_sqr()
    }
}

/// Reduced density matrix of one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensity {
    pub matrix: DMatrix<Complex64>,
}

impl ReducedDensity {
    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `tr rho^2`, the squared Frobenius norm of a Hermitian matrix.
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|c| c.re).collect()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (&self.matrix - self.matrix.adjoint())
            .iter()
            .all(|z| z.norm() <= tol)
    }
}

/// Partial trace over the other mode.
pub fn reduced_density(psi: &StateVector, sub: Subsystem) -> ReducedDensity {
    let c = psi.coefficient_matrix();
    let matrix = match sub {
        Subsystem::One => &c * c.adjoint(),
        Subsystem::Two => c.transpose() * c.conjugate(),
    };
    ReducedDensity { matrix }
}

/// `S = 1 - tr rho^2`.
pub fn linear_entropy(rho: &ReducedDensity) -> f64 {
    1.0 - rho.purity()
}

/// Subsystem entropies and `I = S1 + S2 - S1 S2` of a pure state.
pub fn qlmi(psi: &StateVector) -> Entropies {
    Entropies::from_pair(
        linear_entropy(&reduced_density(psi, Subsystem::One)),
        linear_entropy(&reduced_density(psi, Subsystem::Two)),
    )
}

/// Probability in the top two levels of either mode.
pub fn truncation_population(psi: &StateVector) -> f64 {
    let (n1, n2) = (psi.basis.n1_max, psi.basis.n2_max);
    psi.amps
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            let (a, b) = psi.basis.levels(*i);
            a + 1 >= n1 || b + 1 >= n2
        })
        .map(|(_, c)| c.norm_sqr())
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockSettings {
    pub basis: FockBasis,
    pub method: Method,
}

/// Quantum entropies and diagnostics at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockPoint {
    pub t: f64,
    pub entropies: Entropies,
    pub trunc_pop: f64,
    pub norm: f64,
    pub energy: f64,
}

/// Propagates the product state for `density` and evaluates every time.
pub fn fock_series(
    model: &ModelSpec,
    density: &DensitySpec,
    times: &[f64],
    settings: &FockSettings,
) -> Result<Vec<FockPoint>> {
    let h = build_hamiltonian(model, settings.basis)?;
    let psi0 = initial_state(
        density,
        (model.omega1, model.omega2),
        model.hbar,
        settings.basis,
    )?;
    let mut prop = Propagator::new(&h, &psi0, settings.method)?;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let psi = StateVector::new(settings.basis, prop.state(t));
        out.push(FockPoint {
            t,
            entropies: qlmi(&psi),
            trunc_pop: truncation_population(&psi),
            norm: psi.norm(),
            energy: h.expectation(&psi.amps),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{Factor, ModelKind};
    use std::f64::consts::PI;

    fn rwa_series(density: DensitySpec, times: &[f64]) -> Vec<FockPoint> {
        let model = ModelSpec::new(ModelKind::Rwa, 1.0);
        let settings = FockSettings {
            basis: FockBasis::new(4, 4),
            method: Method::Eigen,
        };
        fock_series(&model, &density, times, &settings).unwrap()
    }

    #[test]
    fn rwa_single_excitation_swaps() {
        let model = ModelSpec::new(ModelKind::Rwa, 1.0);
        let basis = FockBasis::new(3, 3);
        let h = build_hamiltonian(&model, basis).unwrap();
        let psi0 = initial_state(
            &DensitySpec::new(Factor::gaussian(0.0, 0.0), Factor::fock()),
            (1.0, 1.0),
            1.0,
            basis,
        )
        .unwrap();
        let mut p = Propagator::new(&h, &psi0, Method::Eigen).unwrap();
        for t in [0.3, 0.9, 2.0] {
            let psi = StateVector::new(basis, p.state(t));
            assert!((psi.population(1, 0).sqrt() - f64::sin(t).abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn rwa_double_excitation_populations() {
        let basis = FockBasis::new(4, 4);
        let h = build_hamiltonian(&ModelSpec::new(ModelKind::Rwa, 1.0), basis).unwrap();
        let psi0 = initial_state(
            &DensitySpec::new(Factor::fock(), Factor::fock()),
            (1.0, 1.0),
            1.0,
            basis,
        )
        .unwrap();
        let mut p = Propagator::new(&h, &psi0, Method::Eigen).unwrap();
        // 2 lambda t = pi/4
        let psi = StateVector::new(basis, p.state(PI / 8.0));
        let rho = reduced_density(&psi, Subsystem::One);
        let pops = rho.populations();
        for (got, want) in pops.iter().zip([0.25, 0.5, 0.25, 0.0]) {
            assert!((got - want).abs() < 1e-12, "{pops:?}");
        }
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        assert!(rho.is_hermitian(1e-14));
    }

    #[test]
    fn rwa_closed_forms() {
        let pts = rwa_series(
            DensitySpec::new(Factor::fock(), Factor::fock()),
            &[PI / 4.0, PI / 2.0],
        );
        assert!((pts[0].entropies.mutual - 0.75).abs() < 1e-12);
        assert!(pts[1].entropies.mutual.abs() < 1e-12);
        let pts = rwa_series(
            DensitySpec::new(Factor::gaussian(0.0, 0.0), Factor::fock()),
            &[PI / 4.0],
        );
        assert!((pts[0].entropies.mutual - 0.75).abs() < 1e-12);
    }

    #[test]
    fn product_state_is_pure() {
        let basis = FockBasis::new(10, 3);
        let psi = StateVector::new(
            basis,
            initial_state(
                &DensitySpec::new(Factor::gaussian(0.3, 0.1), Factor::fock()),
                (1.0, 1.0),
                0.2,
                basis,
            )
            .unwrap(),
        );
        let rho = reduced_density(&psi, Subsystem::Two);
        assert!((rho.purity() - 1.0).abs() < 1e-13);
        assert!(qlmi(&psi).mutual.abs() < 1e-13);
    }
}
