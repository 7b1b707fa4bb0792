//! Exact quantum evolution of Gaussian states under quadratic Hamiltonians.
//!
//! States are described by their first moments and symmetrised covariance.
//! A quadratic Hamiltonian `H = x^T M x / 2` acts linearly through
//! `S(t) = exp(J M t)`, and the purity of a one-mode Gaussian block is
//! `(hbar/2) / sqrt(det sigma)`.

use nalgebra::{Complex, Matrix2, Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::flows::mode_rotation;
use crate::types::{Entropies, ModelKind, ModelSpec, PhasePoint, Subsystem};

/// Standard symplectic form in `(q1, p1, q2, p2)` order.
pub fn symplectic_form() -> Matrix4<f64> {
    let mut j = Matrix4::zeros();
    j[(0, 1)] = 1.0;
    j[(1, 0)] = -1.0;
    j[(2, 3)] = 1.0;
    j[(3, 2)] = -1.0;
    j
}

/// `M` with `H = x^T M x / 2`.
pub fn quadratic_form(model: &ModelSpec) -> Result<Matrix4<f64>> {
    let mut m = Matrix4::from_diagonal(&Vector4::new(
        model.omega1.powi(2),
        1.0,
        model.omega2.powi(2),
        1.0,
    ));
    match model.kind {
        ModelKind::Bilinear => {
            m[(0, 2)] = model.lambda;
            m[(2, 0)] = model.lambda;
        }
        ModelKind::Rwa => {
            m[(0, 2)] = model.lambda;
            m[(2, 0)] = model.lambda;
            m[(1, 3)] = model.lambda;
            m[(3, 1)] = model.lambda;
        }
        ModelKind::Nelson => {
            return Err(Error::Unsupported(
                "the Nelson Hamiltonian is not quadratic".into(),
            ))
        }
    }
    Ok(m)
}

/// `exp(J M t)` for an `M` that decouples in the symmetric/antisymmetric modes.
///
/// Each 2x2 mode block `G = J B` satisfies `G^2 = -det(B) I`, so its
/// exponential is `cos(w t) I + sin(w t)/w G` with `w^2 = det B`.
pub fn symplectic_propagator(m: &Matrix4<f64>, t: f64) -> Result<Matrix4<f64>> {
    let r = mode_rotation();
    let k = r * m * r;
    let off = k.fixed_view::<2, 2>(0, 2).norm() + k.fixed_view::<2, 2>(2, 0).norm();
    if off > 1e-12 * k.norm().max(1.0) {
        return Err(Error::Unsupported(
            "quadratic form does not separate into normal modes".into(),
        ));
    }
    if t == 0.0 {
        return Ok(Matrix4::identity());
    }
    let j2 = Matrix2::new(0.0, 1.0, -1.0, 0.0);
    let mut d = Matrix4::zeros();
    for s in [0, 2] {
        let b: Matrix2<f64> = k.fixed_view::<2, 2>(s, s).into();
        let g = j2 * b;
        let w2 = b.determinant();
        let block = if w2.abs() * t * t < 1e-16 {
            Matrix2::identity() + g * t
        } else if w2 > 0.0 {
            let w = w2.sqrt();
            Matrix2::identity() * (w * t).cos() + g * ((w * t).sin() / w)
        } else {
            return Err(Error::Unstable(format!(
                "mode block has frequency^2 = {w2}"
            )));
        };
        d.fixed_view_mut::<2, 2>(s, s).copy_from(&block);
    }
    Ok(r * d * r)
}

/// First and second moments of a Gaussian state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceState {
    pub mean: Vector4<f64>,
    pub cov: Matrix4<f64>,
    pub hbar: f64,
}

impl CovarianceState {
    /// Product of coherent states centred at `center`: `cov = (hbar/2) I`.
    pub fn coherent(center: PhasePoint, hbar: f64) -> Self {
        Self {
            mean: center.to_vector(),
            cov: Matrix4::identity() * (hbar / 2.0),
            hbar,
        }
    }

    /// Checks symmetry, positivity and `cov + i (hbar/2) J >= 0`.
    pub fn validate(&self) -> Result<()> {
        if (self.cov - self.cov.transpose()).norm() > 1e-12 * self.cov.norm() {
            return Err(Error::Config {
                field: "cov",
                reason: "covariance is not symmetric".into(),
            });
        }
        if self.cov.cholesky().is_none() {
            return Err(Error::Config {
                field: "cov",
                reason: "covariance is not positive definite".into(),
            });
        }
        let j = symplectic_form();
        let h = self.cov.map(|v| Complex::new(v, 0.0))
            + j.map(|v| Complex::new(0.0, v * self.hbar / 2.0));
        let min = h.symmetric_eigenvalues().min();
        if min < -1e-12 * self.hbar {
            return Err(Error::Uncertainty {
                det: min,
                bound: 0.0,
            });
        }
        Ok(())
    }

    pub fn block(&self, sub: Subsystem) -> Matrix2<f64> {
        let s = match sub {
            Subsystem::One => 0,
            Subsystem::Two => 2,
        };
        self.cov.fixed_view::<2, 2>(s, s).into()
    }
}

/// `mean -> S mean`, `cov -> S cov S^T`.
pub fn evolve(state: &CovarianceState, s: &Matrix4<f64>) -> CovarianceState {
    CovarianceState {
        mean: s * state.mean,
        cov: s * state.cov * s.transpose(),
        hbar: state.hbar,
    }
}

/// `tr rho_k^2 = (hbar/2) / sqrt(det sigma_k)`.
pub fn reduced_purity(state: &CovarianceState, sub: Subsystem) -> Result<f64> {
    let det = state.block(sub).determinant();
    let bound = (state.hbar / 2.0).powi(2);
    if det < bound * (1.0 - 1e-10) {
        return Err(Error::Uncertainty { det, bound });
    }
    Ok(state.hbar / 2.0 / det.sqrt())
}

/// `tr rho^2 = (hbar/2)^2 / sqrt(det cov)`.
pub fn global_purity(state: &CovarianceState) -> f64 {
    (state.hbar / 2.0).powi(2) / state.cov.determinant().sqrt()
}

/// Linear entropies and mutual information of a globally pure Gaussian state.
pub fn qlmi_gaussian(state: &CovarianceState) -> Result<Entropies> {
    let purity = global_purity(state);
    if (purity - 1.0).abs() > 1e-8 {
        return Err(Error::Impure { purity });
    }
    let s1 = 1.0 - reduced_purity(state, Subsystem::One)?;
    let s2 = 1.0 - reduced_purity(state, Subsystem::Two)?;
    Ok(Entropies::from_pair(s1, s2))
}

/// Quantum entropies along a time grid for coherent initial states.
pub fn gaussian_series(
    model: &ModelSpec,
    center: PhasePoint,
    times: &[f64],
) -> Result<Vec<Entropies>> {
    let m = quadratic_form(model)?;
    let start = CovarianceState::coherent(center, model.hbar);
    times
        .iter()
        .map(|&t| qlmi_gaussian(&evolve(&start, &symplectic_propagator(&m, t)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::{jacobian_fd, FlowPlan};
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn quadratic_forms() {
        let m = quadratic_form(&ModelSpec::new(ModelKind::Bilinear, 0.0)).unwrap();
        assert_eq!(m, Matrix4::identity());
        let m = quadratic_form(&ModelSpec::new(ModelKind::Bilinear, 0.9)).unwrap();
        assert_eq!((m[(0, 2)], m[(2, 0)], m[(1, 3)]), (0.9, 0.9, 0.0));
        let m = quadratic_form(&ModelSpec::new(ModelKind::Rwa, 0.4)).unwrap();
        assert_eq!((m[(0, 2)], m[(1, 3)], m[(3, 1)]), (0.4, 0.4, 0.4));
        assert!(quadratic_form(&ModelSpec::nelson(0.05)).is_err());
    }

    #[test]
    fn quarter_period_rotation() {
        let s = symplectic_propagator(&Matrix4::identity(), FRAC_PI_2).unwrap();
        let x = s * Vector4::new(1.0, 2.0, 3.0, 4.0);
        assert!(
            (x - Vector4::new(2.0, -1.0, 4.0, -3.0)).norm() < 1e-14,
            "{x}"
        );
        assert_eq!(
            symplectic_propagator(&Matrix4::identity(), 0.0).unwrap(),
            Matrix4::identity()
        );
    }

    #[test]
    fn propagator_matches_classical_tangent_map() {
        let model = ModelSpec::new(ModelKind::Bilinear, 0.9);
        let s = symplectic_propagator(&quadratic_form(&model).unwrap(), 1.3).unwrap();
        let j = symplectic_form();
        assert!((s.transpose() * j * s - j).norm() < 1e-12);
        let jac = jacobian_fd(
            &FlowPlan::rk4(model, 1e-4),
            PhasePoint::new(0.1, 0.2, -0.3, 0.4),
            1.3,
            1e-4,
        )
        .unwrap();
        assert!((jac - s).norm() < 1e-9);
    }

    #[test]
    fn purity_of_wide_block_is_half() {
        let mut st = CovarianceState::coherent(PhasePoint::ORIGIN, 0.7);
        st.cov = Matrix4::identity() * 0.7;
        assert!((reduced_purity(&st, Subsystem::One).unwrap() - 0.5).abs() < 1e-15);
        st.cov = Matrix4::identity() * 0.2;
        assert!(matches!(
            reduced_purity(&st, Subsystem::One),
            Err(Error::Uncertainty { .. })
        ));
        assert!(st.validate().is_err());
    }

    #[test]
    fn coherent_state_is_pure_and_valid() {
        let st = CovarianceState::coherent(PhasePoint::new(1.0, 0.0, -2.0, 0.5), 0.05);
        st.validate().unwrap();
        let e = qlmi_gaussian(&st).unwrap();
        assert!(e.s1.abs() < 1e-15 && e.mutual.abs() < 1e-15);
    }

    #[test]
    fn uncoupled_evolution_keeps_isotropic_covariance() {
        let st = CovarianceState::coherent(PhasePoint::ORIGIN, 1.0);
        let s = symplectic_propagator(&Matrix4::identity(), 0.77).unwrap();
        assert!((evolve(&st, &s).cov - st.cov).norm() < 1e-15);
    }

    #[test]
    fn rwa_coherent_inputs_stay_unentangled() {
        let model = ModelSpec::new(ModelKind::Rwa, 1.0);
        let times: Vec<f64> = (0..50).map(|k| 0.13 * k as f64).collect();
        for e in gaussian_series(&model, PhasePoint::new(1.0, -0.5, 0.3, 2.0), &times).unwrap() {
            assert!(e.mutual.abs() < 1e-12);
        }
    }

    #[test]
    fn impure_state_rejected() {
        let mut st = CovarianceState::coherent(PhasePoint::ORIGIN, 1.0);
        st.cov *= 2.0;
        assert!(matches!(qlmi_gaussian(&st), Err(Error::Impure { .. })));
    }
}
