//! Closed-form references for the RWA and bilinear couplings.

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::flows::FlowPlan;
use crate::types::{ModelKind, ModelSpec, PhasePoint, Subsystem};

/// Quantum and classical mutual information from a closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reference {
    pub quantum: f64,
    pub classical: f64,
}

/// Parameters of the RWA closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RwaParams {
    pub lambda: f64,
    pub omega: f64,
    pub hbar: f64,
}

impl RwaParams {
    pub fn new(lambda: f64, omega: f64, hbar: f64) -> Result<Self> {
        for (field, v) in [("lambda", lambda), ("omega1", omega), ("hbar", hbar)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config {
                    field,
                    reason: format!("must be positive, got {v}"),
                });
            }
        }
        Ok(Self {
            lambda,
            omega,
            hbar,
        })
    }

    /// The closed forms hold for the exchange coupling at unit frequency.
    pub fn from_model(model: &ModelSpec) -> Option<Self> {
        let unit = (model.omega1 - 1.0).abs() < 1e-12 && (model.omega2 - 1.0).abs() < 1e-12;
        (model.kind == ModelKind::Rwa && unit && model.lambda > 0.0)
            .then(|| Self::new(model.lambda, 1.0, model.hbar).ok())
            .flatten()
    }
}

/// `u(t) = sin^2(2 l t) (5 + 3 cos 4 l t) / 32`, the classical linear entropy
/// of either mode for two `n = 1` Husimi inputs.
pub fn rwa_u(t: f64, lambda: f64) -> f64 {
    let s = (2.0 * lambda * t).sin();
    s * s * (5.0 + 3.0 * (4.0 * lambda * t).cos()) / 32.0
}

/// `|1> (x) |1>`: `I = 8u (2 - 8u)`, `I_cl = u (2 - u)`.
pub fn rwa_fock_fock(t: f64, lambda: f64) -> Reference {
    let u = rwa_u(t, lambda);
    Reference {
        quantum: 8.0 * u * (2.0 - 8.0 * u),
        classical: u * (2.0 - u),
    }
}

/// `|0> (x) |1>`: `I = sin^2(2 l t)(7 + cos 4 l t)/8`, `I_cl = sin^2(2 l t)(15 + cos 4 l t)/64`.
pub fn rwa_coh_fock(t: f64, lambda: f64) -> Reference {
    let s2 = (2.0 * lambda * t).sin().powi(2);
    let c = (4.0 * lambda * t).cos();
    Reference {
        quantum: s2 * (7.0 + c) / 8.0,
        classical: s2 * (15.0 + c) / 64.0,
    }
}

/// Exponent `-x^T A x + 2 B^T x + C` of a Gaussian in four variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianExponent {
    pub a: Matrix4<f64>,
    pub b: Vector4<f64>,
    pub c: f64,
}

impl GaussianExponent {
    /// Transported Husimi Gaussian: `P(x, t) = N exp(-|S^-1 x - x0|^2 / 2 hbar)`.
    pub fn transported(s_inv: &Matrix4<f64>, center: PhasePoint, hbar: f64) -> Self {
        let x0 = center.to_vector();
        Self {
            a: s_inv.transpose() * s_inv / (2.0 * hbar),
            b: s_inv.transpose() * x0 / (2.0 * hbar),
            c: -x0.dot(&x0) / (2.0 * hbar),
        }
    }

    /// `int P_k^2` for `P = norm * exp(...)`, integrating the other plane out
    /// by completing the square.
    pub fn marginal_square(&self, norm: f64, keep: Subsystem) -> Option<f64> {
        let (k, o) = match keep {
            Subsystem::One => (0, 2),
            Subsystem::Two => (2, 0),
        };
        let alpha: Matrix2<f64> = self.a.fixed_view::<2, 2>(k, k).into();
        let beta: Matrix2<f64> = self.a.fixed_view::<2, 2>(o, o).into();
        let gamma: Matrix2<f64> = self.a.fixed_view::<2, 2>(k, o).into();
        let (bk, bo): (Vector2<f64>, Vector2<f64>) = (
            self.b.fixed_rows::<2>(k).into(),
            self.b.fixed_rows::<2>(o).into(),
        );
        let beta_inv = beta.try_inverse()?;
        let a_t = alpha - gamma * beta_inv * gamma.transpose();
        let b_t = bk - gamma * beta_inv * bo;
        let c_t = self.c + bo.dot(&(beta_inv * bo));
        let k1 = norm * PI / beta.determinant().sqrt();
        // int exp(-2 y^T A y + 4 B^T y + 2 C) = pi / sqrt(det 2A) exp(2 B^T A^-1 B + 2 C)
        let a_inv = a_t.try_inverse()?;
        let expo = 2.0 * b_t.dot(&(a_inv * b_t)) + 2.0 * c_t;
        Some(k1 * k1 * PI / (4.0 * a_t.determinant()).sqrt() * expo.exp())
    }

    /// `1 / (8 hbar^3 det(beta) sqrt(det(alpha - gamma beta^-1 gamma^T)))`,
    /// the centre-free ratio `int P_1^2(t) / int P_1^2(0)`.
    pub fn purity_ratio(&self, hbar: f64) -> Option<f64> {
        let alpha: Matrix2<f64> = self.a.fixed_view::<2, 2>(0, 0).into();
        let beta: Matrix2<f64> = self.a.fixed_view::<2, 2>(2, 2).into();
        let gamma: Matrix2<f64> = self.a.fixed_view::<2, 2>(0, 2).into();
        let a_t = alpha - gamma * beta.try_inverse()? * gamma.transpose();
        Some(1.0 / (8.0 * hbar.powi(3) * beta.determinant() * a_t.determinant().sqrt()))
    }
}

fn bilinear_exponent(model: &ModelSpec, center: PhasePoint, t: f64) -> Result<GaussianExponent> {
    if model.kind != ModelKind::Bilinear {
        return Err(Error::Unsupported(format!(
            "bilinear oracle called for the {} model",
            model.kind
        )));
    }
    let plan = FlowPlan::new(*model)?;
    let s_inv = plan
        .linear_map(-t)
        .expect("quadratic model has a linear flow");
    Ok(GaussianExponent::transported(&s_inv, center, model.hbar))
}

/// Classical mutual information of a transported Gaussian, by exact Gaussian
/// integration of both marginals. The centre enters only through terms that cancel.
pub fn bilinear_icl_oracle(model: &ModelSpec, center: PhasePoint, t: f64) -> Result<f64> {
    let hbar = model.hbar;
    let norm = 1.0 / (4.0 * PI * PI * hbar * hbar);
    let now = bilinear_exponent(model, center, t)?;
    let start = bilinear_exponent(model, center, 0.0)?;
    let fail = || Error::Convergence("singular Gaussian block".into());
    let mut s = [0.0; 2];
    for (slot, sub) in s.iter_mut().zip([Subsystem::One, Subsystem::Two]) {
        let a = now.marginal_square(norm, sub).ok_or_else(fail)?;
        let b = start.marginal_square(norm, sub).ok_or_else(fail)?;
        *slot = 1.0 - a / b;
    }
    Ok(s[0] + s[1] - s[0] * s[1])
}

/// Same quantity from the symmetric form `1 - r^2`, `r = int P_1^2(t) / int P_1^2(0)`,
/// valid because both subsystems lose purity equally.
pub fn bilinear_icl_symmetric(model: &ModelSpec, t: f64) -> Result<f64> {
    let e = bilinear_exponent(model, PhasePoint::ORIGIN, t)?;
    let r = e
        .purity_ratio(model.hbar)
        .ok_or_else(|| Error::Convergence("singular Gaussian block".into()))?;
    Ok(1.0 - r * r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn u_values() {
        assert_eq!(rwa_u(0.0, 1.0), 0.0);
        assert!((rwa_u(FRAC_PI_4, 1.0) - 1.0 / 16.0).abs() < 1e-15);
        assert!((rwa_u(PI / 8.0, 1.0) - 5.0 / 64.0).abs() < 1e-15);
        let l = 0.7;
        for t in [0.1, 0.9, 2.2] {
            assert!((rwa_u(t + PI / (2.0 * l), l) - rwa_u(t, l)).abs() < 1e-14);
        }
    }

    #[test]
    fn fock_fock_values() {
        let r = rwa_fock_fock(FRAC_PI_4, 1.0);
        assert!((r.quantum - 0.75).abs() < 1e-15);
        assert!((r.classical - 31.0 / 256.0).abs() < 1e-15);
        let r = rwa_fock_fock(PI / 2.0, 1.0);
        assert!(r.quantum.abs() < 1e-15 && r.classical.abs() < 1e-15);
    }

    #[test]
    fn coh_fock_values() {
        let r = rwa_coh_fock(FRAC_PI_4, 1.0);
        assert!((r.quantum - 0.75).abs() < 1e-15);
        assert!((r.classical - 0.218_75).abs() < 1e-15);
        assert_eq!(
            rwa_coh_fock(0.0, 1.0),
            Reference {
                quantum: 0.0,
                classical: 0.0
            }
        );
        let r = rwa_coh_fock(PI / 2.0, 1.0);
        assert!(r.quantum.abs() < 1e-15 && r.classical.abs() < 1e-15);
    }

    #[test]
    fn bilinear_oracle_trivial_cases() {
        let m = ModelSpec::new(ModelKind::Bilinear, 0.9);
        assert!(
            bilinear_icl_oracle(&m, PhasePoint::new(0.3, 0.1, -1.0, 2.0), 0.0)
                .unwrap()
                .abs()
                < 1e-14
        );
        let free = ModelSpec::new(ModelKind::Bilinear, 0.0);
        for t in [0.5, 3.0] {
            assert!(
                bilinear_icl_oracle(&free, PhasePoint::ORIGIN, t)
                    .unwrap()
                    .abs()
                    < 1e-14
            );
        }
        assert!(bilinear_icl_oracle(
            &ModelSpec::new(ModelKind::Bilinear, 1.2),
            PhasePoint::ORIGIN,
            1.0
        )
        .is_err());
    }

    #[test]
    fn symmetric_form_agrees() {
        let m = ModelSpec::new(ModelKind::Bilinear, 0.9).with_hbar(0.4);
        for t in [0.3, 1.1, 4.0, 9.5] {
            let a = bilinear_icl_oracle(&m, PhasePoint::new(1.0, -0.5, 0.2, 0.0), t).unwrap();
            let b = bilinear_icl_symmetric(&m, t).unwrap();
            assert!((a - b).abs() < 1e-12, "{a} {b}");
            assert!((0.0..=1.0).contains(&a));
        }
    }
}
