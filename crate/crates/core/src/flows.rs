//! Hamiltonian flows of the three models.
//!
//! The quadratic models (bilinear and RWA couplings at equal frequencies)
//! separate into the normal modes `x = (q1 + q2)/sqrt 2`, `y = (q1 - q2)/sqrt 2`
//! (same combination for the momenta), each with a Hamiltonian of the form
//! `(a P^2 + b X^2) / 2`. The Nelson system is integrated with fixed-step RK4.

use nalgebra::{Matrix2, Matrix4};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::types::{ModelKind, ModelSpec, PhasePoint};

pub const DEFAULT_RK4_DT: f64 = 1e-3;
pub const DEFAULT_ESCAPE_RADIUS: f64 = 100.0;
/// Steps between escape checks. Non-finite coordinates fail the check too, so
/// a trajectory that overflows in between is still caught.
pub const ESCAPE_CHECK_INTERVAL: usize = 8;

/// `H1 + H2 + H_I` at `x`.
pub fn energy(model: &ModelSpec, x: PhasePoint) -> f64 {
    let PhasePoint { q1, p1, q2, p2 } = x;
    let (w1, w2) = (model.omega1, model.omega2);
    let h0 = 0.5 * (p1 * p1 + w1 * w1 * q1 * q1) + 0.5 * (p2 * p2 + w2 * w2 * q2 * q2);
    let hi = match model.kind {
        ModelKind::Bilinear => model.lambda * q1 * q2,
        ModelKind::Rwa => model.lambda * (q1 * q2 + p1 * p2),
        ModelKind::Nelson => -q1 * p1 * p2 + 0.5 * q1 * q1 * q2 * q2,
    };
    h0 + hi
}

/// Hamilton's equations `(dH/dp1, -dH/dq1, dH/dp2, -dH/dq2)`.
#[inline]
pub fn vector_field(model: &ModelSpec, x: [f64; 4]) -> [f64; 4] {
    let [q1, p1, q2, p2] = x;
    let (w1s, w2s, l) = (
        model.omega1 * model.omega1,
        model.omega2 * model.omega2,
        model.lambda,
    );
    match model.kind {
        ModelKind::Bilinear => [p1, -w1s * q1 - l * q2, p2, -w2s * q2 - l * q1],
        ModelKind::Rwa => [
            p1 + l * p2,
            -w1s * q1 - l * q2,
            p2 + l * p1,
            -w2s * q2 - l * q1,
        ],
        ModelKind::Nelson => [
            p1 - q1 * p2,
            -w1s * q1 + p1 * p2 - q1 * q2 * q2,
            p2 - q1 * p1,
            -w2s * q2 - q1 * q1 * q2,
        ],
    }
}

/// One classical RK4 step of size `h` (negative `h` integrates backwards).
#[inline]
pub fn rk4_step(model: &ModelSpec, x: [f64; 4], h: f64) -> [f64; 4] {
    let add = |a: [f64; 4], k: [f64; 4], s: f64| {
        [
            a[0] + s * k[0],
            a[1] + s * k[1],
            a[2] + s * k[2],
            a[3] + s * k[3],
        ]
    };
    let k1 = vector_field(model, x);
    let k2 = vector_field(model, add(x, k1, 0.5 * h));
    let k3 = vector_field(model, add(x, k2, 0.5 * h));
    let k4 = vector_field(model, add(x, k3, h));
    let s = h / 6.0;
    [
        x[0] + s * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        x[1] + s * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        x[2] + s * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
        x[3] + s * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]),
    ]
}

/// Structure-of-arrays batch of `L` phase points, `x[coordinate][lane]`.
pub type Lanes<const L: usize> = [[f64; L]; 4];

#[inline(always)]
fn vector_field_lanes<const L: usize>(model: &ModelSpec, x: &Lanes<L>) -> Lanes<L> {
    let (w1s, w2s, l) = (
        model.omega1 * model.omega1,
        model.omega2 * model.omega2,
        model.lambda,
    );
    let [q1, p1, q2, p2] = x;
    let mut out = [[0.0; L]; 4];
    // same expressions as `vector_field`, so both paths round identically
    match model.kind {
        ModelKind::Bilinear => {
            for i in 0..L {
                out[0][i] = p1[i];
                out[1][i] = -w1s * q1[i] - l * q2[i];
                out[2][i] = p2[i];
                out[3][i] = -w2s * q2[i] - l * q1[i];
            }
        }
        ModelKind::Rwa => {
            for i in 0..L {
                out[0][i] = p1[i] + l * p2[i];
                out[1][i] = -w1s * q1[i] - l * q2[i];
                out[2][i] = p2[i] + l * p1[i];
                out[3][i] = -w2s * q2[i] - l * q1[i];
            }
        }
        ModelKind::Nelson => {
            for i in 0..L {
                out[0][i] = p1[i] - q1[i] * p2[i];
                out[1][i] = -w1s * q1[i] + p1[i] * p2[i] - q1[i] * q2[i] * q2[i];
                out[2][i] = p2[i] - q1[i] * p1[i];
                out[3][i] = -w2s * q2[i] - q1[i] * q1[i] * q2[i];
            }
        }
    }
    out
}

#[inline(always)]
fn rk4_step_lanes<const L: usize>(model: &ModelSpec, x: &Lanes<L>, h: f64) -> Lanes<L> {
    let add = |a: &Lanes<L>, k: &Lanes<L>, s: f64| {
        let mut o = *a;
        for c in 0..4 {
            for i in 0..L {
                o[c][i] = a[c][i] + s * k[c][i];
            }
        }
        o
    };
    let k1 = vector_field_lanes(model, x);
    let k2 = vector_field_lanes(model, &add(x, &k1, 0.5 * h));
    let k3 = vector_field_lanes(model, &add(x, &k2, 0.5 * h));
    let k4 = vector_field_lanes(model, &add(x, &k3, h));
    let s = h / 6.0;
    let mut o = *x;
    for c in 0..4 {
        for i in 0..L {
            o[c][i] = x[c][i] + s * (k1[c][i] + 2.0 * k2[c][i] + 2.0 * k3[c][i] + k4[c][i]);
        }
    }
    o
}

/// A normal mode with Hamiltonian `(a P^2 + b X^2) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub a: f64,
    pub b: f64,
}

impl Mode {
    /// Angular frequency `sqrt(a b)`.
    pub fn frequency(&self) -> f64 {
        (self.a * self.b).sqrt()
    }

    /// Time-`t` map of `(X, P)`.
    pub fn block(&self, t: f64) -> Matrix2<f64> {
        let w = self.frequency();
        let (c, s) = if w * t.abs() < 1e-8 {
            (
                1.0 - 0.5 * (w * t).powi(2),
                t * (1.0 - (w * t).powi(2) / 6.0),
            )
        } else {
            ((w * t).cos(), (w * t).sin() / w)
        };
        Matrix2::new(c, self.a * s, -self.b * s, c)
    }
}

/// The `x` and `y` modes of a quadratic model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalModes {
    pub x: Mode,
    pub y: Mode,
}

impl NormalModes {
    pub fn of(model: &ModelSpec) -> Result<Self> {
        if !model.kind.is_quadratic() {
            return Err(Error::Unsupported(
                "the Nelson coupling has no normal modes".into(),
            ));
        }
        if model.omega1 != model.omega2 {
            return Err(Error::Unsupported(format!(
                "{} coupling requires omega1 == omega2 (got {} and {})",
                model.kind, model.omega1, model.omega2
            )));
        }
        let (w2, l) = (model.omega1 * model.omega1, model.lambda);
        let modes = match model.kind {
            ModelKind::Bilinear => NormalModes {
                x: Mode { a: 1.0, b: w2 + l },
                y: Mode { a: 1.0, b: w2 - l },
            },
            _ => NormalModes {
                x: Mode {
                    a: 1.0 + l,
                    b: w2 + l,
                },
                y: Mode {
                    a: 1.0 - l,
                    b: w2 - l,
                },
            },
        };
        for (name, m) in [("x", modes.x), ("y", modes.y)] {
            let stable = match model.kind {
                ModelKind::Bilinear => m.b > 0.0,
                _ => m.a * m.b >= 0.0 && !(m.a == 0.0 && m.b != 0.0) && !(m.b == 0.0 && m.a != 0.0),
            };
            if !stable {
                return Err(Error::Unstable(format!(
                    "{name} mode of the {} model has a = {}, b = {} (lambda = {l}, omega^2 = {w2})",
                    model.kind, m.a, m.b
                )));
            }
        }
        Ok(modes)
    }

    /// Time-`t` map in `(q1, p1, q2, p2)` coordinates.
    pub fn map(&self, t: f64) -> Matrix4<f64> {
        let bx = self.x.block(t);
        let by = self.y.block(t);
        let mut d = Matrix4::zeros();
        d.fixed_view_mut::<2, 2>(0, 0).copy_from(&bx);
        d.fixed_view_mut::<2, 2>(2, 2).copy_from(&by);
        let r = mode_rotation();
        r * d * r
    }
}

/// Orthogonal involution taking `(q1, p1, q2, p2)` to `(x, Px, y, Py)`.
pub fn mode_rotation() -> Matrix4<f64> {
    let s = FRAC_1_SQRT_2;
    Matrix4::new(
        s, 0.0, s, 0.0, //
        0.0, s, 0.0, s, //
        s, 0.0, -s, 0.0, //
        0.0, s, 0.0, -s,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlowMethod {
    AnalyticNormalMode,
    Rk4,
}

/// How trajectories of a model are computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowPlan {
    pub model: ModelSpec,
    pub method: FlowMethod,
    pub rk4_dt: f64,
    /// RK4 trajectories whose largest coordinate exceeds this are reported as escaped.
    pub escape_radius: f64,
    modes: Option<NormalModes>,
}

impl FlowPlan {
    /// Analytic flow for the quadratic models, RK4 at the default step for Nelson.
    pub fn new(model: ModelSpec) -> Result<Self> {
        if model.kind.is_quadratic() {
            let modes = NormalModes::of(&model)?;
            Ok(Self {
                model,
                method: FlowMethod::AnalyticNormalMode,
                rk4_dt: DEFAULT_RK4_DT,
                escape_radius: DEFAULT_ESCAPE_RADIUS,
                modes: Some(modes),
            })
        } else {
            Ok(Self::rk4(model, DEFAULT_RK4_DT))
        }
    }

    /// Numerical integration for any model.
    pub fn rk4(model: ModelSpec, dt: f64) -> Self {
        Self {
            model,
            method: FlowMethod::Rk4,
            rk4_dt: dt,
            escape_radius: DEFAULT_ESCAPE_RADIUS,
            modes: None,
        }
    }

    pub fn with_rk4_dt(mut self, dt: f64) -> Self {
        self.rk4_dt = dt;
        self
    }

    pub fn with_escape_radius(mut self, r: f64) -> Self {
        self.escape_radius = r;
        self
    }

    pub fn modes(&self) -> Option<&NormalModes> {
        self.modes.as_ref()
    }

    /// The linear time-`t` map, if the flow is analytic.
    pub fn linear_map(&self, t: f64) -> Option<Matrix4<f64>> {
        match self.method {
            // exact at t = 0; the mode rotation alone is off by an ulp
            FlowMethod::AnalyticNormalMode if t == 0.0 => Some(Matrix4::identity()),
            FlowMethod::AnalyticNormalMode => self.modes.map(|m| m.map(t)),
            FlowMethod::Rk4 => None,
        }
    }

    /// `phi_t(x0)`; `t` may be negative.
    pub fn flow(&self, x0: PhasePoint, t: f64) -> Result<PhasePoint> {
        self.at(t).apply(x0)
    }

    /// `phi_t^{-1}(x) = phi_{-t}(x)`.
    pub fn inverse_flow(&self, x: PhasePoint, t: f64) -> Result<PhasePoint> {
        self.flow(x, -t)
    }

    /// Prepares the time-`t` map for repeated application.
    pub fn at(&self, t: f64) -> TimeMap {
        match self.linear_map(t) {
            Some(m) => TimeMap::Linear(m),
            None => TimeMap::Numeric { plan: *self, t },
        }
    }

    /// Integrates with RK4 regardless of method, landing exactly on `t`.
    pub fn integrate(&self, x0: PhasePoint, t: f64) -> Result<PhasePoint> {
        let mut x = x0.to_array();
        if t == 0.0 {
            return Ok(x0);
        }
        let dt = self.rk4_dt;
        let span = t.abs();
        let h = dt.copysign(t);
        let n_full = (span / dt).floor() as usize;
        let rest = span - n_full as f64 * dt;
        for k in 0..n_full {
            x = rk4_step(&self.model, x, h);
            if (k + 1) % ESCAPE_CHECK_INTERVAL == 0 && escaped(x, self.escape_radius) {
                return Err(Error::Escaped {
                    t: (k + 1) as f64 * h,
                });
            }
        }
        if rest > 0.0 {
            x = rk4_step(&self.model, x, rest.copysign(t));
        }
        if escaped(x, self.escape_radius) {
            return Err(Error::Escaped { t });
        }
        Ok(PhasePoint::from_array(x))
    }

    /// [`FlowPlan::integrate`] for `L` points at once; `alive[i]` is false where lane `i` escaped.
    ///
    /// Lanes give the same bits as the scalar path.
    pub fn integrate_lanes<const L: usize>(&self, x: &mut Lanes<L>, t: f64) -> [bool; L] {
        let mut alive = [true; L];
        if t == 0.0 {
            return alive;
        }
        let dt = self.rk4_dt;
        let span = t.abs();
        let h = dt.copysign(t);
        let n_full = (span / dt).floor() as usize;
        let rest = span - n_full as f64 * dt;
        let radius = self.escape_radius;
        let check = |x: &mut Lanes<L>, alive: &mut [bool; L]| {
            let mut bad = [false; L];
            for c in x.iter() {
                for i in 0..L {
                    bad[i] |= c[i].is_nan() || c[i].abs() > radius;
                }
            }
            if bad.iter().any(|b| *b) {
                for i in (0..L).filter(|&i| bad[i]) {
                    alive[i] = false;
                    for c in x.iter_mut() {
                        c[i] = 0.0;
                    }
                }
            }
        };
        for k in 0..n_full {
            *x = rk4_step_lanes(&self.model, x, h);
            if (k + 1) % ESCAPE_CHECK_INTERVAL == 0 {
                check(x, &mut alive);
            }
        }
        if rest > 0.0 {
            *x = rk4_step_lanes(&self.model, x, rest.copysign(t));
        }
        check(x, &mut alive);
        alive
    }

    /// Energy error of a trajectory per unit time.
    pub fn energy_drift(&self, x0: PhasePoint, t: f64) -> Result<f64> {
        let x = self.flow(x0, t)?;
        Ok((energy(&self.model, x) - energy(&self.model, x0)).abs() / t.abs().max(1.0))
    }

    /// Distance between the endpoints at `rk4_dt` and `rk4_dt / 2`.
    pub fn step_halving_error(&self, x0: PhasePoint, t: f64) -> Result<f64> {
        let a = self.flow(x0, t)?;
        let b = self.with_rk4_dt(self.rk4_dt / 2.0).flow(x0, t)?;
        Ok((a.to_vector() - b.to_vector()).norm())
    }
}

#[inline]
fn escaped(x: [f64; 4], radius: f64) -> bool {
    !x.iter().all(|v| v.abs() <= radius)
}

/// A flow map frozen at one time.
#[derive(Debug, Clone, Copy)]
pub enum TimeMap {
    Linear(Matrix4<f64>),
    Numeric { plan: FlowPlan, t: f64 },
}

impl TimeMap {
    /// Applies the map lane by lane; escaped lanes come back `false`.
    pub fn apply_lanes<const L: usize>(&self, x: &mut Lanes<L>) -> [bool; L] {
        match self {
            TimeMap::Linear(_) => {
                let mut alive = [true; L];
                for (i, a) in alive.iter_mut().enumerate() {
                    let p = PhasePoint::new(x[0][i], x[1][i], x[2][i], x[3][i]);
                    match self.apply(p) {
                        Ok(y) => {
                            x[0][i] = y.q1;
                            x[1][i] = y.p1;
                            x[2][i] = y.q2;
                            x[3][i] = y.p2;
                        }
                        Err(_) => *a = false,
                    }
                }
                alive
            }
            TimeMap::Numeric { plan, t } => plan.integrate_lanes(x, *t),
        }
    }

    #[inline]
    pub fn apply(&self, x: PhasePoint) -> Result<PhasePoint> {
        match self {
            TimeMap::Linear(m) => Ok(PhasePoint::from_vector(&(m * x.to_vector()))),
            TimeMap::Numeric { plan, t } => plan.integrate(x, *t),
        }
    }
}

/// Central finite-difference Jacobian of `phi_t` at `x0`.
pub fn jacobian_fd(plan: &FlowPlan, x0: PhasePoint, t: f64, h: f64) -> Result<Matrix4<f64>> {
    let mut jac = Matrix4::zeros();
    for j in 0..4 {
        let mut plus = x0.to_array();
        let mut minus = x0.to_array();
        plus[j] += h;
        minus[j] -= h;
        let fp = plan.flow(PhasePoint::from_array(plus), t)?.to_vector();
        let fm = plan.flow(PhasePoint::from_array(minus), t)?.to_vector();
        jac.set_column(j, &((fp - fm) / (2.0 * h)));
    }
    Ok(jac)
}
