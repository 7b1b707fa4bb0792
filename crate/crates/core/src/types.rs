//! Value types shared by every module.

use nalgebra::Vector4;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// A point `(q1, p1, q2, p2)` of the four dimensional phase space.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhasePoint {
    pub q1: f64,
    pub p1: f64,
    pub q2: f64,
    pub p2: f64,
}

impl PhasePoint {
    pub const ORIGIN: PhasePoint = PhasePoint {
        q1: 0.0,
        p1: 0.0,
        q2: 0.0,
        p2: 0.0,
    };

    pub const fn new(q1: f64, p1: f64, q2: f64, p2: f64) -> Self {
        Self { q1, p1, q2, p2 }
    }

    pub const fn from_array(a: [f64; 4]) -> Self {
        Self {
            q1: a[0],
            p1: a[1],
            q2: a[2],
            p2: a[3],
        }
    }

    pub const fn to_array(self) -> [f64; 4] {
        [self.q1, self.p1, self.q2, self.p2]
    }

    pub fn to_vector(self) -> Vector4<f64> {
        Vector4::new(self.q1, self.p1, self.q2, self.p2)
    }

    pub fn from_vector(v: &Vector4<f64>) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn is_finite(self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// Largest absolute component.
    pub fn max_abs(self) -> f64 {
        self.to_array().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Phase-space coordinates `(q, p)` of subsystem 1 or 2.
    pub fn plane(self, sub: Subsystem) -> (f64, f64) {
        match sub {
            Subsystem::One => (self.q1, self.p1),
            Subsystem::Two => (self.q2, self.p2),
        }
    }
}

/// One of the two oscillators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subsystem {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Coupling `lambda * q1 * q2`.
    Bilinear,
    /// Coupling `-q1 p1 p2 + q1^2 q2^2 / 2`.
    Nelson,
    /// Coupling `lambda * (q1 q2 + p1 p2)`.
    Rwa,
}

impl ModelKind {
    pub fn is_quadratic(self) -> bool {
        !matches!(self, ModelKind::Nelson)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Bilinear => "bilinear",
            ModelKind::Nelson => "nelson",
            ModelKind::Rwa => "rwa",
        })
    }
}

/// Hamiltonian `H = (p1^2 + w1^2 q1^2)/2 + (p2^2 + w2^2 q2^2)/2 + H_I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub omega1: f64,
    pub omega2: f64,
    pub lambda: f64,
    pub hbar: f64,
}

impl ModelSpec {
    /// Unit frequencies, the given coupling and `hbar = 1`.
    pub fn new(kind: ModelKind, lambda: f64) -> Self {
        Self {
            kind,
            omega1: 1.0,
            omega2: 1.0,
            lambda,
            hbar: 1.0,
        }
    }

    /// The Nelson system with `w1 = sqrt(0.1)`, `w2 = sqrt(2)`.
    pub fn nelson(hbar: f64) -> Self {
        Self {
            kind: ModelKind::Nelson,
            omega1: 0.1f64.sqrt(),
            omega2: 2.0f64.sqrt(),
            lambda: 0.0,
            hbar,
        }
    }

    pub fn with_hbar(mut self, hbar: f64) -> Self {
        self.hbar = hbar;
        self
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega1 = omega;
        self.omega2 = omega;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactorKind {
    /// Husimi function of a coherent state.
    Gaussian,
    /// Husimi function of the first excited number state.
    Fock,
}

/// Initial density of one subsystem centred at `(q, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub kind: FactorKind,
    pub q: f64,
    pub p: f64,
}

impl Factor {
    pub const fn gaussian(q: f64, p: f64) -> Self {
        Self {
            kind: FactorKind::Gaussian,
            q,
            p,
        }
    }

    pub const fn fock() -> Self {
        Self {
            kind: FactorKind::Fock,
            q: 0.0,
            p: 0.0,
        }
    }
}

/// Product density `P(x, 0) = f1(q1, p1) f2(q2, p2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensitySpec {
    pub factors: [Factor; 2],
}

impl DensitySpec {
    pub const fn new(f1: Factor, f2: Factor) -> Self {
        Self { factors: [f1, f2] }
    }

    pub fn gaussian(center: PhasePoint) -> Self {
        Self::new(
            Factor::gaussian(center.q1, center.p1),
            Factor::gaussian(center.q2, center.p2),
        )
    }

    pub fn factor(&self, sub: Subsystem) -> &Factor {
        match sub {
            Subsystem::One => &self.factors[0],
            Subsystem::Two => &self.factors[1],
        }
    }

    pub fn is_gaussian(&self) -> bool {
        self.factors.iter().all(|f| f.kind == FactorKind::Gaussian)
    }

    pub fn center(&self) -> PhasePoint {
        let [a, b] = self.factors;
        PhasePoint::new(a.q, a.p, b.q, b.p)
    }
}

/// Uniform output times `0, dt, ..., t_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_max: f64,
    n_steps: usize,
    dt: f64,
}

impl TimeGrid {
    /// Builds the grid, nudging `dt` by a few ulps so that `dt * n_steps == t_max`.
    /// When no such `dt` exists the stored `t_max` becomes `dt * n_steps`, which moves it by about an ulp.
    pub fn new(t_max: f64, n_steps: usize) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::Config {
                field: "tmax",
                reason: format!("must be positive, got {t_max}"),
            });
        }
        if n_steps == 0 {
            return Err(Error::Config {
                field: "steps",
                reason: "must be at least 1".into(),
            });
        }
        let n = n_steps as f64;
        let mut dt = t_max / n;
        let (mut up, mut down) = (dt, dt);
        for _ in 0..8 {
            if dt * n == t_max {
                break;
            }
            up = up.next_up();
            down = down.next_down();
            if up * n == t_max {
                dt = up;
            } else if down * n == t_max {
                dt = down;
            }
        }
        Ok(Self {
            t_max: dt * n,
            n_steps,
            dt,
        })
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.t_max
        } else {
            k as f64 * self.dt
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }
}

/// Free-function form of [`TimeGrid::new`].
pub fn build_time_grid(t_max: f64, n_steps: usize) -> Result<TimeGrid> {
    TimeGrid::new(t_max, n_steps)
}

/// Subsystem entropies and the mutual information at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entropies {
    pub s1: f64,
    pub s2: f64,
    pub mutual: f64,
}

impl Entropies {
    /// `I = S1 + S2 - S1 S2` for a globally pure state.
    pub fn from_pair(s1: f64, s2: f64) -> Self {
        Self {
            s1,
            s2,
            mutual: s1 + s2 - s1 * s2,
        }
    }
}
