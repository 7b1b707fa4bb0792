use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::flows::{FlowPlan, Lanes, TimeMap};
use crate::types::{DensitySpec, Factor, FactorKind, PhasePoint};

/// Husimi density of one factor at `(q, p)`; each integrates to 1 over its plane.
#[inline]
pub fn factor_density(f: &Factor, hbar: f64, q: f64, p: f64) -> f64 {
    let r2 = ((q - f.q).powi(2) + (p - f.p).powi(2)) / (2.0 * hbar);
    let g = (-r2).exp() / (2.0 * PI * hbar);
    match f.kind {
        FactorKind::Gaussian => g,
        FactorKind::Fock => r2 * g,
    }
}

/// `P(x, 0)` as the product of the two factors.
#[inline]
pub fn initial_density(spec: &DensitySpec, hbar: f64, x: PhasePoint) -> f64 {
    let [a, b] = &spec.factors;
    if a.kind == FactorKind::Gaussian && b.kind == FactorKind::Gaussian {
        // one exponential instead of two on the hot path
        let r2 = (x.q1 - a.q).powi(2)
            + (x.p1 - a.p).powi(2)
            + (x.q2 - b.q).powi(2)
            + (x.p2 - b.p).powi(2);
        return (-r2 / (2.0 * hbar)).exp() / (4.0 * PI * PI * hbar * hbar);
    }
    factor_density(a, hbar, x.q1, x.p1) * factor_density(b, hbar, x.q2, x.p2)
}

/// Draws `(q, p)` from one factor.
pub fn sample_factor<R: Rng + ?Sized>(f: &Factor, hbar: f64, rng: &mut R) -> (f64, f64) {
    match f.kind {
        FactorKind::Gaussian => {
            let s = hbar.sqrt();
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            (f.q + s * a, f.p + s * b)
        }
        FactorKind::Fock => {
            // r^2 / (2 hbar) is Gamma(2, 1) distributed, the angle is uniform
            let s: f64 = Gamma::new(2.0, 1.0).expect("valid shape").sample(rng);
            let r = (2.0 * hbar * s).sqrt();
            let phi = 2.0 * PI * rng.gen::<f64>();
            (f.q + r * phi.cos(), f.p + r * phi.sin())
        }
    }
}

/// Per-axis variance of a factor.
pub fn factor_variance(f: &Factor, hbar: f64) -> f64 {
    match f.kind {
        FactorKind::Gaussian => hbar,
        FactorKind::Fock => 2.0 * hbar,
    }
}

/// Moves every live sample forward by `step`; escaped samples become `None`.
pub fn advance_cloud(plan: &FlowPlan, cloud: &mut [Option<PhasePoint>], step: f64) {
    const LANES: usize = 8;
    let map = plan.at(step);
    cloud.par_chunks_mut(LANES).for_each(|chunk| {
        let mut x: Lanes<LANES> = [[0.0; LANES]; 4];
        for (i, p) in chunk.iter().enumerate() {
            for (c, v) in p
                .unwrap_or(PhasePoint::ORIGIN)
                .to_array()
                .into_iter()
                .enumerate()
            {
                x[c][i] = v;
            }
        }
        let alive = map.apply_lanes(&mut x);
        for (i, p) in chunk.iter_mut().enumerate() {
            if p.is_some() {
                *p = alive[i].then(|| PhasePoint::new(x[0][i], x[1][i], x[2][i], x[3][i]));
            }
        }
    });
}

/// `P(x, t) = P(phi_t^{-1}(x), 0)`.
#[derive(Debug, Clone, Copy)]
pub struct DensityEvaluator {
    pub density: DensitySpec,
    pub plan: FlowPlan,
}

impl DensityEvaluator {
    pub fn new(density: DensitySpec, plan: FlowPlan) -> Self {
        Self { density, plan }
    }

    pub fn hbar(&self) -> f64 {
        self.plan.model.hbar
    }

    pub fn initial(&self, x: PhasePoint) -> f64 {
        initial_density(&self.density, self.hbar(), x)
    }

    /// Density at time `t`. A pre-image that runs away contributes zero.
    pub fn density_at(&self, x: PhasePoint, t: f64) -> Result<f64> {
        self.eval_with(&self.backward(t), x)
    }

    /// The map `x(t) -> x(0)`.
    pub fn backward(&self, t: f64) -> TimeMap {
        self.plan.at(-t)
    }

    #[inline]
    pub fn eval_with(&self, back: &TimeMap, x: PhasePoint) -> Result<f64> {
        match back.apply(x) {
            Ok(x0) => Ok(self.initial(x0)),
            Err(Error::Escaped { .. }) => Ok(0.0),
            Err(e) => Err(e),
        }
    }

    /// [`DensityEvaluator::eval_with`] for a batch; `x` is overwritten with the pre-images.
    #[inline]
    pub fn eval_lanes<const L: usize>(&self, back: &TimeMap, x: &mut Lanes<L>) -> [f64; L] {
        let alive = back.apply_lanes(x);
        let mut out = [0.0; L];
        for i in 0..L {
            if alive[i] {
                out[i] = self.initial(PhasePoint::new(x[0][i], x[1][i], x[2][i], x[3][i]));
            }
        }
        out
    }

    pub fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R) -> PhasePoint {
        let h = self.hbar();
        let (q1, p1) = sample_factor(&self.density.factors[0], h, rng);
        let (q2, p2) = sample_factor(&self.density.factors[1], h, rng);
        PhasePoint::new(q1, p1, q2, p2)
    }
}
