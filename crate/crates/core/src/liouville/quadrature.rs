//! Brute-force trapezoid quadrature of the transported density.
//!
//! Every node of a 4D grid is mapped back to `t = 0` once; the two marginals,
//! the total mass and `int P^2` all come from that single sweep.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::flows::{Lanes, TimeMap};
use crate::sum::Accumulator;
use crate::types::{Entropies, PhasePoint, Subsystem};

use super::density::{advance_cloud, factor_variance, DensityEvaluator};
use super::grid::{Axis, QuadratureGrid};

const LANES: usize = 8;

/// Marginal mass below this is reported as a deficit.
pub const MASS_DEFICIT: f64 = 1e-2;

/// Sampled marginal density of one subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalField {
    pub q_axis: Axis,
    pub p_axis: Axis,
    /// Row-major, `q` index slowest.
    pub values: Vec<f64>,
}

impl MarginalField {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.p_axis.n + j]
    }

    fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let mut acc = Accumulator::default();
        for i in 0..self.q_axis.n {
            for j in 0..self.p_axis.n {
                acc.add(self.q_axis.weight(i) * self.p_axis.weight(j) * f(self.value(i, j)));
            }
        }
        acc.value()
    }

    pub fn mass(&self) -> f64 {
        self.integrate(|v| v)
    }

    /// `int P_k^2 dq dp`.
    pub fn square_integral(&self) -> f64 {
        self.integrate(|v| v * v)
    }

    pub fn mass_deficit(&self) -> bool {
        self.mass() < 1.0 - MASS_DEFICIT
    }
}

/// Everything one sweep over a grid produces.
#[derive(Debug, Clone, PartialEq)]
pub struct GridIntegrals {
    pub grid: QuadratureGrid,
    pub marginal1: MarginalField,
    pub marginal2: MarginalField,
    pub mass: f64,
    /// `int P^2 dx`.
    pub square: f64,
}

impl GridIntegrals {
    pub fn marginal(&self, sub: Subsystem) -> &MarginalField {
        match sub {
            Subsystem::One => &self.marginal1,
            Subsystem::Two => &self.marginal2,
        }
    }
}

struct Row {
    m1: Vec<f64>,
    m2: Vec<f64>,
    mass: f64,
    square: f64,
}

/// One sweep of the grid at time `t`.
pub fn integrate(ev: &DensityEvaluator, t: f64, grid: &QuadratureGrid) -> Result<GridIntegrals> {
    let back = ev.backward(t);
    integrate_with(ev, &back, grid)
}

fn integrate_with(
    ev: &DensityEvaluator,
    back: &TimeMap,
    grid: &QuadratureGrid,
) -> Result<GridIntegrals> {
    let [a0, a1, a2, a3] = grid.axes;
    let (x0, x1, x2, x3) = (a0.nodes(), a1.nodes(), a2.nodes(), a3.nodes());
    let (w0, w1, w2, w3) = (a0.weights(), a1.weights(), a2.weights(), a3.weights());
    let rows: Vec<Row> = (0..a0.n)
        .into_par_iter()
        .map(|i| {
            let mut m1 = vec![0.0; a1.n];
            let mut m2 = vec![0.0; a2.n * a3.n];
            let (mut mass, mut square) = (Accumulator::default(), Accumulator::default());
            let cells = a2.n * a3.n;
            for j in 0..a1.n {
                let w01 = w0[i] * w1[j];
                let mut inner = 0.0;
                let mut inner_sq = 0.0;
                for start in (0..cells).step_by(LANES) {
                    let used = LANES.min(cells - start);
                    let mut x: Lanes<LANES> =
                        [[x0[i]; LANES], [x1[j]; LANES], [0.0; LANES], [0.0; LANES]];
                    #[allow(clippy::needless_range_loop)]
                    for c in 0..LANES {
                        // pad a short final batch with its last node
                        let m = start + c.min(used - 1);
                        x[2][c] = x2[m / a3.n];
                        x[3][c] = x3[m % a3.n];
                    }
                    let dens = ev.eval_lanes(back, &mut x);
                    for (c, &p) in dens.iter().enumerate().take(used) {
                        let m = start + c;
                        let w23 = w2[m / a3.n] * w3[m % a3.n];
                        inner += w23 * p;
                        inner_sq += w23 * p * p;
                        m2[m] += w01 * p;
                    }
                }
                m1[j] = inner;
                mass.add(w01 * inner);
                square.add(w01 * inner_sq);
            }
            Row {
                m1,
                m2,
                mass: mass.value(),
                square: square.value(),
            }
        })
        .collect();

    // fixed-order reduction keeps results independent of the thread count
    let mut m1 = Vec::with_capacity(a0.n * a1.n);
    let mut m2 = vec![0.0; a2.n * a3.n];
    let (mut mass, mut square) = (Accumulator::default(), Accumulator::default());
    for row in rows {
        m1.extend_from_slice(&row.m1);
        for (acc, v) in m2.iter_mut().zip(&row.m2) {
            *acc += v;
        }
        mass.add(row.mass);
        square.add(row.square);
    }
    Ok(GridIntegrals {
        grid: *grid,
        marginal1: MarginalField {
            q_axis: a0,
            p_axis: a1,
            values: m1,
        },
        marginal2: MarginalField {
            q_axis: a2,
            p_axis: a3,
            values: m2,
        },
        mass: mass.value(),
        square: square.value(),
    })
}

/// `P_k(q, p, t)` on the matching plane of `grid`.
pub fn marginal(
    ev: &DensityEvaluator,
    sub: Subsystem,
    t: f64,
    grid: &QuadratureGrid,
) -> Result<MarginalField> {
    Ok(integrate(ev, t, grid)?.marginal(sub).clone())
}

/// `S_k^cl(t) = 1 - int P_k^2(t) / int P_k^2(0)`, both on `grid`.
pub fn csle(ev: &DensityEvaluator, sub: Subsystem, t: f64, grid: &QuadratureGrid) -> Result<f64> {
    let now = integrate(ev, t, grid)?.marginal(sub).square_integral();
    let start = integrate(ev, 0.0, grid)?.marginal(sub).square_integral();
    Ok(1.0 - now / start)
}

/// Classical mutual information evaluated two ways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cslmi {
    /// `S1 + S2 - S1 S2`.
    pub value: f64,
    /// `1 - int P1^2 int P2^2 / int P^2(0)`.
    pub direct: f64,
}

pub fn cslmi(ev: &DensityEvaluator, t: f64, grid: &QuadratureGrid) -> Result<Cslmi> {
    let base = integrate(ev, 0.0, grid)?;
    let now = integrate(ev, t, grid)?;
    let p = entropies_from(&base, &now);
    Ok(Cslmi {
        value: p.0.mutual,
        direct: p.1,
    })
}

/// `int P^2(x, t) dx`, conserved by the Liouville flow.
pub fn purity_integral(ev: &DensityEvaluator, t: f64, grid: &QuadratureGrid) -> Result<f64> {
    Ok(integrate(ev, t, grid)?.square)
}

fn entropies_from(base: &GridIntegrals, now: &GridIntegrals) -> (Entropies, f64) {
    let (b1, b2) = (
        base.marginal1.square_integral(),
        base.marginal2.square_integral(),
    );
    let (n1, n2) = (
        now.marginal1.square_integral(),
        now.marginal2.square_integral(),
    );
    let e = Entropies::from_pair(1.0 - n1 / b1, 1.0 - n2 / b2);
    (e, 1.0 - n1 * n2 / base.square)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    /// Nodes per axis.
    pub n: usize,
    /// Box half-width in spreads of the transported density.
    pub span: f64,
    /// Trajectories used to locate the density when the flow is not linear.
    pub pilot_samples: usize,
    pub seed: u64,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            n: 64,
            span: 6.0,
            pilot_samples: 4096,
            seed: 0,
        }
    }
}

/// Classical entropies at one time of a series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalPoint {
    pub t: f64,
    pub entropies: Entropies,
    /// Same information from the direct form.
    pub i_direct: f64,
    /// `int P^2(t) / int P^2(0)`.
    pub purity_ratio: f64,
    pub mass: f64,
    pub grid: QuadratureGrid,
}

/// Location and spread of the transported density along each axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxStats {
    pub center: [f64; 4],
    pub spread: [f64; 4],
}

impl BoxStats {
    pub fn grid(&self, hbar: f64, settings: &QuadratureSettings) -> QuadratureGrid {
        let floor = hbar.sqrt();
        let half = std::array::from_fn(|k| settings.span * self.spread[k].max(floor));
        QuadratureGrid::centered(self.center, half, settings.n)
    }
}

/// Boxes for each requested time: exact moments for linear flows,
/// robust quantiles of a forward-propagated pilot cloud otherwise.
pub fn box_stats(
    ev: &DensityEvaluator,
    times: &[f64],
    settings: &QuadratureSettings,
) -> Result<Vec<BoxStats>> {
    let hbar = ev.hbar();
    let c0 = ev.density.center().to_vector();
    let var0 = [
        factor_variance(&ev.density.factors[0], hbar),
        factor_variance(&ev.density.factors[0], hbar),
        factor_variance(&ev.density.factors[1], hbar),
        factor_variance(&ev.density.factors[1], hbar),
    ];
    if ev.plan.linear_map(0.0).is_some() {
        return Ok(times
            .iter()
            .map(|&t| {
                let m = ev.plan.linear_map(t).expect("linear plan");
                let c = m * c0;
                BoxStats {
                    center: std::array::from_fn(|i| c[i]),
                    spread: std::array::from_fn(|i| {
                        (0..4)
                            .map(|j| m[(i, j)].powi(2) * var0[j])
                            .sum::<f64>()
                            .sqrt()
                    }),
                }
            })
            .collect());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed ^ 0x5eed_b0c5);
    let mut cloud: Vec<Option<PhasePoint>> = (0..settings.pilot_samples)
        .map(|_| Some(ev.sample_initial(&mut rng)))
        .collect();
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let step = t - now;
        if step != 0.0 {
            advance_cloud(&ev.plan, &mut cloud, step);
            now = t;
        }
        let alive: Vec<PhasePoint> = cloud.iter().flatten().copied().collect();
        if alive.len() < 16 {
            let c = ev.density.center().to_array();
            out.push(BoxStats {
                center: c,
                spread: std::array::from_fn(|i| var0[i].sqrt()),
            });
            continue;
        }
        let mut center = [0.0; 4];
        let mut spread = [0.0; 4];
        for k in 0..4 {
            let mut v: Vec<f64> = alive.iter().map(|p| p.to_array()[k]).collect();
            v.sort_by(f64::total_cmp);
            let q = |f: f64| v[((v.len() - 1) as f64 * f).round() as usize];
            center[k] = q(0.5);
            spread[k] = 0.5 * (q(0.841_344_746) - q(0.158_655_254));
        }
        out.push(BoxStats { center, spread });
    }
    Ok(out)
}

/// Classical entropies on per-time grids; the normalisation uses the `t = 0` grid.
pub fn classical_series(
    ev: &DensityEvaluator,
    times: &[f64],
    settings: &QuadratureSettings,
) -> Result<Vec<ClassicalPoint>> {
    let hbar = ev.hbar();
    let boxes = box_stats(ev, times, settings)?;
    let base_grid = box_stats(ev, &[0.0], settings)?[0].grid(hbar, settings);
    let base = integrate(ev, 0.0, &base_grid)?;
    let mut out = Vec::with_capacity(times.len());
    for (&t, stats) in times.iter().zip(&boxes) {
        let grid = stats.grid(hbar, settings);
        let now = if t == 0.0 {
            base.clone()
        } else {
            integrate(ev, t, &grid)?
        };
        let (entropies, i_direct) = entropies_from(&base, &now);
        out.push(ClassicalPoint {
            t,
            entropies,
            i_direct,
            purity_ratio: now.square / base.square,
            mass: now.mass,
            grid: now.grid,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::FlowPlan;
    use crate::types::{DensitySpec, Factor, ModelKind, ModelSpec};
    use std::f64::consts::PI;

    fn evaluator(
        kind: ModelKind,
        lambda: f64,
        hbar: f64,
        density: DensitySpec,
    ) -> DensityEvaluator {
        let model = ModelSpec::new(kind, lambda).with_hbar(hbar);
        DensityEvaluator::new(density, FlowPlan::new(model).unwrap())
    }

    #[test]
    fn gaussian_purity_integral() {
        let hbar = 0.05;
        let ev = evaluator(
            ModelKind::Bilinear,
            0.0,
            hbar,
            DensitySpec::gaussian(PhasePoint::ORIGIN),
        );
        let grid = QuadratureGrid::initial(&ev.density, hbar, 6.0, 32);
        let sq = purity_integral(&ev, 0.0, &grid).unwrap();
        let exact = 1.0 / (16.0 * PI * PI * hbar * hbar);
        assert!((exact - 2.533_029_591).abs() < 1e-8);
        assert!((sq - exact).abs() / exact < 1e-9);
    }

    #[test]
    fn marginal_at_zero_is_the_factor() {
        let hbar = 0.3;
        let d = DensitySpec::new(Factor::gaussian(0.2, -0.1), Factor::fock());
        let ev = evaluator(ModelKind::Rwa, 1.0, hbar, d);
        let grid = QuadratureGrid::initial(&d, hbar, 8.0, 40);
        let g = integrate(&ev, 0.0, &grid).unwrap();
        for (sub, f) in [
            (Subsystem::One, d.factors[0]),
            (Subsystem::Two, d.factors[1]),
        ] {
            let m = g.marginal(sub);
            for i in (0..40).step_by(7) {
                for j in (0..40).step_by(5) {
                    let exact = super::super::density::factor_density(
                        &f,
                        hbar,
                        m.q_axis.node(i),
                        m.p_axis.node(j),
                    );
                    assert!((m.value(i, j) - exact).abs() < 1e-8);
                }
            }
            assert!((m.mass() - 1.0).abs() < 1e-6);
            assert!(!m.mass_deficit());
        }
    }

    #[test]
    fn csle_zero_at_start_and_uncoupled() {
        let hbar = 0.5;
        let ev = evaluator(
            ModelKind::Bilinear,
            0.0,
            hbar,
            DensitySpec::gaussian(PhasePoint::new(0.5, 0.0, 0.0, 0.3)),
        );
        let grid = QuadratureGrid::centered([0.0; 4], [4.5; 4], 28);
        assert_eq!(csle(&ev, Subsystem::One, 0.0, &grid).unwrap(), 0.0);
        assert!(csle(&ev, Subsystem::Two, 1.3, &grid).unwrap().abs() < 1e-6);
    }

    #[test]
    fn rwa_fock_fock_matches_u() {
        let ev = evaluator(
            ModelKind::Rwa,
            1.0,
            1.0,
            DensitySpec::new(Factor::fock(), Factor::fock()),
        );
        let settings = QuadratureSettings {
            n: 40,
            ..Default::default()
        };
        let pts = classical_series(&ev, &[0.0, PI / 8.0, PI / 4.0], &settings).unwrap();
        assert_eq!(pts[0].entropies.mutual, 0.0);
        assert!((pts[1].entropies.s1 - 5.0 / 64.0).abs() < 1e-6);
        assert!((pts[2].entropies.mutual - 31.0 / 256.0).abs() < 1e-6);
        assert!((pts[2].i_direct - 31.0 / 256.0).abs() < 1e-6);
        assert!((pts[2].purity_ratio - 1.0).abs() < 1e-6);
    }
}
