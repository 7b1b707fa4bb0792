//! Surfaces of section `q1 = 0, p1 > 0` at fixed energy.

use crate::error::{Error, Result};
use crate::flows::{energy, rk4_step, vector_field};
use crate::series::format_value;
use crate::types::{ModelSpec, PhasePoint};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One upward crossing of `q1 = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionPoint {
    /// Residual of the refined crossing, below `1e-10` in magnitude.
    pub q1: f64,
    pub p1: f64,
    pub q2: f64,
    pub p2: f64,
    pub seed_index: usize,
    pub crossing_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionSettings {
    pub energy: f64,
    pub crossings: usize,
    pub rk4_dt: f64,
    /// A seed is abandoned once any coordinate exceeds this.
    pub bound: f64,
    /// A seed is abandoned if it runs this long without completing its crossings.
    pub max_time: f64,
}

impl SectionSettings {
    pub fn new(energy: f64, crossings: usize, rk4_dt: f64) -> Self {
        Self {
            energy,
            crossings,
            rk4_dt,
            bound: 5.0,
            max_time: 1e5,
        }
    }
}

/// Outcome for a single seed.
#[derive(Debug)]
pub struct SeedRun {
    pub seed_index: usize,
    pub start: (f64, f64),
    pub result: Result<Vec<SectionPoint>>,
}

/// Full phase point on the section with `p1 > 0` fixed by the energy.
pub fn seed_point(model: &ModelSpec, e: f64, q2: f64, p2: f64) -> Result<PhasePoint> {
    let partial = energy(model, PhasePoint::new(0.0, 0.0, q2, p2));
    let p1_sq = 2.0 * (e - partial);
    if p1_sq.is_nan() || p1_sq < 0.0 {
        return Err(Error::OffShell { q2, p2, energy: e });
    }
    Ok(PhasePoint::new(0.0, p1_sq.sqrt(), q2, p2))
}

/// Default seeds: half along `p2 = 0`, half along `q2 = 0`, strictly inside the shell.
pub fn default_seeds(model: &ModelSpec, e: f64, count: usize) -> Vec<(f64, f64)> {
    let along_q = count.div_ceil(2);
    let along_p = count - along_q;
    let q_max = (2.0 * e).sqrt() / model.omega2;
    let p_max = (2.0 * e).sqrt();
    let spread = |n: usize, max: f64| -> Vec<f64> {
        (0..n)
            .map(|i| max * 0.95 * (2.0 * (i as f64 + 0.5) / n as f64 - 1.0))
            .collect()
    };
    let mut seeds: Vec<(f64, f64)> = spread(along_q, q_max)
        .into_iter()
        .map(|q| (q, 0.0))
        .collect();
    seeds.extend(spread(along_p, p_max).into_iter().map(|p| (0.0, p)));
    seeds
}

/// Sections for every seed; a failing seed does not stop the others.
pub fn poincare_section(
    model: &ModelSpec,
    e: f64,
    seeds: &[(f64, f64)],
    crossings_per_seed: usize,
    rk4_dt: f64,
) -> Vec<SeedRun> {
    let settings = SectionSettings::new(e, crossings_per_seed, rk4_dt);
    run_seeds(model, seeds, &settings)
}

pub fn run_seeds(
    model: &ModelSpec,
    seeds: &[(f64, f64)],
    settings: &SectionSettings,
) -> Vec<SeedRun> {
    use rayon::prelude::*;
    seeds
        .par_iter()
        .enumerate()
        .map(|(i, &(q2, p2))| SeedRun {
            seed_index: i,
            start: (q2, p2),
            result: section_for_seed(model, q2, p2, i, settings),
        })
        .collect()
}

pub fn section_for_seed(
    model: &ModelSpec,
    q2: f64,
    p2: f64,
    seed_index: usize,
    s: &SectionSettings,
) -> Result<Vec<SectionPoint>> {
    let mut x = seed_point(model, s.energy, q2, p2)?.to_array();
    let h = s.rk4_dt;
    let mut points = Vec::with_capacity(s.crossings);
    let mut t = 0.0;
    while points.len() < s.crossings {
        if t > s.max_time {
            return Err(Error::Convergence(format!(
                "seed {seed_index} produced {} of {} crossings by t = {t}",
                points.len(),
                s.crossings
            )));
        }
        let next = rk4_step(model, x, h);
        t += h;
        if !next.iter().all(|v| v.is_finite() && v.abs() <= s.bound) {
            return Err(Error::Escaped { t });
        }
        if x[0] < 0.0 && next[0] >= 0.0 {
            let c = refine_crossing(model, x, next, h);
            if c[1] > 0.0 {
                if c[0].abs() >= 1e-10 {
                    return Err(Error::Convergence(format!(
                        "crossing refinement stalled at q1 = {:e}",
                        c[0]
                    )));
                }
                let drift = (energy(model, PhasePoint::from_array(c)) - s.energy).abs();
                if drift > 1e-8 {
                    return Err(Error::Convergence(format!(
                        "section point off shell by {drift:e}"
                    )));
                }
                points.push(SectionPoint {
                    q1: c[0],
                    p1: c[1],
                    q2: c[2],
                    p2: c[3],
                    seed_index,
                    crossing_index: points.len(),
                });
            }
        }
        x = next;
    }
    Ok(points)
}

/// Locates `q1 = 0` between two RK4 states: bisection on the cubic Hermite
/// interpolant, then a few Newton corrections using exact RK4 sub-steps.
fn refine_crossing(model: &ModelSpec, a: [f64; 4], b: [f64; 4], h: f64) -> [f64; 4] {
    let (fa, fb) = (vector_field(model, a)[0], vector_field(model, b)[0]);
    let hermite = |s: f64| {
        let (s2, s3) = (s * s, s * s * s);
        (2.0 * s3 - 3.0 * s2 + 1.0) * a[0]
            + (s3 - 2.0 * s2 + s) * h * fa
            + (-2.0 * s3 + 3.0 * s2) * b[0]
            + (s3 - s2) * h * fb
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if hermite(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut tau = 0.5 * (lo + hi) * h;
    let mut x = rk4_step(model, a, tau);
    for _ in 0..4 {
        let v = vector_field(model, x)[0];
        if x[0] == 0.0 || v == 0.0 {
            break;
        }
        tau -= x[0] / v;
        x = rk4_step(model, a, tau);
    }
    x
}

/// Mean nearest-neighbour distance of a planar point set (`O(n^2)`).
/// CSV with header `q2,p2,seed_index,crossing_index`; failed seeds contribute no rows.
pub fn section_csv(runs: &[SeedRun]) -> String {
    let mut out = String::from("q2,p2,seed_index,crossing_index\n");
    for p in runs.iter().filter_map(|r| r.result.as_ref().ok()).flatten() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            format_value(Some(p.q2)),
            format_value(Some(p.p2)),
            p.seed_index,
            p.crossing_index
        ));
    }
    out
}

pub fn mean_nn_distance(points: &[(f64, f64)]) -> f64 {
    let n = points.len();
    let mut total = 0.0;
    for (i, a) in points.iter().enumerate() {
        let mut best = f64::INFINITY;
        for (j, b) in points.iter().enumerate() {
            if i != j {
                best = best.min((a.0 - b.0).hypot(a.1 - b.1));
            }
        }
        total += best;
    }
    total / n as f64
}

/// Scaling exponent `g` of the mean nearest-neighbour distance, `d(N) ~ N^-g`,
/// fitted over random subsets of N/8, N/4 and N/2 of the crossings.
///
/// Points on an invariant curve give `g` near 1; points filling an area give
/// `g` near 1/2. Random subsets rather than prefixes keep slow or near-resonant
/// rotations from skewing the estimate. Returns `None` for fewer than 32 points
/// or coincident points.
pub fn dispersion_exponent(points: &[(f64, f64)]) -> Option<f64> {
    const DRAWS: usize = 16;
    let n = points.len();
    if n < 32 {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x6e6e);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for m in [n / 8, n / 4, n / 2] {
        let mut d = 0.0;
        for _ in 0..DRAWS {
            let subset: Vec<(f64, f64)> =
                sample(&mut rng, n, m).iter().map(|i| points[i]).collect();
            d += mean_nn_distance(&subset);
        }
        if d.is_nan() || d <= 0.0 {
            return None;
        }
        xs.push((m as f64).ln());
        ys.push((d / DRAWS as f64).ln());
    }
    let mx = xs.iter().sum::<f64>() / 3.0;
    let my = ys.iter().sum::<f64>() / 3.0;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Some(-sxy / sxx)
}

/// Classification threshold between curve-like and area-filling seeds.
pub const CHAOTIC_EXPONENT: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedClass {
    pub seed_index: usize,
    pub start: (f64, f64),
    pub exponent: f64,
    pub chaotic: bool,
}

pub fn classify(runs: &[SeedRun]) -> Vec<SeedClass> {
    runs.iter()
        .filter_map(|r| {
            let pts: Vec<(f64, f64)> = r
                .result
                .as_ref()
                .ok()?
                .iter()
                .map(|p| (p.q2, p.p2))
                .collect();
            let g = dispersion_exponent(&pts)?;
            Some(SeedClass {
                seed_index: r.seed_index,
                start: r.start,
                exponent: g,
                chaotic: g < CHAOTIC_EXPONENT,
            })
        })
        .collect()
}

/// Coherent-state centres: the most area-filling seed and the most curve-like one.
pub fn select_centers(
    model: &ModelSpec,
    e: f64,
    classes: &[SeedClass],
) -> Option<(PhasePoint, PhasePoint)> {
    let by = |f: fn(&SeedClass, &SeedClass) -> bool| {
        classes
            .iter()
            .copied()
            .reduce(|a, b| if f(&b, &a) { b } else { a })
    };
    let chaotic = by(|a, b| a.exponent < b.exponent)?;
    let regular = by(|a, b| a.exponent > b.exponent)?;
    if !chaotic.chaotic || regular.chaotic {
        return None;
    }
    let c = seed_point(model, e, chaotic.start.0, chaotic.start.1).ok()?;
    let r = seed_point(model, e, regular.start.0, regular.start.1).ok()?;
    Some((c, r))
}
