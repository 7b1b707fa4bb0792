//! Histogram estimates of the marginal purities from forward-propagated samples.
//!
//! `int P_k^2` is estimated by the unbiased collision count
//! `sum c (c - 1) / (N (N - 1) A)` over bins of area `A`, where `N` counts every
//! sample including ones that left the box or escaped. Errors come from a
//! delete-one-group jackknife.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::types::{Entropies, PhasePoint, Subsystem};

use super::density::{advance_cloud, DensityEvaluator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSettings {
    pub samples: usize,
    /// Bins per axis of each marginal histogram.
    pub bins: usize,
    pub seed: u64,
    /// Histogram half-width in robust spreads of the cloud.
    pub span: f64,
    /// Jackknife groups.
    pub groups: usize,
}

impl McSettings {
    pub fn new(samples: usize, bins: usize, seed: u64) -> Self {
        Self {
            samples,
            bins,
            seed,
            span: 6.0,
            groups: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub t: f64,
    pub entropies: Entropies,
    /// Jackknife standard error of the mutual information.
    pub stderr: f64,
    /// Fraction of samples whose trajectories escaped.
    pub escaped: f64,
}

impl McEstimate {
    pub fn insufficient(&self, tolerance: f64) -> bool {
        self.stderr > tolerance
    }
}

/// Grouped bin counts for one subsystem.
struct Histogram {
    bins: usize,
    area: f64,
    /// `counts[g * bins^2 + b]`
    counts: Vec<u32>,
}

impl Histogram {
    fn build(
        points: &[Option<PhasePoint>],
        sub: Subsystem,
        settings: &McSettings,
        hbar: f64,
    ) -> Self {
        let plane: Vec<(f64, f64)> = points.iter().flatten().map(|p| p.plane(sub)).collect();
        let bins = settings.bins;
        let groups = settings.groups;
        let mut counts = vec![0u32; groups * bins * bins];
        let (lo, width) = plane_box(&plane, settings.span, hbar);
        let n = points.len();
        for (i, p) in points.iter().enumerate() {
            let Some(p) = p else { continue };
            let (q, pp) = p.plane(sub);
            let bq = ((q - lo.0) / width.0 * bins as f64).floor();
            let bp = ((pp - lo.1) / width.1 * bins as f64).floor();
            if bq >= 0.0 && bq < bins as f64 && bp >= 0.0 && bp < bins as f64 {
                let g = i * groups / n;
                counts[g * bins * bins + bq as usize * bins + bp as usize] += 1;
            }
        }
        Self {
            bins,
            area: width.0 * width.1 / (bins * bins) as f64,
            counts,
        }
    }

    /// `int P^2` leaving out group `skip`, with `n` the sample count used.
    fn collision(&self, skip: Option<usize>, n: f64) -> f64 {
        let cells = self.bins * self.bins;
        let groups = self.counts.len() / cells;
        let mut total = 0.0;
        for b in 0..cells {
            let mut c = 0u64;
            for g in 0..groups {
                if Some(g) != skip {
                    c += self.counts[g * cells + b] as u64;
                }
            }
            total += (c * c.saturating_sub(1)) as f64;
        }
        total / (n * (n - 1.0) * self.area)
    }
}

fn plane_box(plane: &[(f64, f64)], span: f64, hbar: f64) -> ((f64, f64), (f64, f64)) {
    let floor = hbar.sqrt();
    let axis = |f: fn(&(f64, f64)) -> f64| {
        if plane.len() < 16 {
            return (-span * floor, 2.0 * span * floor);
        }
        let mut v: Vec<f64> = plane.iter().map(f).collect();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| v[((v.len() - 1) as f64 * p).round() as usize];
        let half = span * (0.5 * (q(0.841_344_746) - q(0.158_655_254))).max(floor);
        (q(0.5) - half, 2.0 * half)
    };
    let (lq, wq) = axis(|p| p.0);
    let (lp, wp) = axis(|p| p.1);
    ((lq, lp), (wq, wp))
}

/// Group sizes for `n` samples split as in [`Histogram::build`].
fn group_sizes(n: usize, groups: usize) -> Vec<f64> {
    let mut sizes = vec![0.0; groups];
    for i in 0..n {
        sizes[i * groups / n] += 1.0;
    }
    sizes
}

/// Monte Carlo classical entropies at each of `times`.
pub fn mc_series(
    ev: &DensityEvaluator,
    times: &[f64],
    settings: &McSettings,
) -> Result<Vec<McEstimate>> {
    if settings.samples < 2 * settings.groups.max(1) || settings.bins == 0 || settings.groups < 2 {
        return Err(Error::Config {
            field: "mc_samples",
            reason: format!("need at least {} samples", 2 * settings.groups.max(2)),
        });
    }
    let hbar = ev.hbar();
    let n = settings.samples as f64;
    let sizes = group_sizes(settings.samples, settings.groups);
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut cloud: Vec<Option<PhasePoint>> = (0..settings.samples)
        .map(|_| Some(ev.sample_initial(&mut rng)))
        .collect();

    let collisions = |cloud: &[Option<PhasePoint>]| -> Vec<[f64; 2]> {
        let h1 = Histogram::build(cloud, Subsystem::One, settings, hbar);
        let h2 = Histogram::build(cloud, Subsystem::Two, settings, hbar);
        // index 0 is the full estimate, 1 + g leaves out group g
        std::iter::once([h1.collision(None, n), h2.collision(None, n)])
            .chain((0..settings.groups).map(|g| {
                let m = n - sizes[g];
                [h1.collision(Some(g), m), h2.collision(Some(g), m)]
            }))
            .collect()
    };

    let base = collisions(&cloud);
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let step = t - now;
        if step != 0.0 {
            advance_cloud(&ev.plan, &mut cloud, step);
            now = t;
        }
        let cur = if t == 0.0 {
            base.clone()
        } else {
            collisions(&cloud)
        };
        let info = |k: usize| {
            Entropies::from_pair(1.0 - cur[k][0] / base[k][0], 1.0 - cur[k][1] / base[k][1])
        };
        let full = info(0);
        let leave: Vec<f64> = (1..=settings.groups).map(|k| info(k).mutual).collect();
        let g = settings.groups as f64;
        let mean = leave.iter().sum::<f64>() / g;
        let var = (g - 1.0) / g * leave.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
        let escaped = cloud.iter().filter(|x| x.is_none()).count() as f64 / n;
        out.push(McEstimate {
            t,
            entropies: full,
            stderr: var.sqrt(),
            escaped,
        });
    }
    Ok(out)
}

/// Single-time form of [`mc_series`].
pub fn mc_entropies(
    ev: &DensityEvaluator,
    t: f64,
    n_samples: usize,
    bins: usize,
    seed: u64,
) -> Result<McEstimate> {
    let s = McSettings::new(n_samples, bins, seed);
    Ok(*mc_series(ev, &[t], &s)?.last().expect("one time requested"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::FlowPlan;
    use crate::types::{DensitySpec, Factor, ModelKind, ModelSpec};
    use std::f64::consts::PI;

    #[test]
    fn rwa_fock_fock_quarter_period() {
        let plan = FlowPlan::new(ModelSpec::new(ModelKind::Rwa, 1.0)).unwrap();
        let ev = DensityEvaluator::new(DensitySpec::new(Factor::fock(), Factor::fock()), plan);
        let est = mc_series(&ev, &[0.0, PI / 4.0], &McSettings::new(400_000, 64, 11)).unwrap();
        assert_eq!(est[0].entropies.mutual, 0.0);
        let e = est[1];
        assert!(
            (e.entropies.mutual - 31.0 / 256.0).abs() < 2.0 * e.stderr.max(5e-3),
            "{e:?}"
        );
        assert!(e.stderr > 0.0 && e.stderr < 0.01);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let plan = FlowPlan::new(ModelSpec::new(ModelKind::Bilinear, 0.5)).unwrap();
        let ev = DensityEvaluator::new(DensitySpec::gaussian(PhasePoint::ORIGIN), plan);
        let a = mc_entropies(&ev, 1.0, 5000, 16, 4).unwrap();
        let b = mc_entropies(&ev, 1.0, 5000, 16, 4).unwrap();
        assert_eq!(a, b);
    }
}
