//! One run: classical entropies, the applicable quantum calculation and any
//! closed-form overlay, all on the same time grid.

use serde::Serialize;

use crate::analytic::{bilinear_icl_oracle, rwa_coh_fock, rwa_fock_fock, RwaParams};
use crate::config::{QuantumRoute, ValidatedConfig};
use crate::error::{Error, Result};
use crate::flows::FlowMethod;
use crate::fock::{fock_series, FockBasis, FockSettings};
use crate::gaussian::gaussian_series;
use crate::liouville::{
    classical_series, mc_series, DensityEvaluator, McSettings, QuadratureSettings,
};
use crate::series::{EntropyRecord, EntropySeries};
use crate::types::{FactorKind, ModelKind};

/// Checks and warnings collected during a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub quadrature: Option<QuadratureDiagnostics>,
    pub monte_carlo: Option<McDiagnostics>,
    pub quantum: Option<QuantumDiagnostics>,
    /// Energy error per unit time of the trajectory of the density centre.
    pub center_energy_drift: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureDiagnostics {
    pub nodes_per_axis: usize,
    /// Largest `|int P^2(t) / int P^2(0) - 1|`.
    pub max_purity_deviation: f64,
    /// Largest gap between the two forms of the classical mutual information.
    pub max_form_gap: f64,
    pub min_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McDiagnostics {
    pub samples: usize,
    pub bins: usize,
    pub max_stderr: f64,
    pub max_escaped_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantumDiagnostics {
    pub route: &'static str,
    pub n1_max: Option<usize>,
    pub n2_max: Option<usize>,
    pub escalated: bool,
    pub max_trunc_pop: Option<f64>,
    pub max_norm_drift: f64,
    pub max_energy_drift: f64,
    /// Largest `|S1 - S2|`.
    pub max_subsystem_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    pub series: EntropySeries,
    pub diagnostics: Diagnostics,
}

/// Runs everything the configuration asks for.
pub fn simulate(cfg: &ValidatedConfig) -> Result<SimulationOutput> {
    let times = cfg.grid.times();
    let raw = &cfg.raw;
    let mut diag = Diagnostics::default();
    let mut series = EntropySeries {
        records: times.iter().map(|&t| EntropyRecord::at(t)).collect(),
        ..Default::default()
    };
    let ev = DensityEvaluator::new(cfg.density, cfg.plan);

    if cfg.plan.method == FlowMethod::Rk4 {
        diag.center_energy_drift = cfg
            .plan
            .energy_drift(cfg.density.center(), cfg.grid.t_max())
            .ok();
    }

    // the quantum part runs first so truncation problems surface before the long classical sweeps
    let route = match raw.quantum {
        QuantumRoute::Auto if cfg.model.kind.is_quadratic() && cfg.density.is_gaussian() => {
            QuantumRoute::Gaussian
        }
        QuantumRoute::Auto => QuantumRoute::Fock,
        r => r,
    };
    match route {
        QuantumRoute::Gaussian => {
            let ent = gaussian_series(&cfg.model, cfg.density.center(), &times)?;
            let mut gap = 0.0f64;
            for (rec, e) in series.records.iter_mut().zip(&ent) {
                rec.s1_q = Some(e.s1);
                rec.s2_q = Some(e.s2);
                rec.i_q = Some(e.mutual);
                gap = gap.max((e.s1 - e.s2).abs());
            }
            series.columns.quantum = true;
            diag.quantum = Some(QuantumDiagnostics {
                route: "gaussian",
                n1_max: None,
                n2_max: None,
                escalated: false,
                max_trunc_pop: None,
                max_norm_drift: 0.0,
                max_energy_drift: 0.0,
                max_subsystem_gap: gap,
            });
        }
        QuantumRoute::Fock => {
            let (pts, basis, escalated) = converged_fock(cfg, &times)?;
            let e0 = pts[0].energy;
            let mut d = QuantumDiagnostics {
                route: "fock",
                n1_max: Some(basis.n1_max),
                n2_max: Some(basis.n2_max),
                escalated,
                max_trunc_pop: Some(0.0),
                max_norm_drift: 0.0,
                max_energy_drift: 0.0,
                max_subsystem_gap: 0.0,
            };
            for (rec, p) in series.records.iter_mut().zip(&pts) {
                rec.s1_q = Some(p.entropies.s1);
                rec.s2_q = Some(p.entropies.s2);
                rec.i_q = Some(p.entropies.mutual);
                rec.trunc_pop = Some(p.trunc_pop);
                d.max_trunc_pop = d.max_trunc_pop.map(|m| m.max(p.trunc_pop));
                d.max_norm_drift = d.max_norm_drift.max((p.norm - 1.0).abs());
                d.max_energy_drift = d.max_energy_drift.max((p.energy - e0).abs());
                d.max_subsystem_gap = d
                    .max_subsystem_gap
                    .max((p.entropies.s1 - p.entropies.s2).abs());
            }
            if d.max_norm_drift > 1e-8 {
                diag.warnings
                    .push(format!("norm drifted by {:.3e}", d.max_norm_drift));
            }
            series.columns.quantum = true;
            series.columns.trunc_pop = true;
            diag.quantum = Some(d);
        }
        QuantumRoute::None | QuantumRoute::Auto => {}
    }

    if raw.grid_n > 0 {
        let settings = QuadratureSettings {
            n: raw.grid_n,
            span: raw.grid_span_sigmas,
            pilot_samples: raw.pilot_samples,
            seed: raw.seed,
        };
        let pts = classical_series(&ev, &times, &settings)?;
        let mut d = QuadratureDiagnostics {
            nodes_per_axis: raw.grid_n,
            max_purity_deviation: 0.0,
            max_form_gap: 0.0,
            min_mass: f64::INFINITY,
        };
        for (rec, p) in series.records.iter_mut().zip(&pts) {
            rec.s1_cl = Some(p.entropies.s1);
            rec.s2_cl = Some(p.entropies.s2);
            rec.i_cl = Some(p.entropies.mutual);
            rec.purity_check = Some(p.purity_ratio);
            d.max_purity_deviation = d.max_purity_deviation.max((p.purity_ratio - 1.0).abs());
            d.max_form_gap = d.max_form_gap.max((p.entropies.mutual - p.i_direct).abs());
            d.min_mass = d.min_mass.min(p.mass);
        }
        if d.max_purity_deviation > 1e-2 {
            diag.warnings.push(format!(
                "int P^2 drifted by {:.3e}; the grid is too coarse",
                d.max_purity_deviation
            ));
        }
        if d.min_mass < 0.99 {
            diag.warnings.push(format!(
                "grid captured only {:.4} of the probability",
                d.min_mass
            ));
        }
        diag.quadrature = Some(d);
    }

    if raw.mc_samples > 0 {
        let settings = McSettings {
            span: raw.grid_span_sigmas,
            ..McSettings::new(raw.mc_samples, raw.mc_bins, raw.seed)
        };
        let est = mc_series(&ev, &times, &settings)?;
        let mut d = McDiagnostics {
            samples: raw.mc_samples,
            bins: raw.mc_bins,
            max_stderr: 0.0,
            max_escaped_fraction: 0.0,
        };
        let both = raw.grid_n > 0;
        series.columns.mc_compare = both;
        for (rec, e) in series.records.iter_mut().zip(&est) {
            rec.mc_stderr = Some(e.stderr);
            if both {
                rec.i_cl_mc = Some(e.entropies.mutual);
            } else {
                rec.s1_cl = Some(e.entropies.s1);
                rec.s2_cl = Some(e.entropies.s2);
                rec.i_cl = Some(e.entropies.mutual);
            }
            d.max_stderr = d.max_stderr.max(e.stderr);
            d.max_escaped_fraction = d.max_escaped_fraction.max(e.escaped);
        }
        diag.monte_carlo = Some(d);
    }

    if let Some(reference) = overlay(cfg)? {
        series.columns.reference = true;
        for rec in &mut series.records {
            let (q, c) = reference(rec.t)?;
            rec.i_ref = Some(q);
            rec.icl_ref = Some(c);
        }
    }
    Ok(SimulationOutput {
        series,
        diagnostics: diag,
    })
}

type Overlay = Box<dyn Fn(f64) -> Result<(f64, f64)>>;

/// Closed-form curves that apply to this configuration, if any.
fn overlay(cfg: &ValidatedConfig) -> Result<Option<Overlay>> {
    let d = cfg.density;
    let model = cfg.model;
    match model.kind {
        ModelKind::Bilinear if d.is_gaussian() => Ok(Some(Box::new(move |t| {
            let v = bilinear_icl_oracle(&model, d.center(), t)?;
            Ok((v, v))
        }))),
        ModelKind::Rwa => {
            let Some(p) = RwaParams::from_model(&model) else {
                return Ok(None);
            };
            let kinds = (d.factors[0].kind, d.factors[1].kind);
            let at_origin = |k: usize| d.factors[k].q == 0.0 && d.factors[k].p == 0.0;
            let l = p.lambda;
            Ok(match kinds {
                (FactorKind::Fock, FactorKind::Fock) => Some(Box::new(move |t| {
                    let r = rwa_fock_fock(t, l);
                    Ok((r.quantum, r.classical))
                })),
                (FactorKind::Gaussian, FactorKind::Fock) if at_origin(0) => {
                    Some(Box::new(move |t| {
                        let r = rwa_coh_fock(t, l);
                        Ok((r.quantum, r.classical))
                    }))
                }
                (FactorKind::Fock, FactorKind::Gaussian) if at_origin(1) => {
                    Some(Box::new(move |t| {
                        let r = rwa_coh_fock(t, l);
                        Ok((r.quantum, r.classical))
                    }))
                }
                (FactorKind::Gaussian, FactorKind::Gaussian) => Some(Box::new(|_| Ok((0.0, 0.0)))),
                _ => None,
            })
        }
        _ => Ok(None),
    }
}

/// Number-basis run with the truncation check, escalating the basis once.
fn converged_fock(
    cfg: &ValidatedConfig,
    times: &[f64],
) -> Result<(Vec<crate::fock::FockPoint>, FockBasis, bool)> {
    let tol = cfg.raw.fock_pop_tol;
    let method = cfg.raw.fock_method.into();
    let mut basis = cfg.raw.fock_basis();
    let mut worst = 0.0;
    for attempt in 0..2 {
        let pts = fock_series(
            &cfg.model,
            &cfg.density,
            times,
            &FockSettings { basis, method },
        )?;
        worst = pts.iter().map(|p| p.trunc_pop).fold(0.0, f64::max);
        if worst < tol {
            return Ok((pts, basis, attempt > 0));
        }
        if attempt == 0 {
            basis = FockBasis::new(basis.n1_max * 3 / 2 + 1, basis.n2_max * 3 / 2 + 1);
        }
    }
    Err(Error::Convergence(format!(
        "population {worst:.3e} in the top two levels exceeds {tol:e} even at n_max = ({}, {})",
        basis.n1_max, basis.n2_max
    )))
}
