//! Flat run configuration and its validation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flows::FlowPlan;
use crate::fock::{FockBasis, Method};
use crate::poincare::{default_seeds, SectionSettings};
use crate::types::{DensitySpec, Factor, FactorKind, ModelKind, ModelSpec, TimeGrid};

/// Which quantum calculation accompanies the classical one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuantumRoute {
    /// Covariance evolution when possible, number basis otherwise.
    #[default]
    Auto,
    Gaussian,
    Fock,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FockMethod {
    #[default]
    Auto,
    Eigen,
    Chebyshev,
}

impl From<FockMethod> for Method {
    fn from(m: FockMethod) -> Self {
        match m {
            FockMethod::Auto => Method::Auto,
            FockMethod::Eigen => Method::Eigen,
            FockMethod::Chebyshev => Method::Chebyshev,
        }
    }
}

fn default_hbar() -> f64 {
    0.05
}
fn gaussian() -> FactorKind {
    FactorKind::Gaussian
}
fn default_tmax() -> f64 {
    10.0
}
fn default_steps() -> usize {
    200
}
fn default_grid_n() -> usize {
    64
}
fn default_span() -> f64 {
    6.0
}
fn default_bins() -> usize {
    64
}
fn default_rk4_dt() -> f64 {
    1e-3
}
fn default_nmax() -> usize {
    40
}
fn default_seed() -> u64 {
    1
}
fn default_pilot() -> usize {
    4096
}
fn default_escape() -> f64 {
    100.0
}
fn default_pop_tol() -> f64 {
    1e-6
}
fn default_energy() -> f64 {
    0.05
}
fn default_section_seeds() -> usize {
    12
}
fn default_crossings() -> usize {
    200
}
fn default_section_bound() -> f64 {
    5.0
}

/// Every tunable of a run. Missing keys take the defaults below; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelKind,
    /// Defaults to 1, or `sqrt(0.1)` for the Nelson model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega1: Option<f64>,
    /// Defaults to 1, or `sqrt(2)` for the Nelson model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega2: Option<f64>,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
    #[serde(default = "gaussian")]
    pub state1: FactorKind,
    #[serde(default = "gaussian")]
    pub state2: FactorKind,
    #[serde(default)]
    pub center1_q: f64,
    #[serde(default)]
    pub center1_p: f64,
    #[serde(default)]
    pub center2_q: f64,
    #[serde(default)]
    pub center2_p: f64,
    #[serde(default = "default_tmax")]
    pub tmax: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Quadrature nodes per axis; 0 disables the quadrature.
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    #[serde(default = "default_span")]
    pub grid_span_sigmas: f64,
    #[serde(default = "default_pilot")]
    pub pilot_samples: usize,
    /// Monte Carlo samples; 0 disables sampling.
    #[serde(default)]
    pub mc_samples: usize,
    #[serde(default = "default_bins")]
    pub mc_bins: usize,
    #[serde(default = "default_rk4_dt")]
    pub rk4_dt: f64,
    #[serde(default = "default_escape")]
    pub escape_radius: f64,
    #[serde(default)]
    pub quantum: QuantumRoute,
    #[serde(default = "default_nmax")]
    pub fock_nmax: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fock_nmax1: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fock_nmax2: Option<usize>,
    #[serde(default)]
    pub fock_method: FockMethod,
    /// Largest tolerated population in the top two levels of either mode.
    #[serde(default = "default_pop_tol")]
    pub fock_pop_tol: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Section energy for `poincare`.
    #[serde(default = "default_energy")]
    pub energy: f64,
    #[serde(default = "default_section_seeds")]
    pub section_seeds: usize,
    #[serde(default = "default_crossings")]
    pub crossings: usize,
    #[serde(default = "default_section_bound")]
    pub section_bound: f64,
    /// Explicit `[q2, p2]` seeds; empty means `section_seeds` spread over the shell.
    #[serde(default)]
    pub section_seed_points: Vec<[f64; 2]>,
}

impl RunConfig {
    /// Defaults for `model`.
    pub fn new(model: ModelKind) -> Self {
        Self::from_toml_str(&format!("model = \"{model}\"")).expect("defaults parse")
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn omegas(&self) -> (f64, f64) {
        let (d1, d2) = match self.model {
            ModelKind::Nelson => (0.1f64.sqrt(), 2.0f64.sqrt()),
            _ => (1.0, 1.0),
        };
        (self.omega1.unwrap_or(d1), self.omega2.unwrap_or(d2))
    }

    pub fn model_spec(&self) -> ModelSpec {
        let (omega1, omega2) = self.omegas();
        ModelSpec {
            kind: self.model,
            omega1,
            omega2,
            lambda: self.lambda,
            hbar: self.hbar,
        }
    }

    pub fn density_spec(&self) -> DensitySpec {
        DensitySpec::new(
            Factor {
                kind: self.state1,
                q: self.center1_q,
                p: self.center1_p,
            },
            Factor {
                kind: self.state2,
                q: self.center2_q,
                p: self.center2_p,
            },
        )
    }

    pub fn fock_basis(&self) -> FockBasis {
        FockBasis::new(
            self.fock_nmax1.unwrap_or(self.fock_nmax),
            self.fock_nmax2.unwrap_or(self.fock_nmax),
        )
    }

    /// Seeds and integration settings for `poincare`.
    pub fn section(&self) -> Result<(Vec<(f64, f64)>, SectionSettings)> {
        positive("energy", self.energy)?;
        positive("rk4_dt", self.rk4_dt)?;
        positive("section_bound", self.section_bound)?;
        if self.crossings == 0 {
            return Err(Error::Config {
                field: "crossings",
                reason: "need at least one crossing".into(),
            });
        }
        let model = self.model_spec();
        positive("omega1", model.omega1)?;
        positive("omega2", model.omega2)?;
        let seeds = if self.section_seed_points.is_empty() {
            if self.section_seeds == 0 {
                return Err(Error::Config {
                    field: "section_seeds",
                    reason: "need at least one seed".into(),
                });
            }
            default_seeds(&model, self.energy, self.section_seeds)
        } else {
            self.section_seed_points
                .iter()
                .map(|s| (s[0], s[1]))
                .collect()
        };
        if seeds.iter().any(|s| !(s.0.is_finite() && s.1.is_finite())) {
            return Err(Error::Config {
                field: "section_seed_points",
                reason: "must be finite".into(),
            });
        }
        let settings = SectionSettings {
            bound: self.section_bound,
            ..SectionSettings::new(self.energy, self.crossings, self.rk4_dt)
        };
        Ok((seeds, settings))
    }

    /// Checks every field and resolves the flow plan.
    pub fn validate(&self) -> Result<ValidatedConfig> {
        let grid = TimeGrid::new(self.tmax, self.steps)?;
        let mut checked = validate(&self.model_spec(), &self.density_spec(), &grid)?;
        positive("rk4_dt", self.rk4_dt)?;
        positive("escape_radius", self.escape_radius)?;
        positive("grid_span_sigmas", self.grid_span_sigmas)?;
        positive("fock_pop_tol", self.fock_pop_tol)?;
        if self.grid_n == 1 || self.grid_n == 2 {
            return Err(Error::Config {
                field: "grid_n",
                reason: "use 0 to disable or at least 3 nodes".into(),
            });
        }
        if self.pilot_samples < 16 {
            return Err(Error::Config {
                field: "pilot_samples",
                reason: "need at least 16".into(),
            });
        }
        if self.mc_samples > 0 && self.mc_samples < 100 {
            return Err(Error::Config {
                field: "mc_samples",
                reason: "use 0 to disable or at least 100".into(),
            });
        }
        if self.mc_bins < 2 {
            return Err(Error::Config {
                field: "mc_bins",
                reason: "need at least 2".into(),
            });
        }
        let basis = self.fock_basis();
        if basis.n1_max < 2 || basis.n2_max < 2 {
            return Err(Error::Config {
                field: "fock_nmax",
                reason: "need at least 2 levels above the vacuum".into(),
            });
        }
        if self.quantum == QuantumRoute::Gaussian
            && !(self.model.is_quadratic() && checked.density.is_gaussian())
        {
            return Err(Error::Config {
                field: "quantum",
                reason: "the Gaussian route needs a quadratic model and coherent inputs".into(),
            });
        }
        checked.plan = checked
            .plan
            .with_rk4_dt(self.rk4_dt)
            .with_escape_radius(self.escape_radius);
        Ok(ValidatedConfig {
            raw: self.clone(),
            model: checked.model,
            density: checked.density,
            grid,
            plan: checked.plan,
        })
    }
}

fn positive(field: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config {
            field,
            reason: format!("must be positive and finite, got {v}"),
        })
    }
}

/// Model, density and time grid after checking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Validated {
    pub model: ModelSpec,
    pub density: DensitySpec,
    pub grid: TimeGrid,
    pub plan: FlowPlan,
}

/// Checks physical parameters and picks the flow method.
pub fn validate(model: &ModelSpec, density: &DensitySpec, grid: &TimeGrid) -> Result<Validated> {
    positive("hbar", model.hbar)?;
    positive("omega1", model.omega1)?;
    positive("omega2", model.omega2)?;
    if !model.lambda.is_finite() {
        return Err(Error::Config {
            field: "lambda",
            reason: "must be finite".into(),
        });
    }
    let names = [("center1_q", "center1_p"), ("center2_q", "center2_p")];
    for (f, (nq, np)) in density.factors.iter().zip(names) {
        for (name, v) in [(nq, f.q), (np, f.p)] {
            if !v.is_finite() {
                return Err(Error::Config {
                    field: name,
                    reason: "must be finite".into(),
                });
            }
            if f.kind == FactorKind::Fock && v != 0.0 {
                return Err(Error::Config {
                    field: name,
                    reason: "number-state inputs are centred at the origin".into(),
                });
            }
        }
    }
    let plan = FlowPlan::new(*model)?;
    Ok(Validated {
        model: *model,
        density: *density,
        grid: *grid,
        plan,
    })
}

/// A configuration whose invariants have all been checked.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedConfig {
    pub raw: RunConfig,
    pub model: ModelSpec,
    pub density: DensitySpec,
    pub grid: TimeGrid,
    pub plan: FlowPlan,
}
