//! `lmi`: runs the simulations described by a TOML file and writes CSV, manifest and SVG outputs.

mod manifest;
mod output;
mod plot;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use lmi_core::poincare::{classify, run_seeds, section_csv, select_centers};
use lmi_core::{simulate, Error, ModelKind, RunConfig};
use serde_json::json;

use manifest::{OutputFile, RunManifest, Versions};
use output::{content_hash, sha256_hex, write_atomic};

const SEED_ENV: &str = "SIM_SEED";

#[derive(Parser)]
#[command(
    name = "lmi",
    version,
    about = "Quantum and classical linear mutual information of coupled oscillators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entropy time series for one configuration.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; defaults to one per core.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Poincare section of the Nelson model at `energy`.
    Poincare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// SVG chart of a series or section CSV.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Wrapper for failures that should exit with the configuration status.
#[derive(Debug)]
struct InputError(String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            if e.is_config() {
                return 2;
            }
            if e.is_convergence() {
                return 3;
            }
        }
        if cause.is::<InputError>() || cause.is::<plot::PlotError>() {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate {
            config,
            out,
            threads,
        } => run_simulate(&config, &out, threads),
        Command::Poincare { config, out } => run_poincare(&config, &out),
        Command::Plot { input, out } => run_plot(&input, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

struct LoadedConfig {
    config: RunConfig,
    input_hash: String,
    seed_source: &'static str,
}

fn load_config(path: &Path) -> Result<LoadedConfig> {
    let text =
        fs::read(path).map_err(|e| InputError(format!("reading {}: {e}", path.display())))?;
    let input_hash = content_hash(&text);
    let text = String::from_utf8(text)
        .map_err(|_| InputError(format!("{} is not UTF-8", path.display())))?;
    let mut config =
        RunConfig::from_toml_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let mut seed_source = "config";
    if let Ok(v) = std::env::var(SEED_ENV) {
        config.seed = v
            .trim()
            .parse()
            .map_err(|_| InputError(format!("{SEED_ENV}={v:?} is not an unsigned integer")))?;
        seed_source = "env:SIM_SEED";
    }
    Ok(LoadedConfig {
        config,
        input_hash,
        seed_source,
    })
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into())
}

/// Writes the outputs and then the manifest that lists them.
fn write_outputs(
    out: &Path,
    name: &str,
    files: &[(String, Vec<u8>)],
    mut manifest: RunManifest,
) -> Result<()> {
    for (file, bytes) in files {
        write_atomic(&out.join(file), bytes)?;
        manifest.outputs.push(OutputFile {
            file: file.clone(),
            sha256: sha256_hex(bytes),
        });
    }
    let json = serde_json::to_vec_pretty(&manifest)?;
    write_atomic(&out.join(format!("{name}.manifest.json")), &json)?;
    Ok(())
}

fn run_simulate(config_path: &Path, out: &Path, threads: Option<usize>) -> Result<()> {
    let start = Instant::now();
    if let Some(n) = threads {
        if n == 0 {
            return Err(InputError("--threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let loaded = load_config(config_path)?;
    let validated = loaded.config.validate()?;
    let result = simulate(&validated)?;
    for w in &result.diagnostics.warnings {
        eprintln!("warning: {w}");
    }
    let name = stem(config_path);
    let csv = result.series.to_csv().into_bytes();
    let manifest = RunManifest {
        command: "simulate",
        config_path: config_path.display().to_string(),
        input_hash: loaded.input_hash,
        resolved_config: serde_json::to_value(&loaded.config)?,
        model: serde_json::to_value(validated.model)?,
        seed: loaded.config.seed,
        seed_source: loaded.seed_source,
        versions: Versions::current(),
        threads: rayon::current_num_threads(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        diagnostics: serde_json::to_value(&result.diagnostics)?,
        outputs: Vec::new(),
    };
    write_outputs(out, &name, &[(format!("{name}.csv"), csv)], manifest)
}

fn run_poincare(config_path: &Path, out: &Path) -> Result<()> {
    let start = Instant::now();
    let loaded = load_config(config_path)?;
    let cfg = &loaded.config;
    if cfg.model != ModelKind::Nelson {
        return Err(Error::Config {
            field: "model",
            reason: "sections are computed for the nelson model".into(),
        }
        .into());
    }
    let model = cfg.model_spec();
    let (seeds, settings) = cfg.section()?;
    let runs = run_seeds(&model, &seeds, &settings);
    if runs.iter().all(|r| r.result.is_err()) {
        let first = runs
            .into_iter()
            .next()
            .and_then(|r| r.result.err())
            .context("no seeds")?;
        return Err(anyhow::Error::new(first).context("every seed failed"));
    }
    let classes = classify(&runs);
    let per_seed: Vec<_> = runs
        .iter()
        .map(|r| {
            let class = classes.iter().find(|c| c.seed_index == r.seed_index);
            match &r.result {
                Ok(points) => json!({
                    "seed_index": r.seed_index,
                    "q2": r.start.0,
                    "p2": r.start.1,
                    "crossings": points.len(),
                    "dispersion_exponent": class.map(|c| c.exponent),
                    "chaotic": class.map(|c| c.chaotic),
                }),
                Err(e) => json!({
                    "seed_index": r.seed_index,
                    "q2": r.start.0,
                    "p2": r.start.1,
                    "error": e.to_string(),
                }),
            }
        })
        .collect();
    let centers = select_centers(&model, settings.energy, &classes);
    let point = |p: lmi_core::PhasePoint| json!({ "q1": p.q1, "p1": p.p1, "q2": p.q2, "p2": p.p2 });
    let mut warnings = Vec::new();
    if centers.is_none() {
        warnings.push("no seed pair separated into chaotic and regular families".to_string());
    }
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let diagnostics = json!({
        "energy": settings.energy,
        "crossings_per_seed": settings.crossings,
        "rk4_dt": settings.rk4_dt,
        "bound": settings.bound,
        "max_time": settings.max_time,
        "chaotic_exponent_threshold": lmi_core::poincare::CHAOTIC_EXPONENT,
        "seeds": per_seed,
        "chaotic_center": centers.map(|c| point(c.0)),
        "regular_center": centers.map(|c| point(c.1)),
        "warnings": warnings,
    });
    let name = stem(config_path);
    let csv = section_csv(&runs).into_bytes();
    let manifest = RunManifest {
        command: "poincare",
        config_path: config_path.display().to_string(),
        input_hash: loaded.input_hash,
        resolved_config: serde_json::to_value(cfg)?,
        model: serde_json::to_value(model)?,
        seed: cfg.seed,
        seed_source: loaded.seed_source,
        versions: Versions::current(),
        threads: rayon::current_num_threads(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        diagnostics,
        outputs: Vec::new(),
    };
    write_outputs(out, &name, &[(format!("{name}.csv"), csv)], manifest)
}

fn run_plot(input: &Path, out: &Path) -> Result<()> {
    let bytes =
        fs::read(input).map_err(|e| InputError(format!("reading {}: {e}", input.display())))?;
    let Ok(text) = String::from_utf8(bytes.clone()) else {
        bail!(InputError(format!("{} is not UTF-8", input.display())));
    };
    let svg = plot::render(&text).with_context(|| format!("plotting {}", input.display()))?;
    // the chart names its source so it can be traced back to the run manifest
    let source = input
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let svg = svg.replacen(
        "<rect",
        &format!(
            "<desc>source {} sha256 {}</desc>\n<rect",
            xml_escape(&source),
            sha256_hex(&bytes)
        ),
        1,
    );
    write_atomic(out, svg.as_bytes())
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
