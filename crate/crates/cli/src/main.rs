//! Batch entry point: configure, run simulations and verification suites,
//! emit reports and plot-ready data.
//!
//! Exit codes: 0 when every executed test passes, 1 when any test fails,
//! 2 for malformed configuration or I/O problems. Report content is a pure
//! function of `(config, seed, workers)`; run metadata with timestamps is
//! written to a separate file so reports can be diffed byte for byte.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use fsbm::fuzzy::{AlphaGrid, FuzzySet};
use fsbm::geometry::{make_direction_grid, ConvexBody, DirectionGrid};
use fsbm::processes::{InversionVariant, ProcessSampler, SamplerKind};
use fsbm::rng::replicate_rng;
use fsbm::selftest::{run_selftest, SelftestConfig};
use fsbm::verify::{characterization_suite, degeneracy_test};

#[derive(Parser)]
#[command(name = "fsbm", version, about = "Fuzzy set-valued Brownian motion simulator and verification suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Path to the JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the seed from the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory (overrides the configuration).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Number of estimation workers (overrides the configuration;
    /// 0 = available cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Report output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Runs the exact (non-statistical) invariant suites.
    Selftest,
    /// Samples process paths and writes driver CSVs plus fuzzy-value JSON.
    Simulate,
    /// Runs the Brownian characterization suite on the configured sampler.
    Verify,
    /// Runs the degeneracy test on the configured sampler.
    Degeneracy,
    /// Merges JSON reports into one summary.
    Report {
        /// Report files produced by the other commands.
        inputs: Vec<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Crisp fuzzy-set constructors available to configuration files.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum NuSpec {
    Indicator { point: Vec<f64> },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

impl NuSpec {
    fn build(&self, grid: &Arc<DirectionGrid>, alpha: &Arc<AlphaGrid>) -> anyhow::Result<FuzzySet> {
        let set = match self {
            NuSpec::Indicator { point } => FuzzySet::indicator(grid, alpha, point.clone())?,
            NuSpec::Box { lo, hi } => {
                FuzzySet::crisp(alpha, ConvexBody::axis_box(grid, lo, hi)?)
            }
            NuSpec::Ball { center, radius } => {
                FuzzySet::crisp(alpha, ConvexBody::ball(grid, center, *radius)?)
            }
        };
        Ok(set)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum SamplerSpec {
    Bm,
    Shift { t0: f64 },
    Rescale { lambda: f64 },
    Translate { nu: NuSpec },
    TimeInversion { variant: InversionVariant },
    Constant,
}

impl Default for SamplerSpec {
    fn default() -> Self {
        SamplerSpec::Bm
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
struct RunConfig {
    dim: usize,
    direction_count: usize,
    alpha_levels: Vec<f64>,
    times: Vec<f64>,
    n_samples: usize,
    seed: u64,
    covariance_scale: f64,
    functional_count: usize,
    /// 0 means "use all available cores".
    workers: usize,
    sampler: SamplerSpec,
    output_dir: PathBuf,
    /// Number of paths written by `simulate`.
    path_count: usize,
    /// Instance count for `selftest`.
    selftest_instances: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dim: 2,
            direction_count: 128,
            alpha_levels: vec![1.0, 0.8, 0.6, 0.4, 0.2],
            times: fsbm::processes::default_times(),
            n_samples: 200_000,
            seed: 7,
            covariance_scale: 1.0,
            functional_count: 50,
            workers: 0,
            sampler: SamplerSpec::default(),
            output_dir: PathBuf::from("out"),
            path_count: 1,
            selftest_instances: 1000,
        }
    }
}

struct Runtime {
    config: RunConfig,
    out_dir: PathBuf,
    workers: usize,
    format: Format,
}

impl Runtime {
    fn grids(&self) -> anyhow::Result<(Arc<DirectionGrid>, Arc<AlphaGrid>)> {
        let grid = make_direction_grid(self.config.dim, self.config.direction_count, self.config.seed)?;
        let alpha = AlphaGrid::new(self.config.alpha_levels.clone())?;
        Ok((grid, alpha))
    }

    fn sampler(&self) -> anyhow::Result<ProcessSampler> {
        let (grid, alpha) = self.grids()?;
        let kind = match &self.config.sampler {
            SamplerSpec::Bm => SamplerKind::Brownian,
            SamplerSpec::Shift { t0 } => SamplerKind::Shift { t0: *t0 },
            SamplerSpec::Rescale { lambda } => SamplerKind::Rescale { lambda: *lambda },
            SamplerSpec::Translate { nu } => SamplerKind::Translate {
                nu: nu.build(&grid, &alpha)?,
            },
            SamplerSpec::TimeInversion { variant } => {
                SamplerKind::TimeInversion { variant: *variant }
            }
            SamplerSpec::Constant => SamplerKind::DegenerateZero,
        };
        Ok(ProcessSampler::new(
            self.config.times.clone(),
            self.config.dim,
            self.config.covariance_scale,
            &grid,
            &alpha,
            kind,
        )?)
    }

    fn write_output(&self, stem: &str, json: &str, csv: Option<&str>) -> anyhow::Result<PathBuf> {
        std::fs::create_dir_all(&self.out_dir)
            .with_context(|| format!("creating {}", self.out_dir.display()))?;
        let json_path = self.out_dir.join(format!("{stem}.json"));
        std::fs::write(&json_path, json)
            .with_context(|| format!("writing {}", json_path.display()))?;
        if self.format == Format::Csv {
            if let Some(csv) = csv {
                let csv_path = self.out_dir.join(format!("{stem}.csv"));
                std::fs::write(&csv_path, csv)
                    .with_context(|| format!("writing {}", csv_path.display()))?;
            }
        }
        Ok(json_path)
    }

    /// Run metadata lives in its own file so report content stays
    /// byte-identical across runs of the same configuration.
    fn write_meta(&self, command: &str) -> anyhow::Result<()> {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let meta = serde_json::json!({
            "command": command,
            "timestamp_unix_seconds": timestamp,
            "version": env!("CARGO_PKG_VERSION"),
            "workers": self.workers,
        });
        std::fs::create_dir_all(&self.out_dir)?;
        std::fs::write(
            self.out_dir.join("run_meta.json"),
            serde_json::to_string_pretty(&meta)?,
        )?;
        Ok(())
    }
}

fn load_config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            serde_json::from_str::<RunConfig>(&text)
                .with_context(|| format!("parsing config {}", path.display()))?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(workers) = cli.workers {
        config.workers = workers;
    }
    if config.times.is_empty() || config.alpha_levels.is_empty() {
        return Err(anyhow!("config must declare times and alpha levels"));
    }
    Ok(config)
}

fn effective_workers(config: &RunConfig) -> usize {
    if config.workers == 0 {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    } else {
        config.workers
    }
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    let config = load_config(cli)?;
    let out_dir = cli.out.clone().unwrap_or_else(|| config.output_dir.clone());
    let workers = effective_workers(&config);
    let runtime = Runtime {
        out_dir,
        workers,
        format: cli.format,
        config,
    };

    match &cli.command {
        Command::Selftest => {
            let report = run_selftest(&SelftestConfig {
                instances: runtime.config.selftest_instances,
                dim: runtime.config.dim,
                direction_count: runtime.config.direction_count,
                alpha_levels: runtime.config.alpha_levels.len(),
                seed: runtime.config.seed,
            })?;
            for check in &report.checks {
                println!(
                    "selftest {}: {} (max violation {:.2e}, tolerance {:.1e})",
                    check.name,
                    if check.pass { "PASS" } else { "FAIL" },
                    check.max_violation,
                    check.tolerance
                );
            }
            runtime.write_output("selftest_report", &report.to_json_string(), None)?;
            runtime.write_meta("selftest")?;
            Ok(report.pass)
        }
        Command::Simulate => {
            let sampler = runtime.sampler()?;
            std::fs::create_dir_all(&runtime.out_dir)?;
            for k in 0..runtime.config.path_count {
                let mut rng = replicate_rng(runtime.config.seed, 0, k as u64);
                let (driver, fuzzy) = sampler.sample_path_with_driver(&mut rng)?;
                let csv_path = runtime.out_dir.join(format!("wiener_{k:04}.csv"));
                let mut buf = Vec::new();
                driver.write_csv(&mut buf)?;
                std::fs::write(&csv_path, buf)?;
                let json_path = runtime.out_dir.join(format!("fuzzy_path_{k:04}.json"));
                std::fs::write(
                    &json_path,
                    serde_json::to_string_pretty(&fuzzy.to_json())?,
                )?;
            }
            runtime.write_meta("simulate")?;
            println!(
                "simulate: wrote {} path(s) to {}",
                runtime.config.path_count,
                runtime.out_dir.display()
            );
            Ok(true)
        }
        Command::Verify => {
            let sampler = runtime.sampler()?;
            let report = characterization_suite(
                &sampler,
                runtime.config.functional_count,
                sampler.times().to_vec().as_slice(),
                runtime.config.n_samples,
                runtime.config.seed,
                runtime.workers,
            )?;
            println!(
                "verify: {} ({} checks, family alpha bound {:.4})",
                if report.pass { "PASS" } else { "FAIL" },
                report.checks,
                report.family_alpha_bound
            );
            runtime.write_output(
                "verify_report",
                &report.to_json_string(),
                Some(&report.to_csv_string()),
            )?;
            runtime.write_meta("verify")?;
            Ok(report.pass)
        }
        Command::Degeneracy => {
            let sampler = runtime.sampler()?;
            let report = degeneracy_test(
                &sampler,
                sampler.times().to_vec().as_slice(),
                runtime.config.n_samples,
                runtime.config.seed,
                runtime.workers,
            )?;
            println!(
                "degeneracy: {} ({} checks)",
                if report.pass { "PASS" } else { "FAIL" },
                report.checks
            );
            for row in report.rows.iter().filter(|r| !r.pass) {
                println!(
                    "  failed: {} {} t={} estimate={:.4}",
                    row.name, row.functional, row.t, row.estimate
                );
            }
            runtime.write_output(
                "degeneracy_report",
                &report.to_json_string(),
                Some(&report.to_csv_string()),
            )?;
            runtime.write_meta("degeneracy")?;
            Ok(report.pass)
        }
        Command::Report { inputs } => {
            if inputs.is_empty() {
                return Err(anyhow!("report requires at least one input file"));
            }
            let mut entries = Vec::new();
            let mut all_pass = true;
            for path in inputs {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                let value: serde_json::Value = serde_json::from_str(&text)
                    .with_context(|| format!("parsing {}", path.display()))?;
                let pass = value
                    .get("pass")
                    .and_then(|v| v.as_bool())
                    .ok_or_else(|| anyhow!("{} has no boolean `pass` field", path.display()))?;
                let test = value
                    .get("test")
                    .and_then(|v| v.as_str())
                    .unwrap_or("selftest")
                    .to_string();
                all_pass &= pass;
                entries.push(serde_json::json!({
                    "file": path.display().to_string(),
                    "test": test,
                    "pass": pass,
                }));
            }
            let summary = serde_json::json!({ "reports": entries, "all_pass": all_pass });
            let text = serde_json::to_string_pretty(&summary)?;
            println!("{text}");
            runtime.write_output("merged_report", &text, None)?;
            runtime.write_meta("report")?;
            Ok(all_pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_losslessly() {
        let config = RunConfig {
            sampler: SamplerSpec::Translate {
                nu: NuSpec::Box {
                    lo: vec![0.0, 0.0],
                    hi: vec![1.0, 1.0],
                },
            },
            ..RunConfig::default()
        };
        let text = serde_json::to_string_pretty(&config).unwrap();
        let parsed: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed, config);
        let text2 = serde_json::to_string_pretty(&parsed).unwrap();
        assert_eq!(text, text2);
    }

    #[test]
    fn unknown_config_fields_are_rejected() {
        let err = serde_json::from_str::<RunConfig>(r#"{"dim": 2, "bogus": 1}"#);
        assert!(err.is_err());
    }

    #[test]
    fn sampler_specs_deserialize() {
        let spec: SamplerSpec =
            serde_json::from_str(r#"{"kind": "time_inversion", "variant": "reciprocal"}"#)
                .unwrap();
        assert_eq!(
            spec,
            SamplerSpec::TimeInversion {
                variant: InversionVariant::Reciprocal
            }
        );
        let spec: SamplerSpec = serde_json::from_str(r#"{"kind": "bm"}"#).unwrap();
        assert_eq!(spec, SamplerSpec::Bm);
    }
}
