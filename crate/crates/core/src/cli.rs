//! Command-line front end: `generate`, `reconstruct`, `probe-cone` and `bench-fft`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{cone_probe, ConeProbeReport, JointCone, LinearCone, ProductModel, ScalingReport};
use crate::io;
use crate::phantom::{synthesize, Instance, InstanceSpec, NOISE_MODEL};
use crate::solver::{
    run_joint, run_linear, IterationTrace, Method, SolverConfig, Termination, JOINT_NORM_CONVENTION,
};
use crate::transform::{DftAlgorithm, DftPlan};

#[derive(Debug, Parser)]
#[command(name = "mri-lk", version, about = "Loping Kaczmarz reconstruction for parallel MRI")]
pub struct Cli {
    /// Increase log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize an instance and write its files.
    Generate(GenerateArgs),
    /// Run lLK or lSDK on an instance.
    Reconstruct(ReconstructArgs),
    /// Sample the tangential cone ratio.
    ProbeCone(ProbeArgs),
    /// Time the fast and naive DFT.
    BenchFft(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Instance spec (JSON). Defaults apply to missing fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Emit a joint (image + coefficients) instance.
    #[arg(long)]
    pub joint: bool,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// Run config (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Instance directory; overrides the config.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub method: Option<Method>,
    /// Solve for image and sensitivity coefficients jointly.
    #[arg(long)]
    pub joint: bool,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub max_cycles: Option<usize>,
    /// Start from the exact solution instead of the instance's initial guess.
    #[arg(long)]
    pub start_at_truth: bool,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    /// Probe config (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also probe the operators of this instance around its exact solution.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[arg(long)]
    pub joint: bool,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Transform lengths, powers of two.
    #[arg(long, value_delimiter = ',', default_values_t = vec![256usize, 512, 1024, 2048, 4096])]
    pub sizes: Vec<usize>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialGuess {
    /// The initial guess stored with the instance.
    #[default]
    Instance,
    /// The exact solution.
    Truth,
}

/// Contents of `reconstruct --config`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Relative paths resolve against the config file's directory.
    pub instance: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub joint: bool,
    pub initial: InitialGuess,
    pub solver: SolverConfig,
    /// Skip the PGM and CSV reconstruction files.
    pub no_images: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub samples: usize,
    pub radius: f64,
    pub seed: u64,
    pub instance: Option<PathBuf>,
    pub joint: bool,
    /// Write every sampled pair to the report.
    pub keep_pairs: bool,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            samples: 1000,
            radius: 0.1,
            seed: 0,
            instance: None,
            joint: false,
            keep_pairs: false,
        }
    }
}

/// Summary written by `reconstruct`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub method: Method,
    pub joint: bool,
    /// The joint iteration carries no convergence guarantee.
    pub experimental: bool,
    /// `stopping-rule`, `cycle-cap`, `exact-data-tolerance` or `numerical-failure`.
    pub termination: String,
    pub stopping_index: Option<usize>,
    pub steps: usize,
    pub tau: f64,
    /// Noise levels in the units the solver used (after any rescaling).
    pub noise_levels: Vec<f64>,
    /// `τ δᵢ` in solver units.
    pub thresholds: Vec<f64>,
    /// `‖Fᵢ(x) − 𝓜ᵢᵟ‖` recomputed after the run, solver units.
    pub final_residuals: Vec<f64>,
    /// Every final residual is at most its threshold.
    pub discrepancy_satisfied: bool,
    pub final_error: Option<f64>,
    pub scaling: Option<ScalingReport>,
    pub noise_model: String,
    pub norm_convention: String,
    pub message: Option<String>,
}

fn resolve(base: Option<&Path>, p: PathBuf) -> PathBuf {
    match base.and_then(Path::parent) {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p,
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Reconstruct(a) => cmd_reconstruct(&a),
        Command::ProbeCone(a) => cmd_probe_cone(&a),
        Command::BenchFft(a) => cmd_bench_fft(&a),
    }
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    let mut spec: InstanceSpec = match &args.config {
        Some(p) => io::read_json(p)?,
        None => InstanceSpec::default(),
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    spec.joint |= args.joint;
    let instance = synthesize(&spec)?;
    let files = io::write_instance(&instance, &args.out)?;
    log::info!("wrote {} files to {}", files.len(), args.out.display());
    Ok(())
}

fn reconstruct_config(args: &ReconstructArgs) -> Result<(RunConfig, PathBuf, PathBuf)> {
    let mut cfg: RunConfig = match &args.config {
        Some(p) => io::read_json(p)?,
        None => RunConfig::default(),
    };
    let base = args.config.as_deref();
    if let Some(m) = args.method {
        cfg.solver.method = m;
    }
    if let Some(t) = args.tau {
        cfg.solver.tau = t;
    }
    if let Some(c) = args.max_cycles {
        cfg.solver.max_cycles = c;
    }
    cfg.joint |= args.joint;
    if args.start_at_truth {
        cfg.initial = InitialGuess::Truth;
    }
    cfg.solver.validate()?;
    let instance = args
        .instance
        .clone()
        .or_else(|| cfg.instance.clone().map(|p| resolve(base, p)))
        .ok_or_else(|| usage("no instance given (--instance or \"instance\" in the config)"))?;
    let out = args
        .out
        .clone()
        .or_else(|| cfg.out.clone().map(|p| resolve(base, p)))
        .ok_or_else(|| usage("no output directory given (--out or \"out\" in the config)"))?;
    Ok((cfg, instance, out))
}

pub fn cmd_reconstruct(args: &ReconstructArgs) -> Result<()> {
    let (cfg, instance_dir, out) = reconstruct_config(args)?;
    // every input is read and validated before the solver starts
    let instance = io::read_instance(&instance_dir)?;
    fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    if cfg.joint {
        reconstruct_joint(&cfg, &instance, &out)
    } else {
        reconstruct_linear(&cfg, &instance, &out)
    }
}

fn summary_base(cfg: &RunConfig, noise_levels: &[f64], scaling: Option<ScalingReport>) -> RunSummary {
    RunSummary {
        method: cfg.solver.method,
        joint: cfg.joint,
        experimental: cfg.joint,
        termination: String::new(),
        stopping_index: None,
        steps: 0,
        tau: cfg.solver.tau,
        noise_levels: noise_levels.to_vec(),
        thresholds: noise_levels.iter().map(|d| cfg.solver.tau * d).collect(),
        final_residuals: Vec::new(),
        discrepancy_satisfied: false,
        final_error: None,
        scaling,
        noise_model: NOISE_MODEL.into(),
        norm_convention: JOINT_NORM_CONVENTION.into(),
        message: None,
    }
}

fn termination_label(t: Termination) -> String {
    serde_json::to_value(t)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

/// Writes the partial trace of a failed run, then passes the error on.
fn record_failure(out: &Path, mut summary: RunSummary, err: Error) -> Result<()> {
    if let Error::NumericalFailure { trace, .. } = &err {
        io::write_trace_csv(&out.join("trace.csv"), trace)?;
        summary.termination = "numerical-failure".into();
        summary.steps = trace.records.len();
        summary.message = Some(err.to_string());
        io::write_json(&out.join("summary.json"), &summary)?;
    }
    Err(err)
}

fn finish_summary(
    summary: &mut RunSummary,
    trace: &IterationTrace,
    termination: Termination,
    residuals: Vec<f64>,
) {
    summary.termination = termination_label(termination);
    summary.stopping_index = trace.stopping_index;
    summary.steps = trace.records.len();
    summary.final_error = trace.final_error;
    summary.discrepancy_satisfied = residuals.iter().zip(&summary.thresholds).all(|(r, t)| r <= t);
    summary.final_residuals = residuals;
}

fn reconstruct_linear(cfg: &RunConfig, instance: &Instance, out: &Path) -> Result<()> {
    let mut problem = instance.linear_problem()?;
    let scaling = if cfg.solver.method == Method::Landweber {
        let report = problem.rescale_to_unit()?;
        log::info!("rescaled operators by {:?}", report.factors);
        Some(report)
    } else {
        None
    };
    let mut summary = summary_base(cfg, problem.data().noise_levels(), scaling);
    let initial = match cfg.initial {
        InitialGuess::Instance => instance.truth.initial_image.clone(),
        InitialGuess::Truth => instance.truth.image.clone(),
    };
    let result = match run_linear(&problem, &cfg.solver, initial, Some(&instance.truth.image)) {
        Ok(r) => r,
        Err(e) => return record_failure(out, summary, e),
    };
    let residuals = problem.residual_norms(&result.solution)?;
    finish_summary(&mut summary, &result.trace, result.termination, residuals);

    io::write_trace_csv(&out.join("trace.csv"), &result.trace)?;
    io::write_json(&out.join("summary.json"), &summary)?;
    if !cfg.no_images {
        io::write_image_csv(&out.join("reconstruction.csv"), &result.solution)?;
        io::write_pgm(&out.join("reconstruction.pgm"), &result.solution)?;
    }
    log::info!("{}: {} after {} steps", cfg.solver.method.label(), summary.termination, summary.steps);
    Ok(())
}

fn reconstruct_joint(cfg: &RunConfig, instance: &Instance, out: &Path) -> Result<()> {
    let problem = instance.joint_problem()?;
    let mut summary = summary_base(cfg, problem.data().noise_levels(), None);
    let reference = instance.truth.joint_solution();
    let initial = match cfg.initial {
        InitialGuess::Instance => instance.truth.joint_initial(),
        InitialGuess::Truth => reference.clone(),
    };
    let result = match run_joint(&problem, &cfg.solver, initial, Some(&reference)) {
        Ok(r) => r,
        Err(e) => return record_failure(out, summary, e),
    };
    let residuals = problem.residual_norms(&result.solution)?;
    finish_summary(&mut summary, &result.trace, result.termination, residuals);

    io::write_trace_csv(&out.join("trace.csv"), &result.trace)?;
    io::write_json(&out.join("summary.json"), &summary)?;
    if !cfg.no_images {
        io::write_image_csv(&out.join("reconstruction.csv"), &result.solution.image)?;
        io::write_pgm(&out.join("reconstruction.pgm"), &result.solution.image)?;
        io::write_coefficients_csv(&out.join("reconstruction_coefficients.csv"), &result.solution.coefficients)?;
    }
    Ok(())
}

/// Contents of `cone_report.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeReportFile {
    pub samples: usize,
    pub seed: u64,
    /// `f(x, y) = xy` around the origin.
    pub scalar: ConeProbeReport,
    /// One report per receiver of the linear operators, if an instance was given.
    pub linear: Vec<ConeProbeReport>,
    /// Joint operators around the exact (image, coefficients), if requested.
    pub joint: Vec<ConeProbeReport>,
}

fn strip(mut r: ConeProbeReport, keep: bool) -> ConeProbeReport {
    if !keep {
        r.pairs.clear();
    }
    r
}

pub fn cmd_probe_cone(args: &ProbeArgs) -> Result<()> {
    let mut cfg: ProbeConfig = match &args.config {
        Some(p) => io::read_json(p)?,
        None => ProbeConfig::default(),
    };
    if let Some(s) = args.samples {
        cfg.samples = s;
    }
    if let Some(r) = args.radius {
        cfg.radius = r;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.joint |= args.joint;
    if let Some(i) = &args.instance {
        cfg.instance = Some(i.clone());
    } else if let Some(i) = cfg.instance.take() {
        cfg.instance = Some(resolve(args.config.as_deref(), i));
    }
    if cfg.samples == 0 {
        return Err(usage("the cone probe needs at least one sample"));
    }
    if cfg.joint && cfg.instance.is_none() {
        return Err(usage("--joint needs --instance"));
    }

    let origin = [Complex64::new(0.0, 0.0); 2];
    let scalar = cone_probe(&ProductModel, &origin, cfg.radius, cfg.samples, cfg.seed)?;
    let mut report = ConeReportFile {
        samples: cfg.samples,
        seed: cfg.seed,
        scalar: strip(scalar, cfg.keep_pairs),
        linear: Vec::new(),
        joint: Vec::new(),
    };
    if let Some(dir) = &cfg.instance {
        let instance = io::read_instance(dir)?;
        let center = instance.truth.image.values().to_vec();
        for op in instance.linear_ops()? {
            let r = cone_probe(&LinearCone(&op), &center, cfg.radius, cfg.samples, cfg.seed)?;
            report.linear.push(strip(r, cfg.keep_pairs));
        }
        if cfg.joint {
            let center = instance.truth.joint_solution().to_flat();
            for op in instance.joint_ops()? {
                let r = cone_probe(&JointCone::new(&op), &center, cfg.radius, cfg.samples, cfg.seed)?;
                report.joint.push(strip(r, cfg.keep_pairs));
            }
        }
    }
    for r in std::iter::once(&report.scalar).chain(&report.linear).chain(&report.joint) {
        if r.degenerate {
            log::warn!("degenerate cone sample: every pair had a vanishing denominator");
        }
    }
    fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    io::write_json(&args.out.join("cone_report.json"), &report)
}

/// Naive DFT timings are skipped above this length.
pub const NAIVE_BENCH_LIMIT: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub size: usize,
    pub algorithm: DftAlgorithm,
    /// Median wall time of one forward transform; `None` when skipped.
    pub median_seconds: Option<f64>,
    pub note: String,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// Median time of one forward transform over `repeats` timed batches.
pub fn time_transform(size: usize, algorithm: DftAlgorithm, repeats: usize) -> Result<f64> {
    let plan = DftPlan::new(size, algorithm)?;
    let input: Vec<Complex64> = (0..size)
        .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
        .collect();
    let mut buf = input.clone();
    // enough inner repetitions that each batch lasts a measurable time
    let inner = match algorithm {
        DftAlgorithm::Fast => (1 << 16) / size + 1,
        DftAlgorithm::Naive => 1,
    };
    let mut times = Vec::with_capacity(repeats);
    for _ in 0..repeats.max(1) {
        let t = Instant::now();
        for _ in 0..inner {
            buf.copy_from_slice(&input);
            plan.forward_in_place(&mut buf)?;
        }
        times.push(t.elapsed().as_secs_f64() / inner as f64);
    }
    std::hint::black_box(&buf);
    Ok(median(times))
}

pub fn bench_rows(sizes: &[usize], repeats: usize) -> Result<Vec<BenchRow>> {
    if let Some(&bad) = sizes.iter().find(|n| !n.is_power_of_two()) {
        return Err(usage(format!("benchmark sizes must be powers of two, got {bad}")));
    }
    let mut rows = Vec::new();
    for &size in sizes {
        rows.push(BenchRow {
            size,
            algorithm: DftAlgorithm::Fast,
            median_seconds: Some(time_transform(size, DftAlgorithm::Fast, repeats)?),
            note: String::new(),
        });
        let naive = if size > NAIVE_BENCH_LIMIT {
            BenchRow {
                size,
                algorithm: DftAlgorithm::Naive,
                median_seconds: None,
                note: format!("skipped: naive DFT not timed above {NAIVE_BENCH_LIMIT}"),
            }
        } else {
            BenchRow {
                size,
                algorithm: DftAlgorithm::Naive,
                median_seconds: Some(time_transform(size, DftAlgorithm::Naive, repeats)?),
                note: String::new(),
            }
        };
        rows.push(naive);
    }
    Ok(rows)
}

pub fn cmd_bench_fft(args: &BenchArgs) -> Result<()> {
    if args.sizes.is_empty() || args.repeats == 0 {
        return Err(usage("need at least one size and one repeat"));
    }
    let rows = bench_rows(&args.sizes, args.repeats)?;
    fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let path = args.out.join("bench.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| Error::parse(&path, e.to_string()))?;
    w.write_record(["size", "algorithm", "median_seconds", "note"])
        .map_err(|e| Error::parse(&path, e.to_string()))?;
    for r in &rows {
        let alg = match r.algorithm {
            DftAlgorithm::Fast => "fast",
            DftAlgorithm::Naive => "naive",
        };
        w.write_record([
            r.size.to_string(),
            alg.to_string(),
            r.median_seconds.map(|t| format!("{t:e}")).unwrap_or_default(),
            r.note.clone(),
        ])
        .map_err(|e| Error::parse(&path, e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))
}

