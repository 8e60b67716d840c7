use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tfokp::audit::{audit_ctif, demonstrate_tif_impossibility, AuditOptions};
use tfokp::instances::{ingest, write_instance, GadgetParams, GeneratorKind};
use tfokp::oracles::{apx_greedy, oracle_star_with, opt_dp, DstarMode};
use tfokp::{run, BoundContext, GeneratorSpec64, Instance64, PolicySpec64};
use tfokp_bench::curves::{alpha_grid, pareto_curves, threshold_table, Family, Solved};
use tfokp_bench::output::{self, Format};
use tfokp_bench::sweep::{prediction_error_sweep, robustness_sweep, BadPrediction};
use tfokp_bench::{run_experiment, ExperimentSpec};

#[derive(Parser)]
#[command(name = "tfokp", version, about = "Time-fair online knapsack toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file from a generator spec.
    Gen(Common),
    /// Run one policy on one instance.
    Run(Common),
    /// Exact optimum, greedy approximation and ORACLE* for one instance.
    Oracle(Common),
    /// Fairness audit of a policy, or a gadget demonstration.
    Audit(Common),
    /// Bound curves or threshold functions.
    Curves(Common),
    /// Batched experiment emitting CR distributions.
    Experiment(Common),
    /// Robustness or prediction-error sweep.
    Sweep(Common),
}

/// A configuration problem, reported with exit code 2.
#[derive(Debug)]
struct ConfigError(String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn read_config<T: DeserializeOwned>(c: &Common) -> anyhow::Result<T> {
    let path = c
        .config
        .as_ref()
        .ok_or_else(|| ConfigError("--config <json> is required".into()))?;
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text)
        .map_err(|e| ConfigError(format!("{}: {e}", path.display())).into())
}

fn read_config_or_default<T: DeserializeOwned + Default>(c: &Common) -> anyhow::Result<T> {
    match c.config {
        Some(_) => read_config(c),
        None => Ok(T::default()),
    }
}

fn sink(out: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            Box::new(BufWriter::new(
                File::create(p).with_context(|| format!("creating {}", p.display()))?,
            ))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn reseed(spec: &mut GeneratorSpec64, seed: Option<u64>) {
    if let (Some(s), GeneratorKind::TraceSynth { seed, .. }) = (seed, &mut spec.kind) {
        *seed = s;
    }
}

/// Where a single-instance command gets its instance.
#[derive(Deserialize)]
struct Source {
    #[serde(default)]
    instance: Option<PathBuf>,
    #[serde(default)]
    generator: Option<GeneratorSpec64>,
}

impl Source {
    fn load(self, seed: Option<u64>) -> anyhow::Result<Instance64> {
        match (self.instance, self.generator) {
            (Some(p), None) => Ok(ingest(&p)?),
            (None, Some(mut g)) => {
                reseed(&mut g, seed);
                Ok(g.generate()?)
            }
            _ => bail!(ConfigError("give exactly one of `instance` or `generator`".into())),
        }
    }
}

fn cmd_gen(c: &Common) -> anyhow::Result<()> {
    let mut spec: GeneratorSpec64 = read_config(c)?;
    reseed(&mut spec, c.seed);
    let inst = spec.generate()?;
    match c.format {
        Format::Json => output::write_json(sink(&c.out)?, &inst),
        Format::Csv => {
            let out = c
                .out
                .as_ref()
                .ok_or_else(|| ConfigError("gen --format csv needs --out <file.csv>".into()))?;
            write_instance(&inst, out)?;
            eprintln!(
                "wrote {} items to {} ({})",
                inst.len(),
                out.display(),
                inst.fingerprint()
            );
            Ok(())
        }
    }
}

#[derive(Deserialize)]
struct RunConfig {
    policy: PolicySpec64,
    #[serde(flatten)]
    source: Source,
}

fn cmd_run(c: &Common) -> anyhow::Result<()> {
    let cfg: RunConfig = read_config(c)?;
    let mut policy = cfg.policy;
    if let (Some(s), PolicySpec64::ZclRandomized { seed }) = (c.seed, &mut policy) {
        *seed = s;
    }
    let inst = cfg.source.load(c.seed)?;
    let trace = run(&policy, &inst)?;
    let out = sink(&c.out)?;
    match c.format {
        Format::Json => output::write_json(out, &trace),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record([
                "index",
                "accepted",
                "utilization_at_arrival",
                "threshold_at_arrival",
                "post_utilization",
            ])?;
            for d in &trace.decisions {
                w.write_record([
                    d.index.to_string(),
                    d.accepted.to_string(),
                    d.utilization_at_arrival.to_string(),
                    d.threshold_at_arrival.map_or_else(String::new, |t| t.to_string()),
                    d.post_utilization.to_string(),
                ])?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

#[derive(Deserialize)]
struct OracleConfig {
    #[serde(flatten)]
    source: Source,
    #[serde(default)]
    dstar_mode: DstarMode,
}

fn cmd_oracle(c: &Common) -> anyhow::Result<()> {
    let cfg: OracleConfig = read_config(c)?;
    let inst = cfg.source.load(c.seed)?;
    let opt = opt_dp(&inst)?;
    let apx = apx_greedy(&inst);
    let star = if inst.is_empty() {
        None
    } else {
        Some(oracle_star_with(&inst, cfg.dstar_mode)?)
    };
    let out = sink(&c.out)?;
    match c.format {
        Format::Json => output::write_json(
            out,
            &serde_json::json!({ "opt": opt, "apx": apx, "oracle_star": star }),
        ),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["oracle", "value", "items"])?;
            w.write_record(["opt".into(), opt.value.to_string(), opt.chosen.len().to_string()])?;
            w.write_record(["apx".into(), apx.value.to_string(), apx.chosen.len().to_string()])?;
            if let Some(s) = &star {
                w.write_record(["oracle_star".into(), s.value.to_string(), s.chosen.len().to_string()])?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AuditConfig {
    Demo {
        demo: String,
        #[serde(default)]
        params: GadgetParams<f64>,
    },
    Audit(Box<AuditJob>),
}

#[derive(Deserialize)]
struct AuditJob {
    policy: PolicySpec64,
    alpha: f64,
    #[serde(default)]
    instances: Vec<PathBuf>,
    #[serde(default)]
    generators: Vec<GeneratorSpec64>,
    probes: Vec<f64>,
    #[serde(default)]
    interval: Option<[f64; 2]>,
    #[serde(default)]
    positions: Option<Vec<usize>>,
    #[serde(default = "default_trials")]
    trials: usize,
    #[serde(default)]
    seed: u64,
}

fn default_trials() -> usize {
    10_000
}

fn cmd_audit(c: &Common) -> anyhow::Result<()> {
    let cfg: AuditConfig = read_config(c)?;
    let out = sink(&c.out)?;
    match cfg {
        AuditConfig::Demo { demo, params } => {
            let report = demonstrate_tif_impossibility(&demo, &params)?;
            match c.format {
                Format::Json => output::write_json(out, &report),
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(out);
                    w.write_record(["policy", "segment", "density", "offered", "accepted", "accepted_alone"])?;
                    for p in &report.policies {
                        for s in &p.segments {
                            w.write_record([
                                p.policy.name(),
                                s.label.clone(),
                                s.density.to_string(),
                                s.offered.to_string(),
                                s.accepted.to_string(),
                                s.accepted_alone.to_string(),
                            ])?;
                        }
                    }
                    w.flush()?;
                    eprint!("{report}");
                    Ok(())
                }
            }
        }
        AuditConfig::Audit(job) => {
            let mut bases = Vec::new();
            for p in &job.instances {
                bases.push(ingest(p)?);
            }
            for g in &job.generators {
                bases.push(g.generate()?);
            }
            let opts = AuditOptions {
                interval: job.interval,
                positions: job.positions.clone(),
                trials: job.trials,
                seed: c.seed.unwrap_or(job.seed),
            };
            let report = audit_ctif(&job.policy, job.alpha, &bases, &job.probes, &opts)?;
            eprintln!("{report}");
            match c.format {
                Format::Json => output::write_json(out, &report),
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(out);
                    w.write_record([
                        "policy",
                        "a",
                        "b",
                        "verdict",
                        "probes_in_scope",
                        "boundary_items",
                        "excluded",
                        "witnesses",
                    ])?;
                    w.write_record([
                        report.policy.name(),
                        report.interval[0].to_string(),
                        report.interval[1].to_string(),
                        report.verdict.to_string(),
                        report.probes_in_scope.to_string(),
                        report.boundary_items.to_string(),
                        report.excluded.to_string(),
                        report.witnesses.len().to_string(),
                    ])?;
                    w.flush()?;
                    Ok(())
                }
            }
        }
    }
}

#[derive(Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
enum CurveKind {
    Pareto,
    Thresholds,
}

#[derive(Deserialize)]
#[serde(default)]
struct CurvesConfig {
    kind: CurveKind,
    #[serde(flatten)]
    family: Family,
    alphas: Option<Vec<f64>>,
    points: usize,
    policies: Vec<PolicySpec64>,
}

impl Default for CurvesConfig {
    fn default() -> Self {
        CurvesConfig {
            kind: CurveKind::Pareto,
            family: Family::new(1.0, 5.0, 1000, 49, 50),
            alphas: None,
            points: 50,
            policies: vec![
                PolicySpec64::Zcl,
                PolicySpec64::Baseline { alpha: 0.66 },
                PolicySpec64::Ect { alpha: 0.5 },
                PolicySpec64::LaEct { gamma: 0.33, prediction: 3.0 },
            ],
        }
    }
}

fn cmd_curves(c: &Common) -> anyhow::Result<()> {
    let cfg: CurvesConfig = read_config_or_default(c)?;
    let out = sink(&c.out)?;
    match cfg.kind {
        CurveKind::Pareto => {
            let ctx = cfg.family.context()?;
            let alphas = cfg.alphas.unwrap_or_else(|| alpha_grid(&ctx, cfg.points));
            let rows = pareto_curves(&cfg.family, &alphas)?;
            for r in rows.iter().filter(|r| !r.conforms(0.05)) {
                log::warn!("alpha {}: empirical ECT {} outside 5% of the bound {}", r.alpha, r.ect_empirical, r.lower_bound);
            }
            match c.format {
                Format::Json => output::write_json(out, &rows),
                Format::Csv => output::write_curves_csv(out, &rows),
            }
        }
        CurveKind::Thresholds => {
            let ctx = BoundContext::new(cfg.family.lower, cfg.family.upper)?;
            let rows = threshold_table(&ctx, &cfg.policies, cfg.points.max(2))?;
            match c.format {
                Format::Json => output::write_json(out, &rows),
                Format::Csv => output::write_thresholds_csv(out, &rows),
            }
        }
    }
}

fn cmd_experiment(c: &Common) -> anyhow::Result<()> {
    let mut spec: ExperimentSpec = read_config(c)?;
    if let Some(s) = c.seed {
        spec.seed = s;
    }
    let report = run_experiment(&spec)?;
    if report.skipped > 0 {
        eprintln!("skipped {} instance(s) over the DP budget", report.skipped);
    }
    let bad = report.consistency.iter().filter(|k| !k.holds).count();
    if spec.prediction_sigma == 0.0 && bad > 0 {
        log::warn!("{bad} consistency check(s) above (rho+2)/gamma");
    }
    let target = c.out.clone().or_else(|| spec.output.clone());
    let out = sink(&target)?;
    match c.format {
        Format::Json => output::write_json(out, &report),
        Format::Csv => output::write_cdf_csv(out, &report),
    }
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum SweepConfig {
    Robustness {
        family: Family,
        gammas: Vec<f64>,
        #[serde(default = "default_predictions")]
        predictions: Vec<BadPrediction>,
    },
    PredictionError {
        experiment: Box<ExperimentSpec>,
        sigmas: Vec<f64>,
    },
}

fn default_predictions() -> Vec<BadPrediction> {
    vec![
        BadPrediction::Lower,
        BadPrediction::Upper,
        BadPrediction::Random { count: 8, seed: 0 },
    ]
}

fn cmd_sweep(c: &Common) -> anyhow::Result<()> {
    let cfg: SweepConfig = read_config(c)?;
    let out = sink(&c.out)?;
    match cfg {
        SweepConfig::Robustness {
            family,
            gammas,
            mut predictions,
        } => {
            if let Some(s) = c.seed {
                for p in &mut predictions {
                    if let BadPrediction::Random { seed, .. } = p {
                        *seed = s;
                    }
                }
            }
            let solved = Solved::family(&family)?;
            let rows = robustness_sweep(&gammas, &predictions, &solved)?;
            match c.format {
                Format::Json => output::write_json(out, &rows),
                Format::Csv => output::write_robustness_csv(out, &rows),
            }
        }
        SweepConfig::PredictionError { mut experiment, sigmas } => {
            if let Some(s) = c.seed {
                experiment.seed = s;
            }
            let rows = prediction_error_sweep(&experiment, &sigmas)?;
            match c.format {
                Format::Json => output::write_json(out, &rows),
                Format::Csv => output::write_noise_csv(out, &rows),
            }
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<tfokp::Error>() {
        return match e {
            tfokp::Error::Budget { .. } => 3,
            e if e.is_validation() => 2,
            _ => 1,
        };
    }
    if err.is::<ConfigError>() {
        return 2;
    }
    1
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(c) => cmd_gen(c),
        Command::Run(c) => cmd_run(c),
        Command::Oracle(c) => cmd_oracle(c),
        Command::Audit(c) => cmd_audit(c),
        Command::Curves(c) => cmd_curves(c),
        Command::Experiment(c) => cmd_experiment(c),
        Command::Sweep(c) => cmd_sweep(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
