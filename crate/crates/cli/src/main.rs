//! `levytree` command-line front end.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use levy_tree::ci_check::{factorization_residual, rectangle_ci_check, LevyDensity, Partition, Rectangle, SignedMeasure};
use levy_tree::config::ModelConfig;
use levy_tree::estimate::{chi_hat, ChiEstimate};
use levy_tree::io::{chi_matrices, ingest_prices, read_matrix_csv, write_matrix_csv, write_recovery_csv, write_stability_csv};
use levy_tree::learn::{learn_tree_from_chi, recovery_study, subsample_stability, StudyConfig};
use levy_tree::simulate::{rank_couple, simulate_increments, IncrementMatrix, IncrementMetadata, SimConfig, StepKind};
use levy_tree::tree::io::{to_dot, write_edge_csv};
use levy_tree::{Dependence, Error, Result};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "levytree", version, about = "Tree-structured Lévy process models: simulate, estimate, learn")]
struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "LEVYTREE_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate increments of a model given as a JSON config.
    Simulate(SimulateArgs),
    /// Estimate Lévy correlation matrices from increments.
    Estimate(EstimateArgs),
    /// Learn a tree from increments or from saved χ̂ matrices.
    Learn(LearnArgs),
    /// Tree recovery study over a grid of sample sizes and quantiles.
    Study(StudyArgs),
    /// Check a conditional independence statement on a rectangle.
    Verify(VerifyArgs),
    /// Replace standardized increments by observed returns of equal rank.
    Couple(CoupleArgs),
    /// Convert a price table to log-returns.
    Ingest(IngestArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value = "unit", value_parser = ["unit", "hf"])]
    step: String,
    /// Monte Carlo sample size for the drift correction.
    #[arg(long, default_value_t = 100_000)]
    drift_samples: usize,
    /// Output directory for increments.csv, paths.csv and metadata.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, conflicts_with = "k_grid", required_unless_present = "k_grid")]
    k: Option<usize>,
    /// Comma-separated k values; one subdirectory per k plus chi_grid.csv.
    #[arg(long, value_delimiter = ',')]
    k_grid: Option<Vec<usize>>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct LearnArgs {
    #[arg(long, required_unless_present = "chi_dir")]
    input: Option<PathBuf>,
    #[arg(long, required_unless_present = "chi_dir")]
    k: Option<usize>,
    /// Directory written by `estimate --k`, used instead of raw increments.
    #[arg(long, conflicts_with_all = ["input", "k"])]
    chi_dir: Option<PathBuf>,
    /// Number of half-size subsamples for edge selection frequencies.
    #[arg(long, requires = "input")]
    stability: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct StudyArgs {
    #[arg(long)]
    d: usize,
    #[arg(long, value_delimiter = ',', required = true)]
    n_grid: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    q_grid: Vec<f64>,
    #[arg(long)]
    reps: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 0.01)]
    eps: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma_min: f64,
    #[arg(long, default_value_t = 6.0)]
    gamma_max: f64,
    /// Output directory for recovery.csv and metadata.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    config: PathBuf,
    /// 1-based coordinates of A, comma-separated; may be empty.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    a: Vec<usize>,
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    b: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    c: Vec<usize>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    lower: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    upper: Vec<f64>,
    #[arg(long, default_value_t = 64)]
    resolution: usize,
    #[arg(long, default_value_t = 1e-3)]
    tolerance: f64,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CoupleArgs {
    /// Standardized increments CSV.
    #[arg(long)]
    std: PathBuf,
    /// Observed returns CSV in the same format and of the same shape.
    #[arg(long)]
    observed: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct IngestArgs {
    /// CSV with header `date,TICKER1,...`.
    #[arg(long)]
    prices: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::validation("cli", format!("cannot open {}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::validation("cli", format!("cannot create {}: {e}", path.display())))
}

fn out_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::validation("cli", format!("cannot create {}: {e}", path.display())))
}

fn read_increments(path: &Path) -> Result<IncrementMatrix> {
    IncrementMatrix::read_csv(open(path)?)
}

fn load_config(path: &Path) -> Result<ModelConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::validation("cli", format!("cannot read {}: {e}", path.display())))?;
    ModelConfig::from_json(&text)
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn metadata(command: &str, flags: Value) -> Value {
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "flags": flags,
    })
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let config = load_config(&args.config)?;
    let model = config.to_model()?;
    let hash = config.hash()?;
    let step: StepKind = args.step.parse()?;
    let mut cfg = SimConfig::new(args.eps, args.n, args.seed).with_step_kind(step);
    cfg.drift_mc_samples = args.drift_samples;
    let sim = simulate_increments(&model, &cfg)?;
    let increments = sim.increments.with_metadata(IncrementMetadata {
        step_kind: Some(step),
        seed: Some(args.seed),
        epsilon: Some(args.eps),
        model_hash: Some(hash.clone()),
    });
    out_dir(&args.out)?;
    increments.write_csv(create(&args.out.join("increments.csv"))?)?;
    increments.cumulative().write_csv(create(&args.out.join("paths.csv"))?)?;
    let (rate, rate_se) = sim.stats.rate_estimate(model.dim(), cfg.effective_epsilon());
    let mut meta = metadata(
        "simulate",
        json!({"n": args.n, "eps": args.eps, "seed": args.seed, "step": args.step, "drift_samples": args.drift_samples}),
    );
    meta["model_hash"] = json!(hash);
    meta["acceptance"] = json!({
        "proposals": sim.stats.proposals,
        "accepted": sim.stats.accepted,
        "rate_estimate": rate,
        "rate_standard_error": rate_se,
    });
    meta["drift"] = json!({
        "gamma_eps": sim.drift.gamma_eps,
        "compensation": sim.drift.compensation,
        "standard_error": sim.drift.standard_error,
    });
    write_json(&args.out.join("metadata.json"), &meta)
}

fn write_chi(est: &ChiEstimate, names: &[String], dir: &Path) -> Result<()> {
    out_dir(dir)?;
    for (suffix, matrix) in chi_matrices(est) {
        write_matrix_csv(matrix, names, create(&dir.join(format!("{suffix}.csv")))?)?;
    }
    write_json(&dir.join("metadata.json"), &metadata("estimate", json!({"k": est.k, "n": est.n})))
}

fn estimate(args: &EstimateArgs) -> Result<()> {
    let inc = read_increments(&args.input)?;
    if let Some(k) = args.k {
        return write_chi(&chi_hat(&inc, k)?, inc.names(), &args.out);
    }
    let grid = args.k_grid.as_deref().unwrap_or_default();
    if grid.is_empty() {
        return Err(Error::validation("cli", "--k-grid needs at least one value"));
    }
    out_dir(&args.out)?;
    let mut w = csv_writer(&args.out.join("chi_grid.csv"))?;
    w.write_record(["k", "i", "j", "chi", "chi_pp", "chi_pm", "chi_mp", "chi_mm"])?;
    for &k in grid {
        let est = chi_hat(&inc, k)?;
        write_chi(&est, inc.names(), &args.out.join(format!("k_{k}")))?;
        for i in 0..est.dim() {
            for j in (i + 1)..est.dim() {
                w.write_record(&[
                    k.to_string(),
                    (i + 1).to_string(),
                    (j + 1).to_string(),
                    est.chi[(i, j)].to_string(),
                    est.chi_pp[(i, j)].to_string(),
                    est.chi_pm[(i, j)].to_string(),
                    est.chi_mp[(i, j)].to_string(),
                    est.chi_mm[(i, j)].to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(create(path)?))
}

fn read_chi_dir(dir: &Path) -> Result<(ChiEstimate, Vec<String>)> {
    let meta: Value = serde_json::from_reader(open(&dir.join("metadata.json"))?)?;
    let field = |name: &str| -> Result<usize> {
        meta["flags"][name]
            .as_u64()
            .map(|v| v as usize)
            .ok_or_else(|| Error::validation("cli", format!("{}: flags.{name} missing", dir.join("metadata.json").display())))
    };
    let (k, n) = (field("k")?, field("n")?);
    let mut mats = Vec::new();
    let mut names = Vec::new();
    for suffix in ["chi_pp", "chi_pm", "chi_mp", "chi_mm"] {
        let (m, nm) = read_matrix_csv(open(&dir.join(format!("{suffix}.csv")))?)?;
        mats.push(m);
        names = nm;
    }
    let mut it = mats.into_iter();
    let mut next = || it.next().unwrap();
    let est = ChiEstimate::from_orthant_matrices(next(), next(), next(), next(), k, n)?;
    Ok((est, names))
}

fn learn(args: &LearnArgs) -> Result<()> {
    let (est, names, inc) = match (&args.chi_dir, &args.input, args.k) {
        (Some(dir), _, _) => {
            let (est, names) = read_chi_dir(dir)?;
            (est, names, None)
        }
        (None, Some(input), Some(k)) => {
            let inc = read_increments(input)?;
            (chi_hat(&inc, k)?, inc.names().to_vec(), Some(inc))
        }
        _ => return Err(Error::validation("cli", "learn needs --input with --k, or --chi-dir")),
    };
    let k = est.k;
    let learned = learn_tree_from_chi(est)?;
    out_dir(&args.out)?;
    let dot = to_dot(
        &learned.tree,
        &[
            ("gamma_hat", &learned.gamma_hat),
            ("m_hat", &learned.m_hat),
            ("chi_hat", &learned.chi_hat),
        ],
    )?;
    fs::write(args.out.join("tree.dot"), dot)?;
    write_edge_csv(&learned.tree, &learned.gamma_hat, &learned.m_hat, create(&args.out.join("edges.csv"))?)?;
    let mut meta = metadata("learn", json!({"k": k, "seed": args.seed, "stability": args.stability}));
    meta["names"] = json!(names);
    meta["ambiguous"] = json!(learned.ambiguous);
    if let (Some(reps), Some(inc)) = (args.stability, inc.as_ref()) {
        let stab = subsample_stability(inc, k, reps, args.seed)?;
        write_stability_csv(&stab, create(&args.out.join("stability.csv"))?)?;
        meta["stability"] = json!({"subsample_size": stab.subsample_size, "k_subsample": stab.k_subsample});
    }
    write_json(&args.out.join("metadata.json"), &meta)
}

fn study(args: &StudyArgs) -> Result<()> {
    let mut cfg = StudyConfig::new(args.d, args.n_grid.clone(), args.q_grid.clone(), args.reps, args.seed);
    cfg.epsilon = args.eps;
    cfg.gamma_range = (args.gamma_min, args.gamma_max);
    let rows = recovery_study(&cfg)?;
    out_dir(&args.out)?;
    write_recovery_csv(&rows, create(&args.out.join("recovery.csv"))?)?;
    write_json(
        &args.out.join("metadata.json"),
        &metadata(
            "study",
            json!({
                "d": args.d, "n_grid": args.n_grid, "q_grid": args.q_grid, "reps": args.reps,
                "seed": args.seed, "eps": args.eps, "gamma_range": [args.gamma_min, args.gamma_max],
            }),
        ),
    )
}

fn zero_based(v: &[usize], flag: &str) -> Result<Vec<usize>> {
    v.iter()
        .map(|&i| {
            i.checked_sub(1)
                .ok_or_else(|| Error::validation("cli", format!("--{flag}: coordinates are 1-based")))
        })
        .collect()
}

/// Midpoints of a 4-per-axis grid in log|y| over the rectangle.
fn residual_points(rect: &Rectangle) -> Vec<Vec<f64>> {
    let d = rect.dim();
    let mut points = Vec::new();
    let mut idx = vec![0usize; d];
    loop {
        points.push(
            (0..d)
                .map(|i| {
                    let (lo, hi) = (rect.lower()[i], rect.upper()[i]);
                    let (a, b) = (lo.abs().ln(), hi.abs().ln());
                    let v = (a + (b - a) * (idx[i] as f64 + 0.5) / 4.0).exp();
                    if lo < 0.0 { -v } else { v }
                })
                .collect(),
        );
        let mut i = 0;
        while i < d {
            idx[i] += 1;
            if idx[i] < 4 {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
        if i == d {
            return points;
        }
    }
}

fn verify(args: &VerifyArgs) -> Result<()> {
    let config = load_config(&args.config)?;
    let model = config.to_model()?;
    let d = model.dim();
    let partition = Partition::new(d, zero_based(&args.a, "a")?, zero_based(&args.b, "b")?, zero_based(&args.c, "c")?)?;
    let rect = Rectangle::new(args.lower.clone(), args.upper.clone(), vec![args.resolution; args.lower.len()])?;
    let run = |density: &dyn LevyDensity| -> Result<Value> {
        let report = rectangle_ci_check(density, &rect, &partition, args.tolerance)?;
        let residual = factorization_residual(density, &partition, &residual_points(&rect))?;
        Ok(json!({
            "passed": report.passed,
            "violation": report.violation,
            "tolerance": report.tolerance,
            "mass": report.mass,
            "mass_error": report.mass_error,
            "factorization_residual": residual,
        }))
    };
    let report = match model.dependence() {
        Dependence::HuslerReiss(hr) => run(&SignedMeasure::new(hr.clone(), model.weights().clone())?)?,
        Dependence::EdgeWise(_) => run(&model.edge_spec()?)?,
    };
    let text = serde_json::to_string_pretty(&report)? + "\n";
    match &args.out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn couple(args: &CoupleArgs) -> Result<()> {
    let std = read_increments(&args.std)?;
    let obs = read_increments(&args.observed)?;
    if std.d() != obs.d() || std.n() != obs.n() {
        return Err(Error::validation(
            "cli",
            format!("couple: shapes differ ({}x{} vs {}x{})", std.n(), std.d(), obs.n(), obs.d()),
        ));
    }
    let columns = (0..std.d())
        .map(|j| rank_couple(&std.column(j), &obs.column(j)))
        .collect::<Result<Vec<_>>>()?;
    IncrementMatrix::from_columns(&columns)?
        .with_names(obs.names().to_vec())?
        .write_csv(create(&args.out)?)
}

fn ingest(args: &IngestArgs) -> Result<()> {
    ingest_prices(open(&args.prices)?)?.write_csv(create(&args.out)?)
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Estimate(a) => estimate(a),
        Command::Learn(a) => learn(a),
        Command::Study(a) => study(a),
        Command::Verify(a) => verify(a),
        Command::Couple(a) => couple(a),
        Command::Ingest(a) => ingest(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            log::warn!("cli: could not size the thread pool: {e}");
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
