//! `redcbc`: construct generating vectors, reproduce error tables, verify
//! emitted vectors.

mod config;
mod run;
mod vector_file;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use redcbc::{CbcError, GeneratingVector, LatticeKind, ReductionSchedule, SpaceParams};
use serde::Serialize;

use config::{Algorithm, Mode, RunConfig};
use run::{bound_checks, exact_error, run_cell, BoundCheck, CellResult, CostReport, Counters};
use vector_file::VectorFile;

/// Relative tolerance for a recomputed squared error during `verify`.
const VERIFY_RELATIVE: f64 = 1e-10;

#[derive(Debug)]
pub enum Failure {
    Mismatch(String),
    Config(String),
    Capacity(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Mismatch(_) => 1,
            Failure::Config(_) => 2,
            Failure::Capacity(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Mismatch(m) => write!(f, "verification failed: {m}"),
            Failure::Config(m) => write!(f, "invalid input: {m}"),
            Failure::Capacity(m) => write!(f, "{m}"),
        }
    }
}

impl From<CbcError> for Failure {
    fn from(e: CbcError) -> Self {
        match e {
            CbcError::Capacity(_) => Failure::Capacity(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Config(format!("{}: {e}", path.display()))
}

#[derive(Parser)]
#[command(name = "redcbc", version, about = "Reduced fast CBC constructions of lattice rules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the configured algorithm.
    #[arg(long, value_enum)]
    algorithm: Option<Algorithm>,
    /// Overrides the configured mode.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Worker threads for grid cells.
    #[arg(long, env = "REDCBC_JOBS")]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Build one generating vector and write the vector file and report.
    Construct(Common),
    /// Run the m × s grid and write a CSV table.
    Table(Common),
    /// Recompute the error and bounds of a vector file.
    Verify {
        /// Vector file written by `construct`.
        vector: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

impl Common {
    fn load(&self) -> Result<RunConfig, Failure> {
        let mut config = RunConfig::load(&self.config)?;
        if let Some(a) = self.algorithm {
            config.algorithm = a;
        }
        if let Some(m) = self.mode {
            config.mode = m;
            config.validate()?;
        }
        Ok(config)
    }
}

#[derive(Serialize)]
struct Report {
    mode: String,
    base: u64,
    m: u32,
    alpha: f64,
    s: usize,
    algorithm: String,
    weights: String,
    reduction: Vec<u32>,
    components: Vec<u64>,
    squared_error: f64,
    log10_error: f64,
    trace: Vec<f64>,
    bounds: Vec<BoundCheck>,
    cost_model: CostReport,
    counters: Counters,
    seconds: f64,
    hardware_dependent: bool,
}

fn vector_file(config: &RunConfig, cell: &CellResult) -> VectorFile {
    VectorFile {
        mode: config.mode,
        base: config.base,
        m: cell.m,
        alpha: config.alpha,
        weights: config.weights.describe(cell.s),
        squared_error: cell.squared_error,
        reduction: cell.vector.reduction.clone(),
        components: cell.vector.components.clone(),
        effective: cell.vector.effective.clone(),
    }
}

fn construct(common: &Common) -> Result<(), Failure> {
    let config = common.load()?;
    let (m, s) = config.single_cell()?;
    let cell = run_cell(&config, m, s)?;
    fs::create_dir_all(&common.out).map_err(|e| io_failure(&common.out, e))?;
    let vector_path = common.out.join(&config.vector_file);
    fs::write(&vector_path, vector_file(&config, &cell).render())
        .map_err(|e| io_failure(&vector_path, e))?;
    let report = Report {
        mode: config.mode.to_string(),
        base: config.base,
        m,
        alpha: config.alpha,
        s,
        algorithm: config.algorithm.to_string(),
        weights: config.weights.describe(s),
        reduction: cell.vector.reduction.clone(),
        components: cell.vector.components.clone(),
        squared_error: cell.squared_error,
        log10_error: cell.log10_error(),
        trace: cell.vector.trace.clone(),
        bounds: cell.bounds.clone(),
        cost_model: cell.cost.into(),
        counters: Counters {
            candidate_evaluations: cell.counters.candidate_evaluations,
            multiply_adds: cell.counters.multiply_adds,
        },
        seconds: cell.seconds,
        hardware_dependent: true,
    };
    let report_path = common.out.join(&config.report_file);
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    fs::write(&report_path, json + "\n").map_err(|e| io_failure(&report_path, e))?;
    println!(
        "m={m} s={s} log10_error={:.4} squared_error={:e}",
        cell.log10_error(),
        cell.squared_error
    );
    for b in &cell.bounds {
        if !b.holds {
            eprintln!("warning: bound at lambda={} not satisfied", b.lambda);
        }
    }
    Ok(())
}

fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = jobs {
        if k == 0 {
            return Err(Failure::Config("--jobs must be positive".into()));
        }
        builder = builder.num_threads(k);
    }
    builder
        .build()
        .map_err(|e| Failure::Config(format!("thread pool: {e}")))
}

fn table(common: &Common) -> Result<(), Failure> {
    use rayon::prelude::*;

    let config = common.load()?;
    let cells: Vec<(u32, usize)> = config
        .m_list
        .iter()
        .flat_map(|&m| config.s_list.iter().map(move |&s| (m, s)))
        .collect();
    let pool = thread_pool(common.jobs)?;
    let mut results = pool.install(|| {
        cells
            .par_iter()
            .map(|&(m, s)| run_cell(&config, m, s))
            .collect::<Result<Vec<_>, _>>()
    })?;
    results.sort_by_key(|c| (c.m, c.s));

    fs::create_dir_all(&common.out).map_err(|e| io_failure(&common.out, e))?;
    let path = common.out.join(&config.table_file);
    let mut writer = csv::Writer::from_path(&path)
        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let csv_err = |e: csv::Error| Failure::Config(format!("{}: {e}", path.display()));
    writer
        .write_record([
            "mode",
            "b",
            "alpha",
            "m",
            "s",
            "algorithm",
            "log10_error",
            "seconds",
            "candidate_evals",
            "predicted_cost",
        ])
        .map_err(csv_err)?;
    for cell in &results {
        writer
            .write_record([
                config.mode.to_string(),
                config.base.to_string(),
                config.alpha.to_string(),
                cell.m.to_string(),
                cell.s.to_string(),
                config.algorithm.to_string(),
                format!("{:.6}", cell.log10_error()),
                format!("{:.6}", cell.seconds),
                cell.counters.candidate_evaluations.to_string(),
                cell.cost.predicted.to_string(),
            ])
            .map_err(csv_err)?;
    }
    writer.flush().map_err(|e| io_failure(&path, e))?;
    println!("{} rows written to {}", results.len(), path.display());
    Ok(())
}

fn verify(path: &Path, common: &Common) -> Result<(), Failure> {
    let config = common.load()?;
    let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    let file = VectorFile::parse(&text)?;
    let mismatch = |what: String| Err(Failure::Mismatch(what));

    if file.mode != config.mode {
        return mismatch(format!("mode {} but config has {}", file.mode, config.mode));
    }
    if file.base != config.base {
        return mismatch(format!("base {} but config has {}", file.base, config.base));
    }
    if file.alpha != config.alpha {
        return mismatch(format!("alpha {} but config has {}", file.alpha, config.alpha));
    }
    let s = file.components.len();
    let params = SpaceParams::new(file.base, file.m, file.alpha)?;
    let schedule = ReductionSchedule::new(file.reduction.clone(), &params)?;
    let expected = ReductionSchedule::from_spec(&config.reduction, s, &params)?;
    if let Some(j) = (0..s).find(|&j| schedule.w(j) != expected.w(j)) {
        return mismatch(format!(
            "w_{} = {} but the configured rule gives {}",
            j + 1,
            schedule.w(j),
            expected.w(j)
        ));
    }
    let described = config.weights.describe(s);
    if file.weights != described {
        return mismatch(format!("weights '{}' but config gives '{described}'", file.weights));
    }
    let weights = config.weights.weights(s)?;
    let kind = match file.mode {
        Mode::Korobov => LatticeKind::Rank1,
        Mode::Polynomial => LatticeKind::Polynomial,
    };
    let vector = match GeneratingVector::from_components(kind, &schedule, file.components.clone()) {
        Ok(v) => v,
        Err(CbcError::Capacity(m)) => return Err(Failure::Capacity(m)),
        Err(e) => return mismatch(e.to_string()),
    };
    if let Some(j) = (0..s).find(|&j| vector.effective[j] != file.effective[j]) {
        return mismatch(format!(
            "effective_{} = {} but Y_j z_j mod N = {}",
            j + 1,
            file.effective[j],
            vector.effective[j]
        ));
    }
    let e2 = exact_error(file.mode, &params, &weights, &vector)?;
    let rel = (e2 - file.squared_error).abs() / e2.abs().max(f64::MIN_POSITIVE);
    if !(rel <= VERIFY_RELATIVE) {
        return mismatch(format!(
            "squared_error recorded {:e}, recomputed {e2:e} (relative gap {rel:.3e})",
            file.squared_error
        ));
    }
    let bounds = bound_checks(file.mode, &params, &weights, &schedule, s, &config.lambdas, e2)?;
    if let Some(b) = bounds.iter().find(|b| !b.holds) {
        return mismatch(format!(
            "squared_error {e2:e} exceeds the bound {:e} at lambda = {}",
            b.bound, b.lambda
        ));
    }
    println!(
        "ok: s={s} squared_error={e2:e} relative gap {rel:.3e}, {} bounds hold",
        bounds.len()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Construct(common) => construct(common),
        Command::Table(common) => table(common),
        Command::Verify { vector, common } => verify(vector, common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("redcbc: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
