//! `porox`: solve, study and verify from the command line.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use porox::analysis::{run_cell, run_study, ConvergenceTable, Region};
use porox::config::{OneOrMany, RawConfig, RunConfig};
use porox::discretization::Shape;
use porox::hdg::HdgProblem;
use porox::mesh::build_structured_mesh;
use porox::output::{emit_fields, emit_table, format_error, format_rate};
use porox::verify::{run_verify, VerifyOptions};
use porox::Error;

#[derive(Parser)]
#[command(
    name = "porox",
    version,
    about = "HDG solver for degenerate two-phase mixtures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve every (k, n) pair, dump fields and write errors.csv.
    Solve(RunArgs),
    /// Run a convergence study and write one table per region.
    Study(RunArgs),
    /// Run the property suite.
    Verify {
        /// Fewer configurations and samples.
        #[arg(long)]
        quick: bool,
        /// Only the thread count is read from it.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Fault injection: flip the sign of τ.
        #[arg(long, hide = true)]
        flip_tau_sign: bool,
    },
}

/// Flags override keys of the config file.
#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    case: Option<String>,
    /// quad, tri or hex.
    #[arg(long)]
    shape: Option<String>,
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// upwind, generalized, 1/h or constant.
    #[arg(long)]
    tau: Option<String>,
    #[arg(long)]
    tau_value: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Samples per direction per element in field dumps.
    #[arg(long)]
    sampling: Option<usize>,
}

impl RunArgs {
    fn overrides(&self) -> porox::Result<RawConfig> {
        let shape = match self.shape.as_deref() {
            None => None,
            Some("quad") => Some(Shape::Quad),
            Some("tri") => Some(Shape::Tri),
            Some("hex") => Some(Shape::Hex),
            Some(s) => return Err(Error::Config(format!("unknown shape {s:?}"))),
        };
        Ok(RawConfig {
            case: self.case.clone(),
            shape,
            k: self.k.clone().map(OneOrMany::Many),
            n: self.n.clone().map(OneOrMany::Many),
            tau: self.tau.clone(),
            tau_value: self.tau_value,
            beta: self.beta,
            output: self.out.clone(),
            threads: self.threads,
            sampling: self.sampling,
            ..Default::default()
        })
    }

    fn load(&self) -> porox::Result<RunConfig> {
        let file = match &self.config {
            Some(path) => RawConfig::from_file(path)?,
            None => RawConfig::default(),
        };
        file.overridden_by(self.overrides()?).validate()
    }
}

/// `POROX_THREADS` wins over the config.
fn configure_threads(config: Option<usize>) -> porox::Result<()> {
    let env = match std::env::var("POROX_THREADS") {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .ok()
                .filter(|&t| t > 0)
                .ok_or_else(|| {
                    Error::Config(format!("POROX_THREADS={v:?} is not a thread count"))
                })?,
        ),
        Err(_) => None,
    };
    if let Some(t) = env.or(config) {
        // A pool built earlier in the process is kept.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }
    Ok(())
}

fn print_table(table: &ConvergenceTable) {
    for row in &table.rows {
        let cells = match &row.errors {
            Ok(errs) => table
                .fields
                .iter()
                .zip(errs.iter().zip(&row.rates))
                .map(|(f, (e, r))| {
                    format!("{}={} ({})", f.label(), format_error(*e), format_rate(*r))
                })
                .collect::<Vec<_>>()
                .join("  "),
            Err(msg) => format!("FAILED: {msg}"),
        };
        println!("k={} n={} h={:.6}  {}", row.k, row.n, row.h, cells);
    }
}

fn solve(args: &RunArgs) -> porox::Result<()> {
    let cfg = args.load()?;
    configure_threads(cfg.threads)?;
    precheck(&cfg)?;
    std::fs::create_dir_all(&cfg.output)?;
    let region = cfg.regions.first().cloned().unwrap_or(Region::All);
    let spec = cfg.study(&region);
    let mut table = ConvergenceTable::new(&cfg.case.name, &cfg.fields);
    for &k in &cfg.ks {
        for &n in &cfg.ns {
            let mesh = build_structured_mesh(&cfg.case.domain, cfg.shape, n)?;
            let sol = HdgProblem::new(&mesh, &cfg.case, k, cfg.options.clone())?.solve()?;
            let path = cfg.output.join(format!("fields_k{k}_n{n}.csv"));
            emit_fields(&mesh, &cfg.case, &sol, cfg.sampling, &path)?;
            table.push(k, n, mesh.side_length(), Ok(run_cell(&spec, k, &mesh)?));
        }
    }
    emit_table(&table, &cfg.output.join("errors.csv"))?;
    print_table(&table);
    Ok(())
}

/// Rejects requests that cannot be solved before any computation starts.
fn precheck(cfg: &RunConfig) -> porox::Result<()> {
    for &n in &cfg.ns {
        let mesh = build_structured_mesh(&cfg.case.domain, cfg.shape, n)?;
        for region in &cfg.regions {
            region.elements(&mesh)?;
        }
        for &k in &cfg.ks {
            HdgProblem::new(&mesh, &cfg.case, k, cfg.options.clone())?;
        }
    }
    Ok(())
}

/// Returns false when some row failed.
fn study(args: &RunArgs) -> porox::Result<bool> {
    let cfg = args.load()?;
    configure_threads(cfg.threads)?;
    precheck(&cfg)?;
    std::fs::create_dir_all(&cfg.output)?;
    let mut all_ok = true;
    for (i, region) in cfg.regions.iter().enumerate() {
        let table = run_study(&cfg.study(region))?;
        let name = if cfg.regions.len() == 1 {
            format!("{}.csv", cfg.case.name)
        } else {
            format!("{}_r{i}.csv", cfg.case.name)
        };
        let path = cfg.output.join(name);
        emit_table(&table, &path)?;
        println!("region {region}: {}", path.display());
        print_table(&table);
        all_ok &= table.rows.iter().all(|r| r.errors.is_ok());
    }
    Ok(all_ok)
}

fn verify(quick: bool, config: Option<&Path>, flip_tau_sign: bool) -> porox::Result<bool> {
    let threads = match config {
        Some(path) => RawConfig::from_file(path)?.validate()?.threads,
        None => None,
    };
    configure_threads(threads)?;
    let results = run_verify(VerifyOptions {
        quick,
        flip_tau_sign,
    });
    for r in &results {
        println!(
            "{} {}: {:.3e} (threshold {:.0e})",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.value,
            r.threshold
        );
    }
    Ok(results.iter().all(|r| r.passed))
}

fn exit_for(err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    if err.is_validation() {
        ExitCode::from(1)
    } else {
        ExitCode::from(2)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(args) => solve(args).map(|_| true),
        Command::Study(args) => study(args),
        Command::Verify {
            quick,
            config,
            flip_tau_sign,
        } => verify(*quick, config.as_deref(), *flip_tau_sign),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => exit_for(&e),
    }
}
