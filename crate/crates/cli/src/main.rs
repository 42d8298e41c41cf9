use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cylsim_core::asymptotics::sigma_sq;
use cylsim_core::mc::CSV_COLUMNS;
use cylsim_core::{Error, ExperimentConfig, ExperimentRecord, SCHEMA_VERSION};
use serde_json::json;

const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (schema ", "1", ")");

#[derive(Parser)]
#[command(name = "cylsim", version = VERSION, about = "Cylinder-process simulation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the theoretical constants of a configuration as JSON.
    Constants(Common),
    /// Run the configured experiment.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Estimate the second cumulant mass of the ground process.
    Gamma2(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    /// Replaces the scale grid; comma-separated or repeated.
    #[arg(long, value_delimiter = ',')]
    rho: Vec<f64>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

enum Failure {
    Config(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Quadrature { .. } | Error::ConstantMismatch { .. } => Failure::Numerical(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}

fn load(common: &Common) -> Result<ExperimentConfig, Failure> {
    let text = fs::read_to_string(&common.config)
        .map_err(|e| Failure::Config(format!("cannot read config `{}`: {e}", common.config.display())))?;
    let mut config = ExperimentConfig::from_json_str(&text)?;
    if let Some(s) = common.seed {
        config.master_seed = s;
    }
    if let Some(r) = common.reps {
        config.reps = r;
    }
    if !common.rho.is_empty() {
        config.rho_grid = common.rho.clone();
    }
    if common.threads.is_some() {
        config.threads = common.threads;
    }
    config.validate()?;
    Ok(config)
}

fn dispatch(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Constants(common) => constants(&load(&common)?),
        Command::Gamma2(common) => gamma2(&load(&common)?),
        Command::Run { common, out, format } => run(&load(&common)?, &out, format),
    }
}

fn constants(config: &ExperimentConfig) -> Result<(), Failure> {
    let m = config.validate()?;
    let v = sigma_sq(&m.ground, &m.radius, &m.orientation, &m.window, &m.quad)?;
    let doc = json!({
        "C1": v.c1,
        "C2": v.c2,
        "sigma_sq": v.sigma_sq,
        "term1": v.term1,
        "term2": v.term2,
        "lln_limit": v.lln_limit,
        "lambda": v.lambda,
        "gamma2": v.gamma2,
        "m1": v.m1,
        "m2": v.m2,
        "quad_error": v.quad_error,
        "converged": v.converged,
    });
    println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
    if !v.converged {
        return Err(Failure::Numerical(format!(
            "constants did not reach the requested tolerance (error {:.3e})",
            v.quad_error
        )));
    }
    Ok(())
}

fn gamma2(config: &ExperimentConfig) -> Result<(), Failure> {
    let m = config.validate()?;
    let w = config
        .gamma2
        .half_length
        .unwrap_or_else(|| m.ground.default_gamma2_half_length());
    let est = m.ground.estimate_gamma2(w, config.gamma2.reps, config.master_seed)?;
    let analytic = m.ground.gamma2_total();
    let doc = json!({
        "gamma2_total": analytic,
        "estimate": est.estimate,
        "stderr": est.stderr,
        "z": (est.estimate - analytic) / est.stderr,
        "mean_count": est.mean_count,
        "half_length": est.half_length,
        "reps": est.reps,
        "underpowered": est.underpowered,
        "seed": config.master_seed,
    });
    println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
    if est.underpowered {
        eprintln!("warning: fewer than 100 replicates; the estimate is underpowered");
    }
    Ok(())
}

fn render(config: &ExperimentConfig, records: &[ExperimentRecord], format: Format) -> String {
    match format {
        Format::Csv => {
            let mut s = format!("# schema: {SCHEMA_VERSION}\n# config: {}\n{}\n", config.to_json(), CSV_COLUMNS.join(","));
            for r in records {
                s.push_str(&r.csv_row());
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "config": config,
                "records": records,
            });
            serde_json::to_string_pretty(&doc).expect("json") + "\n"
        }
    }
}

/// Writes through a sibling temporary file and a rename.
fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

fn run(config: &ExperimentConfig, out: &Path, format: Format) -> Result<(), Failure> {
    if config.mode == cylsim_core::Mode::Variance && config.reps < 1000 {
        eprintln!("warning: variance mode with fewer than 1000 replicates");
    }
    let mut done: Vec<ExperimentRecord> = Vec::new();
    let mut io_err = None;
    let records = cylsim_core::run(config, |rec| {
        done.push(rec.clone());
        eprintln!(
            "{} rho={} reps={} estimate vs target: z = {:.2} ({} ms)",
            rec.mode.as_str(),
            rec.rho,
            rec.reps,
            rec.z_score(),
            rec.wall_ms
        );
        if let Err(e) = write_atomic(out, &render(config, &done, format)) {
            io_err.get_or_insert(e);
        }
    })?;
    if let Some(e) = io_err {
        return Err(Failure::Config(format!("cannot write `{}`: {e}", out.display())));
    }
    write_atomic(out, &render(config, &records, format))
        .map_err(|e| Failure::Config(format!("cannot write `{}`: {e}", out.display())))?;
    if let Some(r) = records.iter().find(|r| !r.converged) {
        return Err(Failure::Numerical(format!(
            "area quadrature hit its cap at rho = {} (achieved error {:.3e})",
            r.rho, r.quad_err_max
        )));
    }
    Ok(())
}
