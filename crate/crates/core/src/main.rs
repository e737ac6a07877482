//! Command-line front end: configuration-driven forward solves, inversions,
//! round trips, coefficient-table dumps, diagnostics, and the self test.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use retroheat::error::{Error, Result};
use retroheat::field::{Grid, SampledField};
use retroheat::scenario::{
    basis_tables, run_diagnose, run_forward_only, run_invert_only, run_scenario, write_coeff_csv,
    ScenarioConfig, ScenarioOutcome,
};

#[derive(Parser)]
#[command(
    name = "retroheat",
    version,
    about = "Backward-in-time reconstruction for diffusion-type equations on layered media"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunOpts {
    /// Scenario configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: config's output.dir, else the current
    /// directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the noise seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress the stdout summary.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the forward solver only and emit the observed field.
    Forward(RunOpts),
    /// Invert a provided field file under the configured medium and method.
    Invert {
        #[command(flatten)]
        opts: RunOpts,
        /// CSV field file (columns x,value — or a result.csv, whose u_tau
        /// column is used).
        #[arg(long)]
        field: PathBuf,
    },
    /// Full pipeline: synthesize, forward-solve, add noise, invert, report.
    Roundtrip(RunOpts),
    /// Dump H_jn and x_n^k coefficient tables for the configured medium.
    Basis {
        #[command(flatten)]
        opts: RunOpts,
        /// Highest basis index to dump.
        #[arg(long, default_value_t = 8)]
        order: usize,
    },
    /// Completeness-defect and influence-kernel diagnostics.
    Diagnose(RunOpts),
    /// Run the built-in acceptance criteria; nonzero exit on failure.
    Selftest {
        #[arg(long)]
        quiet: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(opts: &RunOpts) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(&opts.config)?;
    let mut config = ScenarioConfig::from_json(&text)?;
    if let Some(seed) = opts.seed {
        config.noise.seed = seed;
    }
    Ok(config)
}

fn out_dir(opts: &RunOpts, config: &ScenarioConfig) -> Result<PathBuf> {
    let dir = opts
        .out
        .clone()
        .or_else(|| config.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_outcome(outcome: &ScenarioOutcome, dir: &Path, quiet: bool) -> Result<()> {
    let csv = dir.join("result.csv");
    let json = dir.join("report.json");
    outcome.write_result_csv(&csv)?;
    outcome.write_report_json(&json)?;
    if !quiet {
        let m = &outcome.report.metrics;
        println!(
            "rel_l2 = {:.6e}  max_abs = {:.6e}  (interior: {:.6e} / {:.6e})",
            m.rel_l2, m.max_abs, m.rel_l2_interior, m.max_abs_interior
        );
        if outcome.report.diagnostics.decay_warning {
            println!("warning: observed field does not decay at the grid ends");
        }
        if let Some(cond) = outcome.report.diagnostics.condition {
            println!("fit condition estimate: {cond:.3e}");
        }
        for note in &outcome.report.diagnostics.notes {
            println!("note: {note}");
        }
        println!("wrote {} and {}", csv.display(), json.display());
    }
    Ok(())
}

fn load_field_csv(path: &Path) -> Result<SampledField> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidArgument("empty field file".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let x_idx = cols
        .iter()
        .position(|c| *c == "x")
        .ok_or_else(|| Error::InvalidArgument("field file needs an x column".into()))?;
    let v_idx = cols
        .iter()
        .position(|c| *c == "value")
        .or_else(|| cols.iter().position(|c| *c == "u_tau"))
        .ok_or_else(|| {
            Error::InvalidArgument("field file needs a value or u_tau column".into())
        })?;
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (ln, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        let parse = |idx: usize| -> Result<f64> {
            parts
                .get(idx)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| {
                    Error::InvalidArgument(format!("bad number at line {}", ln + 2))
                })
        };
        xs.push(parse(x_idx)?);
        vs.push(parse(v_idx)?);
    }
    if xs.len() < 2 {
        return Err(Error::InvalidArgument("field file too short".into()));
    }
    let dx = xs[1] - xs[0];
    for w in xs.windows(2) {
        if ((w[1] - w[0]) - dx).abs() > 1e-9 * dx.abs().max(1e-12) {
            return Err(Error::InvalidArgument(
                "field file grid is not uniform".into(),
            ));
        }
    }
    SampledField::new(
        Grid {
            x0: xs[0],
            dx,
            n: xs.len(),
        },
        vs,
        0.0,
    )
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Roundtrip(opts) => {
            let config = load_config(&opts)?;
            let outcome = run_scenario(&config)?;
            let dir = out_dir(&opts, &config)?;
            write_outcome(&outcome, &dir, opts.quiet)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Forward(opts) => {
            let config = load_config(&opts)?;
            let outcome = run_forward_only(&config)?;
            let dir = out_dir(&opts, &config)?;
            write_outcome(&outcome, &dir, opts.quiet)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Invert { opts, field } => {
            let config = load_config(&opts)?;
            let observed = load_field_csv(&field)?;
            let outcome = run_invert_only(&config, observed)?;
            let dir = out_dir(&opts, &config)?;
            write_outcome(&outcome, &dir, opts.quiet)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Basis { opts, order } => {
            let config = load_config(&opts)?;
            let (basis_rows, mono_rows) = basis_tables(&config, order)?;
            let dir = out_dir(&opts, &config)?;
            let basis_path = dir.join("basis.csv");
            let mono_path = dir.join("monomials.csv");
            write_coeff_csv(&basis_rows, &basis_path)?;
            write_coeff_csv(&mono_rows, &mono_path)?;
            if !opts.quiet {
                println!("wrote {} and {}", basis_path.display(), mono_path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Diagnose(opts) => {
            let config = load_config(&opts)?;
            let report = run_diagnose(&config)?;
            let dir = out_dir(&opts, &config)?;
            let path = dir.join("diagnose.json");
            std::fs::write(&path, serde_json::to_string_pretty(&report)?)?;
            if !opts.quiet {
                for e in &report.defect.entries {
                    println!(
                        "x = {:+.3} (layer {}): diagonal mass {:.6}, ghost mass {:.6}",
                        e.x, e.layer, e.diagonal_mass, e.ghost_mass
                    );
                }
                println!(
                    "transform mismatch flagged: {}; influence vs FD column: {:.3e}",
                    report.defect.mismatch, report.influence_vs_fd
                );
                println!("wrote {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest { quiet } => {
            let results = retroheat::selftest::run_all();
            let mut failed = 0;
            for c in &results {
                if !quiet {
                    println!("{}", c.line());
                }
                if !c.passed {
                    failed += 1;
                }
            }
            if failed > 0 {
                eprintln!("{failed} criteria failed");
                Ok(ExitCode::FAILURE)
            } else {
                if !quiet {
                    println!("all {} criteria passed", results.len());
                }
                Ok(ExitCode::SUCCESS)
            }
        }
    }
}
