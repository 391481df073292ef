use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use mixcurv::catalog::list_identities;
use mixcurv::error::GeomError;
use mixcurv::invariants::Reading;
use mixcurv::report::{run_check, RunConfig, DEFAULT_GRID, DEFAULT_TOL};
use mixcurv::scenario::{load_scenario_file, Scenario};
use mixcurv::zoo::{build_preset, parse_param_pairs, preset_doc, PRESETS};

const EXIT_RESIDUAL: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "mixcurv", version, about = "Check mixed-curvature identities and integral formulas on metric-affine scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate identities and the splitting analysis on a scenario.
    Check {
        /// Scenario file (JSON) or `preset:<name>`.
        #[arg(long)]
        scenario: String,
        /// Identity id or `all`.
        #[arg(long, default_value = "all")]
        identity: String,
        /// Nodes per chart axis.
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        /// Pass threshold for relative residuals and integrals.
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Preset parameter `k=v` (repeatable).
        #[arg(long = "param")]
        params: Vec<String>,
        /// Evaluate the formulas exactly as printed instead of the re-derived forms.
        #[arg(long)]
        literal: bool,
        /// Skip the splitting sweep.
        #[arg(long)]
        no_splitting: bool,
    },
    /// Print every identity id with its kind, hypotheses and anchor.
    ListIdentities,
    /// List presets or print the expanded document of one preset.
    Zoo {
        #[arg(long)]
        list: bool,
        #[arg(long)]
        preset: Option<String>,
        #[arg(long = "param")]
        params: Vec<String>,
    },
}

fn load(spec: &str, params: &[String]) -> Result<Scenario, GeomError> {
    match spec.strip_prefix("preset:") {
        Some(name) => build_preset(name, &parse_param_pairs(params)?),
        None => load_scenario_file(spec.as_ref()),
    }
}

fn config_error(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_CONFIG)
}

/// Write to stdout, treating a closed pipe (e.g. `| head`) as normal termination.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    if out.write_all(text.as_bytes()).and_then(|_| out.flush()).is_err() {
        std::process::exit(0);
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Check {
            scenario,
            identity,
            grid,
            tol,
            out,
            params,
            literal,
            no_splitting,
        } => {
            let scn = match load(&scenario, &params) {
                Ok(s) => s,
                Err(e) => return config_error(e),
            };
            let cfg = RunConfig {
                identity: Some(identity),
                grid,
                tol,
                reading: if literal { Reading::Literal } else { Reading::Resolved },
                splitting: !no_splitting,
            };
            let start = Instant::now();
            let report = match run_check(&scn, &cfg) {
                Ok(r) => r,
                Err(e) => return config_error(e),
            };
            emit(&format!("{}elapsed: {:.2?}\n", report.table(), start.elapsed()));
            if let Some(path) = out {
                if let Err(e) = std::fs::write(&path, report.to_json()) {
                    return config_error(format!("{}: {e}", path.display()));
                }
            }
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                for r in report.identities.iter().filter(|r| !r.status_ok()) {
                    eprintln!(
                        "{} failed: residual {:?}, integral {:?}, worst point {:?}",
                        r.id, r.max_relative_residual, r.integral_value, r.worst_point
                    );
                }
                ExitCode::from(EXIT_RESIDUAL)
            }
        }
        Command::ListIdentities => {
            let mut text = String::new();
            for d in list_identities() {
                let req: Vec<&str> = d.requires.iter().map(|p| p.name()).collect();
                text += &format!("{:<14} {:<18} [{}]\n", d.id, d.kind.to_string(), req.join(", "));
                text += &format!("    {} | \"{}\"\n", d.paper_anchor.citation, d.paper_anchor.quote);
            }
            emit(&text);
            ExitCode::SUCCESS
        }
        Command::Zoo { list, preset, params } => match (list, preset) {
            (_, Some(name)) => {
                let doc = match parse_param_pairs(&params).and_then(|p| preset_doc(&name, &p)) {
                    Ok(d) => d,
                    Err(e) => return config_error(e),
                };
                emit(&format!("{}\n", serde_json::to_string_pretty(&doc).expect("document serializes")));
                ExitCode::SUCCESS
            }
            _ => {
                let text: String = PRESETS.iter().map(|(name, summary)| format!("{name:<20} {summary}\n")).collect();
                emit(&text);
                ExitCode::SUCCESS
            }
        },
    }
}
