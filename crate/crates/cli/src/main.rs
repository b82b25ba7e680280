//! Command-line front end: evolve states, emit observable traces, and verify
//! the closed-form operators against the spectral oracle.
//!
//! Exit codes: 0 success, 1 residual over tolerance, 2 usage or schema
//! error, 3 resonance violation (closed-form path requested with Δ ≠ ω).
//! `TC_EVOLVE_THREADS` caps the worker count for grid commands.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use tc_core::closedform::evolve_closed;
use tc_core::model::ModelParams;
use tc_core::oracle::{compare_closed_oracle, evolve_oracle, identity_report, CheckRecord};
use tc_core::state::{JointState, StateRecord};
use tc_core::{Error as CoreError, JointState64};

const EXIT_TOLERANCE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_RESONANCE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "tc-evolve",
    version,
    about = "Tavis-Cummings evolution for 1-3 atoms: closed forms, spectral oracle, and their cross-checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    /// explicit closed-form operators (requires Δ = ω)
    Closed,
    /// sector eigendecomposition (any detuning)
    Oracle,
    /// run both and report their deviation
    Both,
}

#[derive(Args)]
struct ParamArgs {
    /// Number of atoms (1, 2, or 3)
    #[arg(long = "n-atoms")]
    n_atoms: usize,
    /// Field angular frequency ω
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    /// Two-level splitting Δ
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Atom-field coupling g
    #[arg(long, default_value_t = 1.0)]
    g: f64,
}

impl ParamArgs {
    fn build(&self) -> Result<ModelParams<f64>, CliError> {
        Ok(ModelParams::new(
            self.n_atoms,
            self.omega,
            self.delta,
            self.g,
        )?)
    }
}

#[derive(Args)]
struct GridArgs {
    /// Start of the time grid
    #[arg(long = "t-start", default_value_t = 0.0)]
    t_start: f64,
    /// End of the time grid
    #[arg(long = "t-end", default_value_t = 10.0)]
    t_end: f64,
    /// Number of grid points (endpoints included)
    #[arg(long, default_value_t = 21)]
    steps: usize,
}

impl GridArgs {
    fn points(&self) -> Result<Vec<f64>, CliError> {
        if self.steps < 1 {
            return Err(CliError::usage("steps must be at least 1"));
        }
        if self.t_end < self.t_start {
            return Err(CliError::usage("t-end must not precede t-start"));
        }
        if self.steps == 1 {
            return Ok(vec![self.t_start]);
        }
        let span = self.t_end - self.t_start;
        Ok((0..self.steps)
            .map(|i| self.t_start + span * i as f64 / (self.steps - 1) as f64)
            .collect())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a JSON state to time t and write the result as JSON
    Evolve {
        #[command(flatten)]
        params: ParamArgs,
        /// Evolution time
        #[arg(long)]
        t: f64,
        /// Input state file (JSON array of {atoms, photons, re, im})
        #[arg(long)]
        state: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Closed)]
        method: Method,
        /// Output state file
        #[arg(long)]
        out: PathBuf,
    },
    /// Evolve over a time grid and write observables as CSV
    Trace {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        state: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Closed)]
        method: Method,
        /// Output CSV file
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare closed-form and oracle sector unitaries; write JSON records
    Compare {
        #[command(flatten)]
        params: ParamArgs,
        /// Single comparison time (otherwise the time grid is used)
        #[arg(long)]
        t: Option<f64>,
        #[command(flatten)]
        grid: GridArgs,
        /// Largest excitation sector to test
        #[arg(long = "k-max", default_value_t = 12)]
        k_max: u32,
        /// Residual gate for the exit code
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
        /// Output file (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Residuals of the operator identities behind the closed forms (JSON)
    Identities {
        /// Number of atoms (1, 2, or 3)
        #[arg(long = "n-atoms")]
        n_atoms: usize,
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-vs-oracle deviation over the full (t, K) grid; write CSV
    Sweep {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long = "k-max", default_value_t = 12)]
        k_max: u32,
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dump the ordered basis of one excitation sector (JSON, for debugging)
    Sectors {
        /// Number of atoms (1, 2, or 3)
        #[arg(long = "n-atoms")]
        n_atoms: usize,
        /// Excitation number of the sector
        #[arg(long)]
        k: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// CLI failure with its process exit code.
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let code = match e {
            CoreError::NotResonant => EXIT_RESONANCE,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::usage(format!("i/o error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::usage(format!("schema error: {e}"))
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("tc-evolve: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

/// 17-significant-digit scientific notation, fixed across platforms.
fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var("TC_EVOLVE_THREADS") {
        let n: usize = raw.parse().map_err(|_| {
            CliError::usage(format!("TC_EVOLVE_THREADS={raw} is not a thread count"))
        })?;
        if n == 0 {
            return Err(CliError::usage("TC_EVOLVE_THREADS must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::usage(format!("thread pool: {e}")))
}

fn read_state(path: &Path, n_atoms: usize) -> Result<JointState64, CliError> {
    let raw = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let records: Vec<StateRecord> = serde_json::from_str(&raw)?;
    Ok(JointState::from_records(n_atoms, &records)?)
}

fn write_state(path: &Path, state: &JointState64) -> Result<(), CliError> {
    let mut out = serde_json::to_string_pretty(&state.to_records())?;
    out.push('\n');
    fs::write(path, out)?;
    Ok(())
}

fn write_or_print(path: Option<&PathBuf>, payload: &str) -> Result<(), CliError> {
    match path {
        Some(p) => {
            fs::write(p, payload)?;
        }
        None => {
            print!("{payload}");
            std::io::stdout().flush()?;
        }
    }
    Ok(())
}

fn evolve_with(
    method: Method,
    params: &ModelParams<f64>,
    t: f64,
    state: &JointState64,
) -> Result<(JointState64, Option<f64>), CliError> {
    match method {
        Method::Closed => Ok((evolve_closed(params, t, state)?, None)),
        Method::Oracle => Ok((evolve_oracle(params, t, state)?, None)),
        Method::Both => {
            let closed = evolve_closed(params, t, state)?;
            let oracle = evolve_oracle(params, t, state)?;
            let dev = closed.max_deviation(&oracle);
            Ok((closed, Some(dev)))
        }
    }
}

#[derive(Serialize)]
struct DeviationOut {
    max_deviation: f64,
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Evolve {
            params,
            t,
            state,
            method,
            out,
        } => {
            let params = params.build()?;
            let input = read_state(&state, params.n_atoms())?;
            let (result, deviation) = evolve_with(method, &params, t, &input)?;
            write_state(&out, &result)?;
            if let Some(dev) = deviation {
                println!(
                    "{}",
                    serde_json::to_string(&DeviationOut { max_deviation: dev })?
                );
            }
            Ok(0)
        }

        Command::Trace {
            params,
            grid,
            state,
            method,
            out,
        } => {
            let params = params.build()?;
            let input = read_state(&state, params.n_atoms())?;
            let points = grid.points()?;
            // fail fast on the resonance contract before spawning workers
            if method != Method::Oracle && !params.resonant() {
                return Err(CoreError::NotResonant.into());
            }
            let pool = thread_pool()?;
            let rows: Result<Vec<String>, CliError> = pool.install(|| {
                points
                    .par_iter()
                    .map(|&t| {
                        let (evolved, deviation) = evolve_with(method, &params, t, &input)?;
                        let mut cells = vec![fmt17(t)];
                        for atom in 0..params.n_atoms() {
                            cells.push(fmt17(evolved.p_excited(atom)));
                        }
                        cells.push(fmt17(evolved.mean_photons()));
                        cells.push(fmt17(evolved.norm()));
                        if let Some(dev) = deviation {
                            cells.push(fmt17(dev));
                        }
                        Ok(cells.join(","))
                    })
                    .collect()
            });
            let rows = rows?;
            let mut header: Vec<String> = vec!["t".into()];
            for atom in 1..=params.n_atoms() {
                header.push(format!("p_excited_{atom}"));
            }
            header.push("mean_photons".into());
            header.push("norm".into());
            if method == Method::Both {
                header.push("deviation".into());
            }
            let mut csv = header.join(",");
            csv.push('\n');
            for row in rows {
                csv.push_str(&row);
                csv.push('\n');
            }
            fs::write(&out, csv)?;
            Ok(0)
        }

        Command::Compare {
            params,
            t,
            grid,
            k_max,
            tolerance,
            out,
        } => {
            let params = params.build()?;
            if !params.resonant() {
                return Err(CoreError::NotResonant.into());
            }
            let times = match t {
                Some(single) => vec![single],
                None => grid.points()?,
            };
            let pool = thread_pool()?;
            let residuals: Result<Vec<f64>, CliError> = pool.install(|| {
                (0..=k_max)
                    .into_par_iter()
                    .map(|k| {
                        let mut worst: f64 = 0.0;
                        for &time in &times {
                            worst = worst.max(compare_closed_oracle(&params, time, k)?);
                        }
                        Ok(worst)
                    })
                    .collect()
            });
            let records: Vec<CheckRecord> = residuals?
                .into_iter()
                .enumerate()
                .map(|(k, residual)| CheckRecord {
                    check: "closed_vs_oracle".into(),
                    n: params.n_atoms(),
                    k: Some(k as u32),
                    residual,
                })
                .collect();
            let mut payload = serde_json::to_string_pretty(&records)?;
            payload.push('\n');
            write_or_print(out.as_ref(), &payload)?;
            let ok = records.iter().all(|r| r.residual <= tolerance);
            Ok(if ok { 0 } else { EXIT_TOLERANCE })
        }

        Command::Identities {
            n_atoms,
            tolerance,
            out,
        } => {
            let report = identity_report::<f64>(n_atoms)?;
            let records = report.to_records();
            let mut payload = serde_json::to_string_pretty(&records)?;
            payload.push('\n');
            write_or_print(out.as_ref(), &payload)?;
            let ok = records.iter().all(|r| r.residual <= tolerance);
            Ok(if ok { 0 } else { EXIT_TOLERANCE })
        }

        Command::Sweep {
            params,
            grid,
            k_max,
            tolerance,
            out,
        } => {
            let params = params.build()?;
            if !params.resonant() {
                return Err(CoreError::NotResonant.into());
            }
            let times = grid.points()?;
            let jobs: Vec<(u32, f64)> = (0..=k_max)
                .flat_map(|k| times.iter().map(move |&t| (k, t)))
                .collect();
            let pool = thread_pool()?;
            let devs: Result<Vec<f64>, CliError> = pool.install(|| {
                jobs.par_iter()
                    .map(|&(k, time)| Ok(compare_closed_oracle(&params, time, k)?))
                    .collect()
            });
            let devs = devs?;
            let mut csv = String::from("K,t,deviation\n");
            let mut worst: f64 = 0.0;
            for (&(k, time), &dev) in jobs.iter().zip(&devs) {
                worst = worst.max(dev);
                csv.push_str(&format!("{k},{},{}\n", fmt17(time), fmt17(dev)));
            }
            fs::write(&out, csv)?;
            println!(
                "{}",
                serde_json::to_string(&DeviationOut {
                    max_deviation: worst
                })?
            );
            Ok(if worst <= tolerance {
                0
            } else {
                EXIT_TOLERANCE
            })
        }

        Command::Sectors { n_atoms, k, out } => {
            let sector = tc_core::model::sector_basis(n_atoms, k)?;
            #[derive(Serialize)]
            struct SectorLabel<'a> {
                atoms: &'a str,
                photons: u32,
            }
            let labels: Vec<SectorLabel> = sector
                .basis()
                .iter()
                .map(|l| SectorLabel {
                    atoms: l.atoms(),
                    photons: l.photons(),
                })
                .collect();
            let mut payload = serde_json::to_string_pretty(&labels)?;
            payload.push('\n');
            write_or_print(out.as_ref(), &payload)?;
            Ok(0)
        }
    }
}
