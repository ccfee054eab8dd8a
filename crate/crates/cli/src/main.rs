use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use relaycast::engine::Trace;
use relaycast::experiment::{check_trace, run_on, run_sweep, sweep_csv, RunConfig, SweepSpec};
use relaycast::faults::compute_p;
use relaycast::graph::{
    build_lps_graph, build_random_regular, mixing_lambda, read_adjacency, sample_mixing, spectral_estimate,
    write_adjacency, Graph, Origin, DEFAULT_SPECTRAL_TOL,
};
use relaycast::params::{lemma5_holds, pure_propagation_feasible, Verdict, DEFAULT_EPS};

/// Environment variable holding the sweep worker count.
const WORKERS_VAR: &str = "RELAYCAST_WORKERS";

#[derive(Parser)]
#[command(name = "relaycast", version, about = "Relay broadcast on expander networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a graph and write it as an adjacency file.
    GenGraph {
        /// LPS Ramanujan graph from primes P and Q.
        #[arg(long, num_args = 2, value_names = ["P", "Q"], conflicts_with = "random", required_unless_present = "random")]
        lps: Option<Vec<u64>>,
        /// Random regular graph.
        #[arg(long, num_args = 3, value_names = ["N", "D", "SEED"])]
        random: Option<Vec<u64>>,
        /// Output path; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Recompute the second-largest absolute eigenvalue of a graph file.
    Spectrum { graph: PathBuf },
    /// Fault closure and correct core for a fault set.
    Npc {
        graph: PathBuf,
        /// Faulty nodes, comma separated.
        #[arg(long, value_delimiter = ',')]
        faults: Vec<usize>,
        #[arg(long)]
        beta0: f64,
    },
    /// Grid search of coefficient triples admitting pure propagation.
    Feasible { params: PathBuf },
    /// Run one experiment; writes the trace CSV and report JSON.
    Run {
        config: PathBuf,
        /// Trace CSV path.
        #[arg(long, default_value = "trace.csv")]
        trace: PathBuf,
        /// Report JSON path.
        #[arg(long, default_value = "report.json")]
        report: PathBuf,
    },
    /// Run a parameter sweep; writes a summary CSV.
    Sweep {
        spec: PathBuf,
        /// Summary path; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Re-check a stored trace against its config.
    Check { config: PathBuf, trace: PathBuf },
    /// Sample random subsets and count edge-count deviation bound violations.
    CheckLemma1 {
        graph: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Input document of `feasible`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FeasibleRequest {
    alpha: f64,
    n: usize,
    d: usize,
    /// Defaults to the Ramanujan value `2·sqrt(d - 1)`.
    lambda: Option<f64>,
    #[serde(default = "default_grid_step")]
    grid_step: f64,
    /// Optional check of the fast-propagation condition.
    fast: Option<FastRequest>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FastRequest {
    theta0: f64,
    beta: f64,
    beta0: f64,
    eps: Option<f64>,
}

#[derive(Serialize)]
struct FastVerdict {
    eps: f64,
    eps_defaulted: bool,
    verdict: Verdict,
}

fn default_grid_step() -> f64 {
    0.01
}

/// Outcome of a subcommand that ran to completion.
enum Status {
    Ok,
    PropertyFailure,
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Writes through a sibling temporary file so readers never see a partial file.
fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, contents).with_context(|| format!("writing {}", path.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn emit(output: Option<&Path>, contents: &str) -> anyhow::Result<()> {
    match output {
        Some(path) => write_atomic(path, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn load_graph(path: &Path) -> anyhow::Result<Graph> {
    let origin = Origin::File { path: path.display().to_string() };
    Ok(read_adjacency(&read(path)?, origin)?)
}

fn pretty<T: Serialize>(value: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn configure_workers() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var(WORKERS_VAR) else {
        return Ok(());
    };
    let workers: usize = raw
        .parse()
        .map_err(|_| relaycast::Error::Config(format!("{WORKERS_VAR}={raw:?} is not a worker count")))?;
    rayon::ThreadPoolBuilder::new().num_threads(workers).build_global()?;
    Ok(())
}

fn execute(command: Command) -> anyhow::Result<Status> {
    match command {
        Command::GenGraph { lps, random, output } => {
            let g = match (lps.as_deref(), random.as_deref()) {
                (Some(&[p, q]), _) => build_lps_graph(p, q)?,
                (_, Some(&[n, d, seed])) => build_random_regular(n as usize, d as usize, seed)?,
                _ => bail!(relaycast::Error::Config("give --lps P Q or --random N D SEED".into())),
            };
            emit(output.as_deref(), &write_adjacency(&g))?;
        }
        Command::Spectrum { graph } => {
            let g = load_graph(&graph)?;
            let est = spectral_estimate(&g, DEFAULT_SPECTRAL_TOL)?;
            let out = json!({
                "n": g.n(),
                "d": g.degree(),
                "bipartite": g.is_bipartite(),
                "lambda": est.lambda,
                "residual": est.residual,
                "ramanujan_bound": g.ramanujan_bound(),
            });
            print!("{}", pretty(&out)?);
        }
        Command::Npc { graph, faults, beta0 } => {
            let g = load_graph(&graph)?;
            let part = compute_p(&g, &faults, beta0)?;
            let out = json!({
                "T": part.t,
                "Z": part.z,
                "P_size": part.p.len(),
                "mu_achieved": if part.mu_undefined { None } else { Some(part.mu_achieved) },
            });
            print!("{}", pretty(&out)?);
        }
        Command::Feasible { params } => {
            let req: FeasibleRequest = serde_json::from_str(&read(&params)?).map_err(relaycast::Error::from)?;
            let lambda = req.lambda.unwrap_or(2.0 * (req.d.saturating_sub(1) as f64).sqrt());
            let report = pure_propagation_feasible(req.alpha, req.n, req.d, lambda, req.grid_step)?;
            let mut out = serde_json::to_value(&report)?;
            if let Some(fast) = req.fast {
                let eps = fast.eps.unwrap_or(DEFAULT_EPS);
                let verdict = lemma5_holds(req.alpha, fast.theta0, req.d, eps, fast.beta, fast.beta0);
                out["fast_propagation"] =
                    serde_json::to_value(FastVerdict { eps, eps_defaulted: fast.eps.is_none(), verdict })?;
            }
            print!("{}", pretty(&out)?);
        }
        Command::Run { config, trace, report } => {
            let cfg = RunConfig::from_json(&read(&config)?)?;
            let g = cfg.graph.build()?;
            let (t, r) = run_on(&cfg, &g)?;
            write_atomic(&trace, &t.to_csv()?)?;
            write_atomic(&report, &r.to_json()?)?;
            let p = &r.properties;
            eprintln!(
                "heaviside {} ({:?}), dirac {}, unforgeability {}",
                p.heaviside_pass, p.heaviside_branch, p.dirac_pass, p.unforgeability_pass
            );
            if !p.pass() {
                return Ok(Status::PropertyFailure);
            }
        }
        Command::Sweep { spec, output } => {
            configure_workers()?;
            let spec: SweepSpec = serde_json::from_str(&read(&spec)?).map_err(relaycast::Error::from)?;
            let rows = run_sweep(&spec)?;
            emit(output.as_deref(), &sweep_csv(&spec, &rows)?)?;
            let failing = rows.iter().filter(|r| !r.pass()).count();
            eprintln!("{} runs, {failing} failing", rows.len());
            if failing > 0 {
                return Ok(Status::PropertyFailure);
            }
        }
        Command::Check { config, trace } => {
            let cfg = RunConfig::from_json(&read(&config)?)?;
            let t = Trace::from_csv(&read(&trace)?)?;
            let g = cfg.graph.build()?;
            let report = check_trace(&cfg, &g, &t)?;
            print!("{}", pretty(&report)?);
            if !report.pass() {
                return Ok(Status::PropertyFailure);
            }
        }
        Command::CheckLemma1 { graph, samples, seed } => {
            let g = load_graph(&graph)?;
            let report = sample_mixing(&g, samples, seed, mixing_lambda(&g))?;
            print!("{}", pretty(&report)?);
            if report.violations > 0 {
                return Ok(Status::PropertyFailure);
            }
        }
    }
    Ok(Status::Ok)
}

/// 2 for bad input, 3 for failures inside a computation.
fn error_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<relaycast::Error>() {
        Some(relaycast::Error::Construction(_) | relaycast::Error::Numerical { .. } | relaycast::Error::Execution(_)) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::PropertyFailure) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(error_code(&err))
        }
    }
}
