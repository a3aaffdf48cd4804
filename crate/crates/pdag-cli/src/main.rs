//! `pdag`: response-time analysis for parallel tasks with probabilistic
//! branching.
//!
//! Exit codes: 0 success, 1 analysis infeasibility, 2 input or validation
//! error, 3 scenario cap exceeded.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pdag::model::{parse_pdag, serialize_pdag, validate, PDag};
use pdag::oracle::{enum_distribution, OracleError, DEFAULT_SCENARIO_CAP};
use pdag::probability::{assign_probabilities, ClampRule};
use pdag::response::{build_distribution, meet_probability, response_entries};
use pdag::workbench::{
    bench_sweep, compare, generate_pdag, min_cores, summarize, CoreMethod, GeneratorConfig,
    MinCoresError,
};
use pdag::{compute_lambda_star, LambdaStarSet};

#[derive(Parser)]
#[command(name = "pdag", version, about = "Probabilistic DAG response-time analysis")]
struct Cli {
    /// Output format: human-readable text or machine-readable records.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Records,
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Dist,
    Exceedance,
    Paths,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Analysis,
    Enumeration,
    Graham,
}

impl From<Method> for CoreMethod {
    fn from(m: Method) -> CoreMethod {
        match m {
            Method::Analysis => CoreMethod::Analysis,
            Method::Enumeration => CoreMethod::Enumeration,
            Method::Graham => CoreMethod::Graham,
        }
    }
}

#[derive(Args)]
struct InstanceArg {
    /// Path to a p-DAG instance file.
    instance: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance against every model invariant.
    Validate(InstanceArg),
    /// Run the scenario-free analysis and emit paths or the distribution.
    Analyze {
        #[command(flatten)]
        instance: InstanceArg,
        /// Number of cores.
        #[arg(long)]
        cores: u32,
        /// Analyze against this deadline instead of the instance's.
        #[arg(long)]
        deadline: Option<f64>,
        #[arg(long, value_enum, default_value_t = Emit::Dist)]
        emit: Emit,
    },
    /// Enumerate every scenario and emit the baseline distribution.
    Enumerate {
        #[command(flatten)]
        instance: InstanceArg,
        #[arg(long)]
        cores: u32,
        #[arg(long, default_value_t = DEFAULT_SCENARIO_CAP)]
        scenario_cap: u128,
    },
    /// Compare the analysis against the enumeration baseline.
    Compare {
        #[command(flatten)]
        instance: InstanceArg,
        #[arg(long)]
        cores: u32,
        #[arg(long, default_value_t = DEFAULT_SCENARIO_CAP)]
        scenario_cap: u128,
    },
    /// Smallest core count meeting the deadline at an acceptance ratio.
    Cores {
        #[command(flatten)]
        instance: InstanceArg,
        /// Required probability of meeting the deadline, in (0, 1].
        #[arg(long)]
        acceptance: f64,
        #[arg(long, value_enum, default_value_t = Method::Analysis)]
        method: Method,
        #[arg(long)]
        deadline: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_SCENARIO_CAP)]
        scenario_cap: u128,
    },
    /// Generate a random instance.
    Generate {
        #[arg(long)]
        seed: u64,
        /// Number of probabilistic structures.
        #[arg(long, default_value_t = 3)]
        theta: u32,
        /// Maximum nodes per layer.
        #[arg(long, default_value_t = 6)]
        p: u32,
        /// Fraction of the workload inside probabilistic structures.
        #[arg(long, default_value_t = 0.4)]
        psr: f64,
        #[arg(long, default_value_t = 3)]
        branches: u32,
        #[arg(long, default_value_t = 0.5)]
        utilization: f64,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Timing and deviation sweep over generated instances.
    Bench {
        #[arg(long)]
        seed: u64,
        /// Structure counts to sweep, e.g. "3,4,5,6".
        #[arg(long, value_delimiter = ',', required = true)]
        theta: Vec<u32>,
        #[arg(long, default_value_t = 6)]
        p: u32,
        #[arg(long, default_value_t = 0.4)]
        psr: f64,
        #[arg(long, default_value_t = 4)]
        cores: u32,
        #[arg(long, default_value_t = 20)]
        instances: u32,
        #[arg(long, default_value_t = DEFAULT_SCENARIO_CAP)]
        scenario_cap: u128,
        /// Worker pool size.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

enum CliError {
    /// Analysis infeasibility (exit 1).
    Infeasible(String),
    /// Input or validation error (exit 2).
    Input(String),
    /// Resource cap exceeded (exit 3).
    Cap(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Infeasible(_) => 1,
            CliError::Input(_) => 2,
            CliError::Cap(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Infeasible(m) | CliError::Input(m) | CliError::Cap(m) => m,
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> CliError {
        CliError::Cap(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn load_instance(path: &PathBuf) -> Result<PDag, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_pdag(&text).map_err(|e| CliError::Input(e.to_string()))
}

/// Parses, validates and renormalizes an instance for analysis commands.
fn load_valid(path: &PathBuf) -> Result<PDag, CliError> {
    let pdag = load_instance(path)?;
    let report = validate(&pdag);
    if !report.ok() {
        return Err(CliError::Input(format!("invalid instance:\n{report}")));
    }
    Ok(pdag.renormalized())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate(arg) => cmd_validate(&arg.instance, cli.format),
        Command::Analyze {
            instance,
            cores,
            deadline,
            emit,
        } => cmd_analyze(&instance.instance, cores, deadline, emit, cli.format),
        Command::Enumerate {
            instance,
            cores,
            scenario_cap,
        } => cmd_enumerate(&instance.instance, cores, scenario_cap, cli.format),
        Command::Compare {
            instance,
            cores,
            scenario_cap,
        } => cmd_compare(&instance.instance, cores, scenario_cap, cli.format),
        Command::Cores {
            instance,
            acceptance,
            method,
            deadline,
            scenario_cap,
        } => cmd_cores(&instance.instance, acceptance, method, deadline, scenario_cap),
        Command::Generate {
            seed,
            theta,
            p,
            psr,
            branches,
            utilization,
            out,
        } => cmd_generate(seed, theta, p, psr, branches, utilization, out),
        Command::Bench {
            seed,
            theta,
            p,
            psr,
            cores,
            instances,
            scenario_cap,
            jobs,
        } => cmd_bench(seed, &theta, p, psr, cores, instances, scenario_cap, jobs, cli.format),
    }
}

fn cmd_validate(path: &PathBuf, format: Format) -> Result<(), CliError> {
    let pdag = load_instance(path)?;
    let report = validate(&pdag);
    match format {
        Format::Text => print!("{report}"),
        Format::Records => {
            println!("# pdag-validate ok={} instance={}", report.ok(), pdag.instance_hash());
            println!("rule,message");
            for v in &report.violations {
                println!("{},{}", v.rule, v.message);
            }
        }
    }
    if report.ok() {
        Ok(())
    } else {
        Err(CliError::Input("instance failed validation".into()))
    }
}

fn paths_records(
    ls: &LambdaStarSet,
    entries: &[pdag::response::ResponseEntry],
    cumulative: &[f64],
    m: u32,
    hash: &str,
) -> String {
    let mut out = format!(
        "# pdag-paths m={} delta={} total_mass={} instance={}\n",
        m,
        ls.delta(),
        cumulative.last().copied().unwrap_or(0.0),
        hash
    );
    out.push_str("index,length,probability,cumulative,interference,response_bound,clamped,branches,nodes\n");
    for (h, e) in entries.iter().enumerate() {
        let clamped = match e.clamped {
            None => "",
            Some(ClampRule::LowerZero) => "lower",
            Some(ClampRule::UpperTermination) => "upper-termination",
        };
        let branches = e
            .path
            .branches
            .iter()
            .map(|(s, b)| format!("{s}:{b}"))
            .collect::<Vec<_>>()
            .join(";");
        let nodes = e
            .path
            .nodes
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(">");
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            h + 1,
            e.path.len,
            e.probability,
            cumulative[h],
            e.interference,
            e.response_bound,
            clamped,
            branches,
            nodes
        );
    }
    out
}

fn cmd_analyze(
    path: &PathBuf,
    cores: u32,
    deadline: Option<f64>,
    emit: Emit,
    format: Format,
) -> Result<(), CliError> {
    if cores == 0 {
        return Err(CliError::Input("--cores must be at least 1".into()));
    }
    let mut pdag = load_valid(path)?;
    if let Some(d) = deadline {
        pdag = pdag.with_deadline(d);
    }
    let hash = pdag.instance_hash();
    let ls = compute_lambda_star(&pdag);
    let probs = assign_probabilities(&ls, &pdag);
    let dist = build_distribution(&ls, &probs, &pdag, cores);
    match (emit, format) {
        (Emit::Dist, Format::Records) => print!("{}", dist.to_records(cores, &hash)),
        (Emit::Exceedance, Format::Records) => {
            print!("{}", dist.exceedance_records(cores, &hash))
        }
        (Emit::Paths, Format::Records) => {
            let entries = response_entries(&ls, &probs, &pdag, cores);
            print!(
                "{}",
                paths_records(&ls, &entries, probs.cumulative(), cores, &hash)
            );
        }
        (Emit::Dist, Format::Text) => {
            println!("instance {hash}  m={cores}  deadline={}", pdag.deadline());
            for &(r, p) in dist.points() {
                println!("  response {r}  mass {p}");
            }
            println!(
                "meet probability at deadline: {}",
                meet_probability(&dist, pdag.deadline())
            );
        }
        (Emit::Exceedance, Format::Text) => {
            println!("instance {hash}  m={cores}");
            let mut remaining = dist.total_mass();
            for &(r, p) in dist.points() {
                println!("  response >= {r}  probability {remaining}");
                remaining -= p;
            }
        }
        (Emit::Paths, Format::Text) => {
            let entries = response_entries(&ls, &probs, &pdag, cores);
            println!(
                "instance {hash}  m={cores}  delta={}  paths={}",
                ls.delta(),
                ls.len()
            );
            for (h, e) in entries.iter().enumerate() {
                let clamp = match e.clamped {
                    None => String::new(),
                    Some(ClampRule::LowerZero) => "  [clamped: lower]".into(),
                    Some(ClampRule::UpperTermination) => "  [clamped: upper-termination]".into(),
                };
                println!(
                    "  #{} len={} P={} I={} R={}{}",
                    h + 1,
                    e.path.len,
                    e.probability,
                    e.interference,
                    e.response_bound,
                    clamp
                );
            }
        }
    }
    Ok(())
}

fn cmd_enumerate(path: &PathBuf, cores: u32, cap: u128, format: Format) -> Result<(), CliError> {
    if cores == 0 {
        return Err(CliError::Input("--cores must be at least 1".into()));
    }
    let pdag = load_valid(path)?;
    let dist = enum_distribution(&pdag, cores, cap)?;
    match format {
        Format::Records => print!("{}", dist.to_records(cores, &pdag.instance_hash())),
        Format::Text => {
            println!("instance {}  m={cores}  scenarios={}", pdag.instance_hash(), pdag.scenario_count());
            for &(r, p) in dist.points() {
                println!("  response {r}  mass {p}");
            }
        }
    }
    Ok(())
}

fn cmd_compare(path: &PathBuf, cores: u32, cap: u128, format: Format) -> Result<(), CliError> {
    let pdag = load_valid(path)?;
    let report = compare(&pdag, cores, cap).map_err(|e| match e {
        pdag::workbench::CompareError::Oracle(o) => CliError::Cap(o.to_string()),
        pdag::workbench::CompareError::Noar(n) => CliError::Input(n.to_string()),
    })?;
    match format {
        Format::Records => {
            println!(
                "# pdag-compare m={} noar={} dominant={} t_analysis_ns={} t_oracle_ns={} instance={}",
                cores,
                report.noar,
                report.dominant,
                report.t_analysis.as_nanos(),
                report.t_oracle.as_nanos(),
                pdag.instance_hash()
            );
            println!("length,deviation");
            for &(len, dev) in &report.deviations {
                println!("{len},{dev}");
            }
        }
        Format::Text => {
            println!("noar {}", report.noar);
            println!("dominant {}", report.dominant);
            println!("t_analysis {:?}", report.t_analysis);
            println!("t_oracle {:?}", report.t_oracle);
            for &(len, dev) in &report.deviations {
                println!("  len {len}  deviation {dev}");
            }
        }
    }
    Ok(())
}

fn cmd_cores(
    path: &PathBuf,
    acceptance: f64,
    method: Method,
    deadline: Option<f64>,
    cap: u128,
) -> Result<(), CliError> {
    let mut pdag = load_valid(path)?;
    if let Some(d) = deadline {
        pdag = pdag.with_deadline(d);
    }
    match min_cores(&pdag, acceptance, method.into(), cap) {
        Ok(m) => {
            println!("{m}");
            Ok(())
        }
        Err(MinCoresError::Infeasible { .. }) => Err(CliError::Infeasible(format!(
            "no core count up to 1024 reaches acceptance {acceptance}"
        ))),
        Err(MinCoresError::InvalidAcceptance(a)) => {
            Err(CliError::Input(format!("acceptance {a} outside (0, 1]")))
        }
        Err(MinCoresError::Oracle(o)) => Err(CliError::Cap(o.to_string())),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_generate(
    seed: u64,
    theta: u32,
    p: u32,
    psr: f64,
    branches: u32,
    utilization: f64,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let config = GeneratorConfig {
        structures: theta,
        nodes_per_layer: (2, p),
        psr,
        branches_per_structure: branches,
        utilization,
        seed,
        ..Default::default()
    };
    let pdag = generate_pdag(&config).map_err(|e| CliError::Input(e.to_string()))?;
    let text = serialize_pdag(&pdag);
    match out {
        Some(path) => fs::write(&path, text)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    seed: u64,
    theta: &[u32],
    p: u32,
    psr: f64,
    cores: u32,
    instances: u32,
    cap: u128,
    jobs: usize,
    format: Format,
) -> Result<(), CliError> {
    let configs: Vec<GeneratorConfig> = theta
        .iter()
        .map(|&t| GeneratorConfig {
            structures: t,
            nodes_per_layer: (2, p),
            psr,
            seed,
            ..Default::default()
        })
        .collect();
    let rows = bench_sweep(&configs, cores, instances, cap, jobs);
    let opt_u = |v: Option<u32>| v.map(|x| x.to_string()).unwrap_or_default();
    match format {
        Format::Records => {
            println!("# pdag-bench m={cores} instances={instances} cap={cap} seed={seed}");
            println!(
                "config,seed,theta,p,psr,m,noar,t_analysis_ns,t_oracle_ns,cores_70,cores_80,cores_90,cores_100"
            );
            for r in &rows {
                println!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    r.config,
                    r.seed,
                    r.structures,
                    r.max_nodes_per_layer,
                    r.psr,
                    r.m,
                    r.noar.map(|v| v.to_string()).unwrap_or_default(),
                    r.t_analysis.as_nanos(),
                    r.t_oracle.map(|d| d.as_nanos().to_string()).unwrap_or_default(),
                    opt_u(r.cores[0]),
                    opt_u(r.cores[1]),
                    opt_u(r.cores[2]),
                    opt_u(r.cores[3]),
                );
            }
            for s in summarize(&rows) {
                println!(
                    "# summary config={} theta={} instances={} t_analysis_median_ns={} t_oracle_median_ns={} oracle_skipped={} noar_mean={} noar_p90={}",
                    s.config,
                    s.structures,
                    s.instances,
                    s.t_analysis_median.as_nanos(),
                    s.t_oracle_median.map(|d| d.as_nanos().to_string()).unwrap_or_default(),
                    s.oracle_skipped,
                    s.noar_mean.map(|v| v.to_string()).unwrap_or_default(),
                    s.noar_p90.map(|v| v.to_string()).unwrap_or_default(),
                );
            }
        }
        Format::Text => {
            for s in summarize(&rows) {
                println!(
                    "theta={}: {} instances, analysis median {:?}, oracle median {}, skipped {}, noar mean {}",
                    s.structures,
                    s.instances,
                    s.t_analysis_median,
                    s.t_oracle_median.map(|d| format!("{d:?}")).unwrap_or_else(|| "-".into()),
                    s.oracle_skipped,
                    s.noar_mean.map(|v| v.to_string()).unwrap_or_else(|| "-".into()),
                );
            }
        }
    }
    Ok(())
}
