//! Command-line surface: scenario generation, one-shot scheduling,
//! single-round admission, horizon simulation, and oracle checks.
//!
//! Every subcommand is deterministic given its flags and seed: artifacts are
//! written with stable field order and rewritten runs produce identical
//! bytes. Structured artifacts are JSON, time series are CSV, and every file
//! carries a `format_version`. Writes go through a temporary file in the
//! destination directory followed by a rename, so an interrupted run never
//! leaves a truncated artifact.
//!
//! Exit codes: 0 success, 2 usage or invalid input, 3 infeasibility, 4 I/O.

use crate::admission::{
    brute_force_admission, run_admission, AdmissionError, AdmissionOutcome, AdmissionProblem,
    GaConfig, GenerationStats,
};
use crate::domain::{Request, RequestId, Schedule, Vehicle, VehicleId};
use crate::fleet_scheduler::{
    brute_force_fleet, build_tabu_lists, solve_assignment, Assignment, ExecMode, FleetError,
};
use crate::network::{NetworkFile, RoadNetwork};
use crate::simulator::{
    generate_scenario, run_horizon, GenParams, IntervalReport, Ledger, Scenario, ScenarioFile,
    SimError,
};
use crate::units::{Distance, Money, TimeDelta};
use crate::vehicle_scheduler::SearchLimits;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

pub const REPORT_FORMAT_VERSION: u32 = 1;
pub const ASSIGNMENT_FORMAT_VERSION: u32 = 1;

const DEFAULT_WORKERS: usize = 4;

#[derive(Debug, Parser)]
#[command(name = "fleet-dispatch", version, about = "Fleet scheduling and admission control")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Base seed for every random draw (default: 0 for gen, the scenario's
    /// embedded seed otherwise).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for distributed solving (default: FLEET_DISPATCH_WORKERS
    /// or 4).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Directory artifacts are written to.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a random scenario (network, fleet, and request stream).
    Gen(GenArgs),
    /// Solve vehicle schedules for a fixed request-to-vehicle assignment.
    Schedule(ScheduleArgs),
    /// Run one admission round over every request in a scenario.
    Admit(AdmitArgs),
    /// Drive a scenario through its full decision horizon.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, default_value_t = 20)]
    vertices: u32,
    #[arg(long, default_value_t = 5)]
    stations: u32,
    #[arg(long, default_value_t = 5)]
    vehicles: u32,
    #[arg(long, default_value_t = 30)]
    requests: u32,
    /// Submission times are drawn uniformly over this many seconds.
    #[arg(long, default_value_t = 1800)]
    span_secs: u32,
    /// Decision interval length in seconds.
    #[arg(long, default_value_t = 180)]
    interval_secs: u32,
    /// Number of intervals (default: enough to decide every request).
    #[arg(long)]
    horizon: Option<u32>,
}

#[derive(Debug, Args)]
struct ScheduleArgs {
    /// Scenario file; its network is loaded via the embedded reference.
    #[arg(long)]
    scenario: PathBuf,
    /// Assignment file naming each request's vehicle.
    #[arg(long)]
    assignment: Option<PathBuf>,
    /// Exhaustively search every assignment instead (cap-guarded).
    #[arg(long)]
    oracle: bool,
    #[arg(long, value_enum, default_value_t = ModeArg::Cumulative)]
    mode: ModeArg,
    /// Solve in both execution modes and print wall-clock times.
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Args)]
struct AdmitArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Also run the exhaustive oracle and add a normalized trace column.
    #[arg(long)]
    oracle: bool,
    /// Independent runs; run i uses seed + i.
    #[arg(long, default_value_t = 1)]
    repeats: u32,
    /// Generation count override.
    #[arg(long)]
    generations: Option<u32>,
    /// Population size override.
    #[arg(long)]
    population: Option<usize>,
    #[arg(long, value_enum, default_value_t = ModeArg::Cumulative)]
    mode: ModeArg,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Cumulative)]
    mode: ModeArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    /// One coordinator solves every vehicle subproblem in sequence.
    Cumulative,
    /// A worker pool splits the vehicle subproblems.
    Distributed,
}

impl ModeArg {
    fn to_exec(self, workers: usize) -> ExecMode {
        match self {
            ModeArg::Cumulative => ExecMode::Cumulative,
            ModeArg::Distributed => ExecMode::Distributed { workers },
        }
    }

    fn name(self) -> &'static str {
        match self {
            ModeArg::Cumulative => "cumulative",
            ModeArg::Distributed => "distributed",
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or semantically invalid input: exit 2.
    Usage(String),
    /// The optimization has no feasible answer: exit 3.
    Infeasible(String),
    /// Filesystem or serialization failure: exit 4.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Infeasible(m) | CliError::Io(m) => m,
        }
    }
}

/// Parses `args` (argv[0] included) and runs the subcommand, returning the
/// process exit code. Output lines go to stdout, errors to stderr.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests print to stdout and exit 0; real
            // parse failures report on stderr and exit 2.
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let workers = effective_workers(cli.workers)?;
    match &cli.command {
        Command::Gen(args) => cmd_gen(cli, args),
        Command::Schedule(args) => cmd_schedule(cli, args, workers),
        Command::Admit(args) => cmd_admit(cli, args, workers),
        Command::Simulate(args) => cmd_simulate(cli, args, workers),
    }
}

fn effective_workers(flag: Option<usize>) -> Result<usize, CliError> {
    let n = match flag {
        Some(n) => n,
        None => match std::env::var("FLEET_DISPATCH_WORKERS") {
            Ok(raw) => raw.parse().map_err(|_| {
                CliError::Usage(format!("FLEET_DISPATCH_WORKERS is not a number: {raw:?}"))
            })?,
            Err(_) => DEFAULT_WORKERS,
        },
    };
    if n == 0 {
        return Err(CliError::Usage("worker count must be at least 1".into()));
    }
    Ok(n)
}

// ---------------------------------------------------------------- artifacts

/// One request-to-vehicle pairing in an assignment file.
#[derive(Debug, Serialize, Deserialize)]
pub struct AssignmentPair {
    pub request: RequestId,
    pub vehicle: VehicleId,
}

/// Input format for `schedule --assignment`: the fixed admission decision to
/// solve schedules for. Requests absent from the list are not served.
#[derive(Debug, Serialize, Deserialize)]
pub struct AssignmentFile {
    pub format_version: u32,
    pub pairs: Vec<AssignmentPair>,
}

/// Output of `schedule`: the solved timetables and their total fuel cost.
#[derive(Debug, Serialize, Deserialize)]
pub struct ScheduleReport {
    pub format_version: u32,
    pub mode: String,
    pub assignment: Assignment,
    pub total_cost: Distance,
    pub schedules: BTreeMap<VehicleId, Schedule>,
}

/// Output of `admit`: the best decision found over all repeats, with the
/// per-generation traces behind it.
#[derive(Debug, Serialize, Deserialize)]
pub struct AdmitReport {
    pub format_version: u32,
    pub repeats: u32,
    pub seeds: Vec<u64>,
    /// Index of the repeat that produced the reported decision.
    pub best_repeat: u32,
    pub profit: Money,
    pub assignment: Assignment,
    pub total_cost: Distance,
    pub admitted: Vec<RequestId>,
    pub rejected: Vec<RequestId>,
    pub schedules: BTreeMap<VehicleId, Schedule>,
    pub oracle: Option<OracleReport>,
}

/// Ground-truth block attached when `--oracle` runs.
#[derive(Debug, Serialize, Deserialize)]
pub struct OracleReport {
    pub profit: Money,
    pub admitted: Vec<RequestId>,
}

/// Output of `simulate`: every interval's audit trail plus the final books.
#[derive(Debug, Serialize, Deserialize)]
pub struct SimulateReport {
    pub format_version: u32,
    pub mode: String,
    pub intervals: Vec<IntervalReport>,
    pub ledger: Ledger,
    pub census: BTreeMap<crate::domain::RequestState, usize>,
}

// ------------------------------------------------------------------ file IO

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&raw)
        .map_err(|e| CliError::Io(format!("cannot parse {}: {e}", path.display())))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let io = |e: std::io::Error| CliError::Io(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.persist(path)
        .map_err(|e| CliError::Io(format!("cannot write {}: {}", path.display(), e.error)))?;
    Ok(())
}

fn write_json_atomic<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(format!("cannot serialize {}: {e}", path.display())))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))
}

/// Loads a scenario file and the network it references (resolved relative to
/// the scenario's directory).
pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let file: ScenarioFile = read_json(path)?;
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let net_path = dir.join(&file.network_ref);
    let net_file: NetworkFile = read_json(&net_path)?;
    let network: RoadNetwork = net_file
        .into_network()
        .map_err(|e| CliError::Io(format!("invalid network {}: {e}", net_path.display())))?;
    file.into_scenario(network)
        .map_err(|e| CliError::Io(format!("invalid scenario {}: {e}", path.display())))
}

// --------------------------------------------------------------------- gen

fn cmd_gen(cli: &Cli, args: &GenArgs) -> Result<(), CliError> {
    let params = GenParams {
        seed: cli.seed.unwrap_or(0),
        vertices: args.vertices,
        stations: args.stations,
        vehicles: args.vehicles,
        requests: args.requests,
        span: TimeDelta::from_seconds(f64::from(args.span_secs)),
        interval: TimeDelta::from_seconds(f64::from(args.interval_secs)),
        horizon: args.horizon,
        ga: GaConfig::default(),
    };
    let scenario =
        generate_scenario(&params).map_err(|e| CliError::Usage(format!("bad parameters: {e}")))?;
    ensure_out_dir(&cli.out)?;
    let net_path = cli.out.join("network.json");
    let scn_path = cli.out.join("scenario.json");
    write_json_atomic(&net_path, &NetworkFile::from_network(&scenario.network))?;
    let file = ScenarioFile::from_scenario(&scenario, "network.json".into());
    write_json_atomic(&scn_path, &file)?;
    println!(
        "generated {}: {} vertices, {} stations, {} vehicles, {} requests, {} intervals, seed {}",
        scn_path.display(),
        args.vertices,
        args.stations,
        args.vehicles,
        args.requests,
        scenario.config.horizon,
        params.seed
    );
    Ok(())
}

// ---------------------------------------------------------------- schedule

fn scenario_tables(
    scenario: &Scenario,
) -> (BTreeMap<RequestId, Request>, BTreeMap<VehicleId, Vehicle>) {
    let pool = scenario
        .arrivals
        .iter()
        .map(|(_, r)| (r.id, r.clone()))
        .collect();
    let vehicles = scenario.vehicles.iter().map(|v| (v.id, v.clone())).collect();
    (pool, vehicles)
}

fn map_fleet_err(e: FleetError) -> CliError {
    match e {
        FleetError::OracleCap { size, cap } => CliError::Usage(format!(
            "pool of {size} exceeds the exhaustive-search cap of {cap}"
        )),
        FleetError::NoWorkers => CliError::Usage("worker count must be at least 1".into()),
        other => CliError::Usage(format!("invalid input: {other}")),
    }
}

/// Finds a vehicle whose subproblem makes `assignment` infeasible, for error
/// reporting. Solves each vehicle's group alone.
fn diagnose_infeasible(
    assignment: &Assignment,
    pool: &BTreeMap<RequestId, Request>,
    vehicles: &BTreeMap<VehicleId, Vehicle>,
    rn: &crate::network::ReducedNetwork,
    limits: &SearchLimits,
) -> String {
    for (&k, _) in vehicles {
        let sub: Assignment = assignment
            .iter()
            .filter(|(_, &v)| v == k)
            .map(|(&r, &v)| (r, v))
            .collect();
        if sub.is_empty() {
            continue;
        }
        let one: BTreeMap<VehicleId, Vehicle> = [(k, vehicles[&k].clone())].into();
        match solve_assignment(&sub, &one, pool, rn, limits, ExecMode::Cumulative) {
            Ok(Some(_)) => {}
            _ => {
                let members: Vec<String> = sub.keys().map(|r| r.to_string()).collect();
                return format!(
                    "no feasible schedule for {k} serving {}",
                    members.join(", ")
                );
            }
        }
    }
    "no feasible schedule for the given assignment".into()
}

fn cmd_schedule(cli: &Cli, args: &ScheduleArgs, workers: usize) -> Result<(), CliError> {
    let scenario = load_scenario(&args.scenario)?;
    let (pool, vehicles) = scenario_tables(&scenario);
    let rn = scenario
        .network
        .reduce(scenario.network.vertices())
        .map_err(|e| CliError::Usage(format!("network is unusable: {e}")))?;
    let limits = SearchLimits {
        node_budget: scenario.config.node_budget,
    };

    let (assignment, result) = if args.oracle {
        if args.assignment.is_some() {
            return Err(CliError::Usage(
                "--oracle and --assignment are mutually exclusive".into(),
            ));
        }
        let best = brute_force_fleet(&pool, &vehicles, &rn, &limits).map_err(map_fleet_err)?;
        match best {
            Some(pair) => pair,
            None => {
                return Err(CliError::Infeasible(
                    "no assignment serves every request".into(),
                ))
            }
        }
    } else {
        let path = args.assignment.as_ref().ok_or_else(|| {
            CliError::Usage("either --assignment or --oracle is required".into())
        })?;
        let file: AssignmentFile = read_json(path)?;
        if file.format_version != ASSIGNMENT_FORMAT_VERSION {
            return Err(CliError::Io(format!(
                "unsupported assignment format_version {}",
                file.format_version
            )));
        }
        let assignment: Assignment = file
            .pairs
            .into_iter()
            .map(|p| (p.request, p.vehicle))
            .collect();
        let mode = args.mode.to_exec(workers);
        let solved = solve_assignment(&assignment, &vehicles, &pool, &rn, &limits, mode)
            .map_err(map_fleet_err)?;
        match solved {
            Some(result) => (assignment, result),
            None => {
                return Err(CliError::Infeasible(diagnose_infeasible(
                    &assignment,
                    &pool,
                    &vehicles,
                    &rn,
                    &limits,
                )))
            }
        }
    };

    if args.timing {
        for mode in [ModeArg::Cumulative, ModeArg::Distributed] {
            let started = std::time::Instant::now();
            solve_assignment(
                &assignment,
                &vehicles,
                &pool,
                &rn,
                &limits,
                mode.to_exec(workers),
            )
            .map_err(map_fleet_err)?;
            let elapsed = started.elapsed();
            println!(
                "timing {} ({} workers): {:.3} ms",
                mode.name(),
                if mode == ModeArg::Cumulative { 1 } else { workers },
                elapsed.as_secs_f64() * 1e3
            );
        }
    }

    ensure_out_dir(&cli.out)?;
    let report = ScheduleReport {
        format_version: REPORT_FORMAT_VERSION,
        mode: if args.oracle { "oracle" } else { args.mode.name() }.to_string(),
        assignment,
        total_cost: result.total_cost,
        schedules: result.schedules,
    };
    let path = cli.out.join("schedules.json");
    write_json_atomic(&path, &report)?;
    println!(
        "scheduled {} vehicles at total cost {:.3} miles -> {}",
        report.schedules.len(),
        report.total_cost.miles(),
        path.display()
    );
    Ok(())
}

// ------------------------------------------------------------------- admit

fn map_admission_err(e: AdmissionError) -> CliError {
    match e {
        AdmissionError::ForcedSetInfeasible => {
            CliError::Infeasible("previously admitted requests cannot all be served".into())
        }
        AdmissionError::OracleCap { size, cap } => CliError::Usage(format!(
            "pool of {size} exceeds the exhaustive-search cap of {cap}"
        )),
        AdmissionError::Fleet(e) => map_fleet_err(e),
        other => CliError::Usage(format!("invalid input: {other}")),
    }
}

fn trace_csv(
    traces: &[Vec<GenerationStats>],
    oracle: Option<Money>,
) -> String {
    let mut out = String::new();
    out.push_str("repeat,generation,best_millicents,mean_millicents");
    if oracle.is_some() {
        out.push_str(",normalized");
    }
    out.push('\n');
    for (repeat, trace) in traces.iter().enumerate() {
        for (generation, stats) in trace.iter().enumerate() {
            let _ = write!(
                out,
                "{repeat},{generation},{},{}",
                stats.best_millicents, stats.mean_millicents
            );
            if let Some(best) = oracle {
                let denom = best.millicents();
                let ratio = if denom != 0 {
                    stats.best_millicents as f64 / denom as f64
                } else if stats.best_millicents == 0 {
                    1.0
                } else {
                    0.0
                };
                let _ = write!(out, ",{ratio:.6}");
            }
            out.push('\n');
        }
    }
    out
}

fn cmd_admit(cli: &Cli, args: &AdmitArgs, workers: usize) -> Result<(), CliError> {
    if args.repeats == 0 {
        return Err(CliError::Usage("--repeats must be at least 1".into()));
    }
    let scenario = load_scenario(&args.scenario)?;
    let (pool, vehicles) = scenario_tables(&scenario);
    let rn = scenario
        .network
        .reduce(scenario.network.vertices())
        .map_err(|e| CliError::Usage(format!("network is unusable: {e}")))?;
    let limits = SearchLimits {
        node_budget: scenario.config.node_budget,
    };
    let mode = args.mode.to_exec(workers);
    let tabu = build_tabu_lists(&pool, &vehicles, &rn, &limits).map_err(map_fleet_err)?;
    let problem = AdmissionProblem::new(
        &pool,
        &vehicles,
        &rn,
        &tabu,
        &limits,
        mode,
        scenario.config.discount,
        scenario.config.fuel_cents_per_mile,
    )
    .map_err(map_admission_err)?;

    let base_seed = cli.seed.unwrap_or(scenario.config.ga.seed);
    let mut ga = GaConfig {
        generations: args.generations.unwrap_or(scenario.config.ga.generations),
        n_pop: args.population.unwrap_or(scenario.config.ga.n_pop),
        ..scenario.config.ga
    };

    let mut best: Option<(u32, AdmissionOutcome)> = None;
    let mut seeds = Vec::with_capacity(args.repeats as usize);
    let mut traces = Vec::with_capacity(args.repeats as usize);
    for repeat in 0..args.repeats {
        ga.seed = base_seed.wrapping_add(u64::from(repeat));
        seeds.push(ga.seed);
        let outcome = run_admission(&problem, &ga).map_err(map_admission_err)?;
        traces.push(outcome.trace.clone());
        let better = match &best {
            None => true,
            Some((_, incumbent)) => outcome.profit > incumbent.profit,
        };
        if better {
            best = Some((repeat, outcome));
        }
    }
    let (best_repeat, outcome) = best.expect("at least one repeat ran");

    let oracle = if args.oracle {
        let truth = brute_force_admission(&problem).map_err(map_admission_err)?;
        Some(OracleReport {
            profit: truth.profit,
            admitted: truth.admitted,
        })
    } else {
        None
    };

    ensure_out_dir(&cli.out)?;
    let csv = trace_csv(&traces, oracle.as_ref().map(|o| o.profit));
    write_atomic(&cli.out.join("trace.csv"), csv.as_bytes())?;
    let report = AdmitReport {
        format_version: REPORT_FORMAT_VERSION,
        repeats: args.repeats,
        seeds,
        best_repeat,
        profit: outcome.profit,
        assignment: outcome.assignment,
        total_cost: outcome.total_cost,
        admitted: outcome.admitted,
        rejected: outcome.rejected,
        schedules: outcome.schedules,
        oracle,
    };
    let path = cli.out.join("admission.json");
    write_json_atomic(&path, &report)?;
    println!(
        "admitted {} of {} requests for {} cents profit over {} repeats -> {}",
        report.admitted.len(),
        pool.len(),
        report.profit.cents_rounded(),
        args.repeats,
        path.display()
    );
    Ok(())
}

// ---------------------------------------------------------------- simulate

fn map_sim_err(e: SimError) -> CliError {
    match e {
        SimError::Admission(inner) => map_admission_err(inner),
        other => CliError::Usage(format!("invalid input: {other}")),
    }
}

fn intervals_csv(reports: &[IntervalReport]) -> String {
    let mut out = String::from(
        "interval,admitted,carried,excluded,interval_profit_millicents,\
         cumulative_profit_millicents,cumulative_admitted\n",
    );
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.interval,
            r.admitted.len(),
            r.carried.len(),
            r.excluded.len(),
            r.interval_profit.millicents(),
            r.cumulative_profit.millicents(),
            r.cumulative_admitted
        );
    }
    out
}

fn cmd_simulate(cli: &Cli, args: &SimulateArgs, workers: usize) -> Result<(), CliError> {
    let mut scenario = load_scenario(&args.scenario)?;
    if let Some(seed) = cli.seed {
        scenario.config.ga.seed = seed;
    }
    let mode = args.mode.to_exec(workers);
    let (intervals, state) = run_horizon(&scenario, mode).map_err(map_sim_err)?;

    ensure_out_dir(&cli.out)?;
    write_atomic(
        &cli.out.join("intervals.csv"),
        intervals_csv(&intervals).as_bytes(),
    )?;
    let report = SimulateReport {
        format_version: REPORT_FORMAT_VERSION,
        mode: args.mode.name().to_string(),
        intervals,
        ledger: state.ledger,
        census: state.census(),
    };
    let path = cli.out.join("simulation.json");
    write_json_atomic(&path, &report)?;
    println!(
        "simulated {} intervals: {} admitted, {} cents profit -> {}",
        report.intervals.len(),
        report.ledger.admitted,
        report.ledger.profit().cents_rounded(),
        path.display()
    );
    Ok(())
}
