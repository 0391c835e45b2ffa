use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_rational::Ratio;
use serde_json::json;

use rrv_core::auction::AuctionConfig;
use rrv_core::carp::{convert_to_instance, parse_carp, parse_ratio, ConversionParams};
use rrv_core::depot_routes::DepotRouteTable;
use rrv_core::exact::{emit_milp, exact_optimum, OracleLimits};
use rrv_core::failures::{
    create_failure_scenarios, create_failure_scenarios_replanned, parse_scenarios, scenarios_to_text, FailureScenario,
};
use rrv_core::generate::{random_network, Shape};
use rrv_core::instance::{parse_instance, Instance};
use rrv_core::metrics::{competitive_ratio, format2, percent_increase, report, ScenarioMetrics};
use rrv_core::network::Network;
use rrv_core::pipeline::{evaluate_instance, PipelineConfig};
use rrv_core::planner::{generate_initial_plan, SaConfig};
use rrv_core::routing::{parse_plan, FleetPlan};
use rrv_core::simulator::{simulate, SimConfig, SimulationReport, WaitTime};
use rrv_core::TimeUnits;

/// Multi-trip routing for rechargeable vehicles, failure simulation and
/// auction-based rescheduling.
#[derive(Parser)]
#[command(name = "rrv", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a CARP benchmark file into an instance.
    Convert(ConvertArgs),
    /// Plan the failure-free mission with simulated annealing.
    Plan(PlanArgs),
    /// Draw random failure scenarios against a plan.
    GenScenarios(GenArgs),
    /// Simulate a plan under failure scenarios with auction rescheduling.
    Simulate(SimulateArgs),
    /// Exact optimum for desk-scale instances.
    Oracle(OracleArgs),
    /// Write the mixed-integer model in LP format.
    EmitMilp(MilpArgs),
    /// Recompute the derived columns of a results table.
    Metrics(MetricsArgs),
    /// Run the whole pipeline and write one CSV report.
    Bench(BenchArgs),
}

#[derive(Args)]
struct ConvertArgs {
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value = "1/5", value_parser = parse_ratio)]
    depot_ratio: Ratio<i64>,
    #[arg(long, default_value = "1/3", value_parser = parse_ratio)]
    required_ratio: Ratio<i64>,
}

#[derive(Args, Clone)]
struct SaArgs {
    /// Random seed for the annealer.
    #[arg(long)]
    seed: u64,
    /// Starting temperature (default: 0.3 x initial makespan).
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long, default_value_t = 0.95)]
    cool: f64,
    /// Iterations per temperature level.
    #[arg(long, default_value_t = 200)]
    iters: usize,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    /// Final temperature (default: 1e-3 x t0).
    #[arg(long)]
    tmin: Option<f64>,
}

impl SaArgs {
    fn config(&self) -> SaConfig {
        SaConfig {
            initial_temperature: self.t0,
            cooling_rate: self.cool,
            iterations_per_temperature: self.iters,
            min_temperature: self.tmin,
            restarts: self.restarts,
            seed: self.seed,
        }
    }
}

#[derive(Args)]
struct PlanArgs {
    instance: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Depot route table cache; built and written when missing.
    #[arg(long)]
    depot_table: Option<PathBuf>,
    #[command(flatten)]
    sa: SaArgs,
}

#[derive(Args)]
struct GenArgs {
    instance: PathBuf,
    plan: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long)]
    seed: u64,
    /// Re-plan the mission for every scenario; plans are written next to the
    /// output as `<stem>-<scenario>.plan`.
    #[arg(long)]
    replan: bool,
    /// Annealing seed used with --replan.
    #[arg(long, requires = "replan")]
    sa_seed: Option<u64>,
}

#[derive(Args)]
struct AuctionArgs {
    /// Wait after the first pooled failure before auctioning: a time or `end`.
    #[arg(long, default_value = "0")]
    wait: WaitTime,
    /// Initial search radius (default: C).
    #[arg(long)]
    r0: Option<TimeUnits>,
    /// Radius increment (default: C).
    #[arg(long)]
    dr: Option<TimeUnits>,
}

impl AuctionArgs {
    fn config(&self, inst: &Instance) -> SimConfig {
        let d = AuctionConfig::for_capacity(inst.capacity);
        SimConfig {
            wait: self.wait,
            auction: AuctionConfig {
                initial_radius: self.r0.unwrap_or(d.initial_radius),
                radius_step: self.dr.unwrap_or(d.radius_step),
            },
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    instance: PathBuf,
    plan: PathBuf,
    scenarios: PathBuf,
    #[command(flatten)]
    auction: AuctionArgs,
    /// Report file (JSON); printed to stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Auction log CSV covering every scenario.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Final plans, one `# <scenario>` block each.
    #[arg(long)]
    plans_out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    instance: PathBuf,
    /// Failure scenarios; each is solved with its failure deadlines.
    #[arg(long)]
    scenarios: Option<PathBuf>,
    #[arg(long, default_value_t = OracleLimits::default().max_labels)]
    max_labels: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MilpArgs {
    instance: PathBuf,
    /// Scenario file; the first scenario (or --name) adds failure rows.
    #[arg(long)]
    scenarios: Option<PathBuf>,
    #[arg(long, requires = "scenarios")]
    name: Option<String>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct MetricsArgs {
    /// CSV with beta_opt, beta_opt_f and beta_ca columns.
    table: PathBuf,
    /// Compare against the table's own derived columns (tolerance 0.01) and
    /// fail on any mismatch.
    #[arg(long)]
    check: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Instance or CARP files; CARP files are converted with --seed.
    inputs: Vec<PathBuf>,
    /// Also generate this many random instances.
    #[arg(long, default_value_t = 0)]
    random: usize,
    #[arg(long, default_value_t = 7)]
    nodes: usize,
    #[arg(long, default_value_t = 10)]
    edges: usize,
    /// Fleet size for random instances (default: from the conversion rule).
    #[arg(long)]
    vehicles: Option<usize>,
    /// Cap on required edges for random instances.
    #[arg(long)]
    max_required: Option<usize>,
    #[command(flatten)]
    sa: SaArgs,
    #[command(flatten)]
    auction: AuctionArgs,
    #[arg(long)]
    no_oracle: bool,
    /// Include wall-clock columns (makes output non-reproducible).
    #[arg(long)]
    timings: bool,
    #[arg(short, long)]
    output: PathBuf,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_instance(path: &Path) -> Result<Instance> {
    parse_instance(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load_network(path: &Path) -> Result<Network> {
    Ok(Network::new(load_instance(path)?))
}

fn load_plan(inst: &Instance, path: &Path) -> Result<FleetPlan> {
    parse_plan(inst, &read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load_scenarios(path: &Path) -> Result<Vec<FailureScenario>> {
    parse_scenarios(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn convert(a: ConvertArgs) -> Result<()> {
    let carp = parse_carp(&read(&a.input)?).with_context(|| format!("parsing {}", a.input.display()))?;
    let params = ConversionParams { depot_ratio: a.depot_ratio, required_ratio: a.required_ratio };
    let inst = convert_to_instance(&carp, a.seed, params)?;
    write(&a.output, &inst.to_text())?;
    println!(
        "{}: {} nodes, {} edges, {} required, {} depots, K = {}, C = {}, R_T = {}",
        inst.name,
        inst.graph.node_count(),
        inst.graph.edges().len(),
        inst.required.len(),
        inst.depots.len(),
        inst.vehicle_count,
        inst.capacity,
        inst.recharge
    );
    Ok(())
}

fn plan(a: PlanArgs) -> Result<()> {
    let inst = load_instance(&a.instance)?;
    let net = match &a.depot_table {
        Some(p) if p.exists() => {
            let table = DepotRouteTable::from_text(&inst, &read(p)?)?;
            Network::with_table(inst, table)
        }
        Some(p) => {
            let net = Network::new(inst);
            write(p, &net.table.to_text())?;
            net
        }
        None => Network::new(inst),
    };
    let out = generate_initial_plan(&net, &a.sa.config())?;
    write(&a.output, &out.plan.to_text())?;
    println!("beta {}", out.beta);
    for (k, y) in out.plan.completion_times().iter().enumerate() {
        println!("V{} {y} ({} trips)", k + 1, out.plan.routes[k].len());
    }
    Ok(())
}

fn gen_scenarios(a: GenArgs) -> Result<()> {
    let net = load_network(&a.instance)?;
    let scenarios = if a.replan {
        let sa = SaConfig::with_seed(a.sa_seed.unwrap_or(a.seed));
        let pairs = create_failure_scenarios_replanned(&net, &sa, a.seed)?;
        let stem = a.output.file_stem().and_then(|s| s.to_str()).unwrap_or("scenarios");
        let dir = a.output.parent().unwrap_or(Path::new("."));
        for (s, p) in &pairs {
            write(&dir.join(format!("{stem}-{}.plan", s.name)), &p.to_text())?;
        }
        pairs.into_iter().map(|(s, _)| s).collect()
    } else {
        let plan = load_plan(&net.inst, &a.plan)?;
        create_failure_scenarios(&net.inst, &plan, a.seed)?
    };
    write(&a.output, &scenarios_to_text(&scenarios))?;
    println!("{} scenarios", scenarios.len());
    Ok(())
}

fn report_json(s: &FailureScenario, wait: WaitTime, r: &SimulationReport) -> serde_json::Value {
    let failures: serde_json::Map<String, serde_json::Value> =
        r.failure_times.iter().map(|(k, f)| (format!("V{}", k + 1), json!(f.as_units_f64()))).collect();
    json!({
        "scenario": s.name,
        "wait": wait.to_string(),
        "beta_initial": r.beta_initial.as_units_f64(),
        "beta_ca": r.beta_ca.as_units_f64(),
        "auctions": r.auction_count(),
        "pool_trigger_events": r.pool_trigger_events,
        "covered": r.covered,
        "failures": failures,
        "final_plan": r.final_plan.to_text().lines().collect::<Vec<_>>(),
    })
}

fn run_simulate(a: SimulateArgs) -> Result<()> {
    let net = load_network(&a.instance)?;
    let plan = load_plan(&net.inst, &a.plan)?;
    let scenarios = load_scenarios(&a.scenarios)?;
    let cfg = a.auction.config(&net.inst);
    let mut reports = Vec::new();
    let mut log = format!("scenario,time,{}\n", rrv_core::auction::AuctionLog::CSV_HEADER);
    let mut plans = String::new();
    for s in &scenarios {
        let r = simulate(&net, &plan, s, cfg).with_context(|| format!("scenario {}", s.name))?;
        for rec in &r.auctions {
            rec.log.write_rows(&mut log, Some(&format!("{},{}", s.name, rec.time)));
        }
        plans.push_str(&format!("# {}\n{}", s.name, r.final_plan.to_text()));
        reports.push(report_json(s, cfg.wait, &r));
    }
    let text = serde_json::to_string_pretty(&reports)? + "\n";
    match &a.output {
        Some(p) => write(p, &text)?,
        None => print!("{text}"),
    }
    if let Some(p) = &a.log {
        write(p, &log)?;
    }
    if let Some(p) = &a.plans_out {
        write(p, &plans)?;
    }
    Ok(())
}

fn oracle(a: OracleArgs) -> Result<()> {
    let net = load_network(&a.instance)?;
    let limits = OracleLimits { max_labels: a.max_labels, ..Default::default() };
    let mut text = String::new();
    let base = exact_optimum(&net, None, &limits)?;
    text.push_str(&format!("# no failures\n{}", base.to_text()));
    if let Some(p) = &a.scenarios {
        for s in load_scenarios(p)? {
            let r = exact_optimum(&net, Some(&s), &limits)?;
            text.push_str(&format!("# {}\n{}", s.name, r.to_text()));
        }
    }
    match &a.output {
        Some(p) => write(p, &text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn milp(a: MilpArgs) -> Result<()> {
    let inst = load_instance(&a.instance)?;
    let scenario = match &a.scenarios {
        Some(p) => {
            let all = load_scenarios(p)?;
            let s = match &a.name {
                Some(n) => all.into_iter().find(|s| &s.name == n),
                None => all.into_iter().next(),
            };
            Some(s.context("scenario not found")?)
        }
        None => None,
    };
    let model = emit_milp(&inst, scenario.as_ref())?;
    write(&a.output, &model.text)?;
    println!("{} rows, {} binaries, big-M {}", model.rows, model.binaries, model.big_m);
    Ok(())
}

fn metrics(a: MetricsArgs) -> Result<()> {
    let text = read(&a.table)?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().context("empty table")?.split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name);
    let need = |name: &str| col(name).with_context(|| format!("missing column {name}"));
    let (bo, bf, bc) = (need("beta_opt")?, need("beta_opt_f")?, need("beta_ca")?);
    let derived = [("pct_opt_f", bo, bf, false), ("pct_ca", bo, bc, false), ("rho", bf, bc, true)];
    let mut out = header.join(",") + "\n";
    let mut mismatches = Vec::new();
    for (n, line) in lines.enumerate() {
        let mut cells: Vec<String> = line.split(',').map(String::from).collect();
        let beta = |i: usize| -> Option<TimeUnits> { cells.get(i).and_then(|c| c.parse().ok()) };
        let mut computed = Vec::new();
        for &(name, base, other, ratio) in &derived {
            let value = match (beta(base), beta(other)) {
                (Some(b), Some(o)) if ratio => competitive_ratio(o, b).ok(),
                (Some(b), Some(o)) => percent_increase(b, o).ok(),
                _ => None,
            };
            computed.push((name, value));
        }
        for (name, value) in computed {
            let Some(i) = col(name) else { continue };
            let shown = value.map_or("-".to_string(), format2);
            if a.check {
                if let (Some(v), Ok(p)) = (value, cells[i].parse::<TimeUnits>()) {
                    let diff = v - Ratio::new(p.millis(), 1000);
                    if diff > Ratio::new(1, 100) || -diff > Ratio::new(1, 100) {
                        mismatches.push(format!("row {} ({}): {name} {shown} vs {}", n + 1, cells[0], cells[i]));
                    }
                }
            }
            cells[i] = shown;
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    match &a.output {
        Some(p) => write(p, &out)?,
        None => print!("{out}"),
    }
    if !mismatches.is_empty() {
        bail!("{} derived values differ by more than 0.01:\n{}", mismatches.len(), mismatches.join("\n"));
    }
    Ok(())
}

fn bench_instance(path: &Path, seed: u64) -> Result<Instance> {
    let text = read(path)?;
    match parse_instance(&text) {
        Ok(i) => Ok(i),
        Err(inst_err) => match parse_carp(&text) {
            Ok(c) => Ok(convert_to_instance(&c, seed, ConversionParams::default())?),
            Err(_) => Err(inst_err).with_context(|| format!("parsing {}", path.display())),
        },
    }
}

fn bench(a: BenchArgs) -> Result<()> {
    let seed = a.sa.seed;
    let mut networks = Vec::new();
    for p in &a.inputs {
        networks.push(Network::new(bench_instance(p, seed)?));
    }
    let shape = Shape { vehicles: a.vehicles, max_required: a.max_required, ..Shape::new(a.nodes, a.edges, 9) };
    for i in 0..a.random as u64 {
        networks.push(random_network(seed.wrapping_add(i), &shape)?);
    }
    if networks.is_empty() {
        bail!("nothing to run: give instance files or --random");
    }
    let cfg = PipelineConfig {
        sa: a.sa.config(),
        scenario_seed: seed,
        wait: a.auction.wait,
        oracle: (!a.no_oracle).then(OracleLimits::default),
    };
    let mut rows: Vec<ScenarioMetrics> = Vec::new();
    for net in &networks {
        let out = evaluate_instance(net, &cfg).with_context(|| format!("instance {}", net.inst.name))?;
        rows.extend(out.rows());
    }
    write(&a.output, &report(&rows, a.timings))?;
    println!("{} rows from {} instances", rows.len(), networks.len());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Convert(a) => convert(a),
        Command::Plan(a) => plan(a),
        Command::GenScenarios(a) => gen_scenarios(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Oracle(a) => oracle(a),
        Command::EmitMilp(a) => milp(a),
        Command::Metrics(a) => metrics(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
