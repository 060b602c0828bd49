use std::fmt::Display;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cflcp_core::bridge::{read_solution_file, write_lp_file, write_solution_file};
use cflcp_core::generator::{generate, manifest_csv, GenParams, ManifestRow, Preset, DEFAULT_SEEDS};
use cflcp_core::milp::{build, decode};
use cflcp_core::model::{parse_allocation, parse_instance, Allocation, Instance, Location};
use cflcp_core::oracles::{bilevel_baseline, enumerate_stable, ScaleGuard};
use cflcp_core::pipeline::{run_bench, solve_formulation, Relax};
use cflcp_core::stability::classify;
use cflcp_core::{Formulation, Limits, MilpStatus, StabilityLevel, StabilityReport};

/// Writes to stdout; a closed pipe (e.g. `| head`) ends the process quietly.
macro_rules! out {
    ($($t:tt)*) => {
        if writeln!(std::io::stdout(), $($t)*).is_err() {
            std::process::exit(0)
        }
    };
}

macro_rules! out_raw {
    ($($t:tt)*) => {
        if write!(std::io::stdout(), $($t)*).is_err() {
            std::process::exit(0)
        }
    };
}

#[derive(Parser)]
#[command(name = "cflcp", version, about = "Capacitated facility location with customer preferences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate random instances from a preset or explicit sizes.
    Gen(GenArgs),
    /// Write a formulation as a CPLEX LP file.
    Build(BuildArgs),
    /// Solve a formulation with the built-in branch-and-bound.
    Solve(SolveArgs),
    /// Check and report a solution file produced by an external solver.
    ImportSolution(ImportArgs),
    /// Classify an allocation and list blocking certificates.
    Verify(VerifyArgs),
    /// List every stable allocation for a location.
    Enumerate(EnumerateArgs),
    /// Optimistic bilevel optimum by location enumeration.
    Baseline(BaselineArgs),
    /// Run models over a preset suite and write CSV tables.
    Bench(BenchArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// cs, cs-r, pw, pw-r, cc, cc-r or cha-po.
    #[arg(long, value_parser = parse_formulation)]
    model: Formulation,
    #[arg(long)]
    instance: PathBuf,
    /// none, x or all.
    #[arg(long, default_value = "none", value_parser = parse_relax)]
    relax: Relax,
}

#[derive(Args)]
struct GenArgs {
    /// Preset name `n-m-c`, e.g. 50-5-12.
    #[arg(long, conflicts_with_all = ["customers", "plants", "capacity"])]
    preset: Option<String>,
    #[arg(long, requires_all = ["plants", "capacity"])]
    customers: Option<usize>,
    #[arg(long)]
    plants: Option<usize>,
    #[arg(long)]
    capacity: Option<u32>,
    /// One seed, or a comma-separated list.
    #[arg(long, default_value = "1", value_parser = parse_seeds)]
    seed: Seeds,
    /// Output file for one seed; a directory (with manifest.csv) for several.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Write the solution file here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ImportArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    solution: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    instance: PathBuf,
    /// JSON array of 1-based plant ids (null for unassigned).
    #[arg(long)]
    alloc: PathBuf,
    /// Open plants; defaults to the plants the allocation uses.
    #[arg(long)]
    open: Option<String>,
    /// Write the report as JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value = "all")]
    open: String,
    /// cs, pw or cc.
    #[arg(long, default_value = "cc", value_parser = parse_level)]
    level: StabilityLevel,
}

#[derive(Args)]
struct BaselineArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Args)]
struct BenchArgs {
    /// Preset name `n-m-c`.
    #[arg(long)]
    suite: String,
    #[arg(long, value_parser = parse_seeds)]
    seed: Option<Seeds>,
    /// Comma-separated model list.
    #[arg(long, default_value = "cs,cs-r,pw,pw-r,cc,cc-r", value_parser = parse_models)]
    model: Models,
    #[arg(long, default_value = "none", value_parser = parse_relax)]
    relax: Relax,
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Directory for rows.csv, summary.csv and monotone.csv; rows go to
    /// stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone)]
struct Seeds(Vec<u64>);

#[derive(Clone)]
struct Models(Vec<Formulation>);

fn parse_formulation(s: &str) -> Result<Formulation, String> {
    Formulation::parse(s).ok_or_else(|| format!("unknown model '{s}'"))
}

fn parse_models(s: &str) -> Result<Models, String> {
    s.split(',').map(parse_formulation).collect::<Result<_, _>>().map(Models)
}

fn parse_relax(s: &str) -> Result<Relax, String> {
    Relax::parse(s).ok_or_else(|| format!("unknown relaxation '{s}'"))
}

fn parse_level(s: &str) -> Result<StabilityLevel, String> {
    StabilityLevel::ALL
        .into_iter()
        .find(|l| l.short_name() == s.trim())
        .ok_or_else(|| format!("unknown level '{s}'"))
}

fn parse_seeds(s: &str) -> Result<Seeds, String> {
    s.split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|_| format!("bad seed '{t}'")))
        .collect::<Result<_, _>>()
        .map(Seeds)
}

struct Failure {
    code: u8,
    message: String,
}

fn domain(e: impl Display) -> Failure {
    Failure { code: 1, message: e.to_string() }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

type CliResult = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| domain(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: impl AsRef<[u8]>) -> CliResult {
    fs::write(path, text).map_err(|e| domain(format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    parse_instance(&read(path)?).map_err(|e| domain(format!("{}: {e}", path.display())))
}

fn limits(time_limit: Option<f64>, workers: usize) -> Result<Limits, Failure> {
    let mut limits = Limits::default().with_workers(workers);
    if let Some(t) = time_limit {
        if !(t.is_finite() && t > 0.0) {
            return Err(usage(format!("--time-limit must be positive, got {t}")));
        }
        limits = limits.with_time_limit(t);
    }
    Ok(limits)
}

fn num(x: f64) -> String {
    if (x - x.round()).abs() < 1e-9 && x.abs() < 1e15 {
        format!("{}", x.round() as i64)
    } else {
        format!("{x:.6}")
    }
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_else(|| "-".into())
}

fn init_logging() -> CliResult {
    let level = match std::env::var("CFLCP_LOG").as_deref() {
        Err(_) | Ok("") => log::LevelFilter::Warn,
        Ok("quiet") => log::LevelFilter::Off,
        Ok("info") => log::LevelFilter::Info,
        Ok("debug") => log::LevelFilter::Debug,
        Ok(other) => return Err(usage(format!("CFLCP_LOG must be quiet, info or debug, got '{other}'"))),
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    Ok(())
}

fn gen(args: GenArgs) -> CliResult {
    let preset = match (&args.preset, args.customers, args.plants, args.capacity) {
        (Some(name), ..) => Preset::parse(name).map_err(|e| usage(e.to_string()))?,
        (None, Some(n), Some(m), Some(c)) => Preset { n_customers: n, n_plants: m, capacity: c },
        _ => return Err(usage("give --preset or --customers, --plants and --capacity")),
    };
    let seeds = args.seed.0;
    let params = |seed| -> GenParams { preset.params(seed) };
    if let [seed] = seeds[..] {
        let text = generate(&params(seed)).map_err(domain)?.to_json();
        return match &args.out {
            Some(path) => write(path, text),
            None => {
                out_raw!("{text}");
                Ok(())
            }
        };
    }
    let dir = args.out.ok_or_else(|| usage("several seeds need --out <dir>"))?;
    fs::create_dir_all(&dir).map_err(|e| domain(format!("{}: {e}", dir.display())))?;
    let mut rows = Vec::new();
    for seed in seeds {
        let file = format!("{}_s{seed}.json", preset.name());
        write(&dir.join(&file), generate(&params(seed)).map_err(domain)?.to_json())?;
        rows.push(ManifestRow { suite: preset.name(), seed, params: params(seed), file });
    }
    write(&dir.join("manifest.csv"), manifest_csv(&rows))?;
    out!("wrote {} instances to {}", rows.len(), dir.display());
    Ok(())
}

fn build_lp(args: BuildArgs) -> CliResult {
    let inst = load_instance(&args.model.instance)?;
    let model = build(args.model.model, &inst, &args.model.relax.options()).map_err(domain)?;
    let text = write_lp_file(&model).map_err(domain)?;
    match &args.out {
        Some(path) => {
            write(path, &text)?;
            out!("vars={} rows={}", model.num_vars(), model.num_constraints());
        }
        None => out_raw!("{}", String::from_utf8_lossy(&text)),
    }
    Ok(())
}

fn print_allocation(inst: &Instance, loc: &Location, alloc: &Allocation) {
    out!("open={loc}");
    out!("allocation={}", alloc.groups_string(inst.n_plants()));
}

fn solve(args: SolveArgs) -> CliResult {
    let inst = load_instance(&args.model.instance)?;
    let limits = limits(args.time_limit, args.workers)?;
    let report = solve_formulation(&inst, args.model.model, args.model.relax, &limits).map_err(domain)?;
    let sol = &report.solution;
    out!("model={}", report.formulation);
    out!("status={}", sol.status);
    if let Some(path) = &args.out {
        let model = build(args.model.model, &inst, &args.model.relax.options()).map_err(domain)?;
        write(path, write_solution_file(&model, sol.status, sol.values.as_deref()))?;
    }
    match sol.status {
        MilpStatus::Infeasible => return Err(domain("model is infeasible")),
        MilpStatus::Unbounded => return Err(domain("model is unbounded")),
        _ => {}
    }
    out!("objective={}", opt_num(sol.objective));
    out!("bound={}", num(sol.best_bound));
    out!("root_bound={}", opt_num(sol.root_bound));
    out!("gap_pct={}", opt_num(sol.gap));
    out!("nodes={}", sol.nodes);
    out!("time_s={:.3}", sol.wall_time.as_secs_f64());
    if let (Some(loc), Some(alloc)) = (&report.location, &report.allocation) {
        print_allocation(&inst, loc, alloc);
    }
    if let Some(class) = report.class {
        out!("class={class}");
    }
    if sol.objective.is_none() {
        return Err(domain("limit reached without a feasible solution"));
    }
    Ok(())
}

fn import_solution(args: ImportArgs) -> CliResult {
    let inst = load_instance(&args.model.instance)?;
    let model = build(args.model.model, &inst, &args.model.relax.options()).map_err(domain)?;
    let text = read(&args.solution)?;
    let sol = read_solution_file(&text, &model).map_err(|e| domain(format!("{}: {e}", args.solution.display())))?;
    out!("status={}", sol.status);
    let Some(values) = sol.values else {
        return Err(domain(format!("solution file reports status {}", sol.status)));
    };
    out!("objective={}", opt_num(sol.objective));
    if let Ok((loc, alloc)) = decode(&model, &values) {
        print_allocation(&inst, &loc, &alloc);
        let report = classify(&inst, &loc, &alloc).map_err(domain)?;
        out!("class={}", report.class);
    }
    Ok(())
}

fn print_report(report: &StabilityReport) {
    out!("class={}", report.class);
    for b in &report.blocking_customers {
        let from = b.current_plant.map_or("-".to_string(), |j| j.to_string());
        out!("blocking_customer={} from={from} to={}", b.customer, b.better_plant);
    }
    for p in &report.blocking_pairs {
        out!(
            "blocking_pair=({},{}) plants=({},{})",
            p.customers.0, p.customers.1, p.plants.0, p.plants.1
        );
    }
    if let Some(c) = &report.blocking_coalition {
        let ids = |v: &[_]| v.iter().map(|x: &cflcp_core::Customer| x.to_string()).collect::<Vec<_>>().join(",");
        let plants = |v: &[cflcp_core::Plant]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        out!(
            "blocking_coalition=({}) plants=({}) moves_to=({})",
            ids(&c.customers),
            plants(&c.plants),
            plants(&c.moves_to)
        );
    }
}

fn verify(args: VerifyArgs) -> CliResult {
    let inst = load_instance(&args.instance)?;
    let alloc = parse_allocation(&inst, &read(&args.alloc)?)
        .map_err(|e| domain(format!("{}: {e}", args.alloc.display())))?;
    let loc = match &args.open {
        Some(open) => Location::parse(inst.n_plants(), open).map_err(|e| usage(e.to_string()))?,
        None => alloc.used_location(),
    };
    let report = classify(&inst, &loc, &alloc).map_err(domain)?;
    print_allocation(&inst, &loc, &alloc);
    out!("cost={}", loc.cost(&inst) + alloc.assignment_cost(&inst));
    print_report(&report);
    if let Some(path) = &args.out {
        let json = serde_json::to_string_pretty(&report).map_err(domain)?;
        write(path, json + "\n")?;
    }
    Ok(())
}

fn enumerate(args: EnumerateArgs) -> CliResult {
    let inst = load_instance(&args.instance)?;
    let loc = Location::parse(inst.n_plants(), &args.open).map_err(|e| usage(e.to_string()))?;
    let all = enumerate_stable(&inst, &loc, args.level, ScaleGuard::enumeration()).map_err(domain)?;
    for alloc in &all {
        out!(
            "{} cost={}",
            alloc.groups_string(inst.n_plants()),
            loc.cost(&inst) + alloc.assignment_cost(&inst)
        );
    }
    out!("count={}", all.len());
    Ok(())
}

fn baseline(args: BaselineArgs) -> CliResult {
    let inst = load_instance(&args.instance)?;
    let sol = bilevel_baseline(&inst, ScaleGuard::bilevel(), args.workers.max(1)).map_err(domain)?;
    out!("objective={}", sol.cost);
    out!("pref_value={}", sol.pref_value);
    print_allocation(&inst, &sol.location, &sol.allocation);
    let report = classify(&inst, &sol.location, &sol.allocation).map_err(domain)?;
    out!("class={}", report.class);
    Ok(())
}

fn bench(args: BenchArgs) -> CliResult {
    let preset = Preset::parse(&args.suite).map_err(|e| usage(e.to_string()))?;
    let seeds = args.seed.map_or_else(|| DEFAULT_SEEDS.to_vec(), |s| s.0);
    let limits = limits(args.time_limit, args.workers)?;
    let result = run_bench(&preset, &seeds, &args.model.0, args.relax, &limits).map_err(domain)?;
    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| domain(format!("{}: {e}", dir.display())))?;
            write(&dir.join("rows.csv"), result.rows_csv())?;
            write(&dir.join("summary.csv"), result.summary_csv(&preset.name()))?;
            write(&dir.join("monotone.csv"), result.monotone_csv())?;
            out_raw!("{}", result.summary_csv(&preset.name()));
        }
        None => {
            out_raw!("{}", result.rows_csv());
            out!("");
            out_raw!("{}", result.summary_csv(&preset.name()));
            out!("");
            out_raw!("{}", result.monotone_csv());
        }
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult {
    init_logging()?;
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Build(a) => build_lp(a),
        Command::Solve(a) => solve(a),
        Command::ImportSolution(a) => import_solution(a),
        Command::Verify(a) => verify(a),
        Command::Enumerate(a) => enumerate(a),
        Command::Baseline(a) => baseline(a),
        Command::Bench(a) => bench(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let text = e.render().to_string();
            eprintln!("{}", text.lines().next().unwrap_or("error: bad arguments"));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
