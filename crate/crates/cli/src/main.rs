//! `mmlp`: generate, solve, normalize and verify max-min LP instances.
//!
//! Exit codes: 0 on success, 1 when a verified property fails, 2 for usage
//! errors and unreadable input, 3 for degenerate or unbounded instances.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mmlp::algo::{solve_local, Params};
use mmlp::instance::{
    generate_random, parse_instance, serialize_instance, serialize_solution, GeneratorKind,
    Instance,
};
use mmlp::pipeline::{prepare, solve_instance, PipelineRun};
use mmlp::transform::{serialize_backmap, NormalizedInstance};
use mmlp::unfold::ViewSigner;
use mmlp::verify::{
    check_locality_with, corrupt_run, random_cover, report_for_run, solve_exact, Corruption,
    LemmaOptions, Locality, Report,
};
use mmlp::Error;

use config::{Config, SweepConfig};

#[derive(Parser, Debug)]
#[command(
    name = "mmlp",
    version,
    about = "Local approximation of max-min linear programs"
)]
struct Cli {
    /// TOML file with defaults; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a seeded random instance.
    Generate(GenerateArgs),
    /// Run the local algorithm through preprocessing, normalization and
    /// back-mapping.
    Solve(SolveArgs),
    /// Solve exactly with the LP oracle.
    Exact(ExactArgs),
    /// Compare against the oracle and run every check.
    Verify(VerifyArgs),
    /// Write the normalized instance and its back-map.
    Normalize(NormalizeArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long)]
    agents: usize,
    #[arg(long)]
    delta_i: usize,
    #[arg(long)]
    delta_k: usize,
    /// Random seed (default 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Normalized shape (contains cycles unless `--tree`).
    #[arg(long)]
    normalized: bool,
    /// A normalized tree with single-agent leaf constraints.
    #[arg(long)]
    tree: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct SolverArgs {
    /// The period R ≥ 2.
    #[arg(long = "r")]
    period: Option<usize>,
    /// Bisection tolerance (default 1e-9).
    #[arg(long)]
    tol: Option<f64>,
    /// Local horizon, at least 12(R-2)+7.
    #[arg(long)]
    horizon: Option<usize>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Also write the g-table of the normalized instance as TSV.
    #[arg(long)]
    g_table: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExactArgs {
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Inject {
    /// Triple the output vector.
    Solution,
    /// Lower g⁻ at the deepest level below the level before it.
    GTable,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Instance files; may be repeated.
    #[arg(long = "in")]
    inputs: Vec<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Also verify this many generated instances.
    #[arg(long)]
    sweep: Option<usize>,
    /// Random seed (default 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Agent pairs per instance for the locality check.
    #[arg(long, default_value_t = 8)]
    locality_pairs: usize,
    /// Deliberately corrupt every run; verification must then fail.
    #[arg(long, value_enum)]
    inject: Option<Inject>,
    /// Directory for report.tsv, per-instance reports and counterexamples.
    #[arg(long)]
    report_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct NormalizeArgs {
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Back-map sidecar; defaults to the output path with `.backmap` added.
    #[arg(long)]
    backmap: Option<PathBuf>,
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = match error.downcast_ref::<Error>() {
            Some(Error::Unbounded { .. } | Error::Degenerate(_)) => 3,
            _ => 2,
        };
        Failure { code, error }
    }
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        anyhow::Error::from(error).into()
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> CliResult<u8> {
    let config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    init_threads()?;
    match cli.command {
        Command::Generate(a) => generate(a, &config),
        Command::Solve(a) => solve(a, &config),
        Command::Exact(a) => exact(a, &config),
        Command::Verify(a) => verify(a, &config),
        Command::Normalize(a) => normalize(a, &config),
    }
}

fn init_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("MMLP_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| anyhow!("MMLP_THREADS must be a positive integer, got `{value}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("configuring the thread pool")?;
    Ok(())
}

fn params(args: &SolverArgs, config: &Config) -> CliResult<Params> {
    let period = args.period.or(config.period).unwrap_or(3);
    let tol = args.tol.or(config.bisect_tol).unwrap_or(1e-9);
    let mut p = Params::new(period, tol)?;
    if let Some(h) = args.horizon.or(config.horizon) {
        p = p.with_horizon(h)?;
    }
    Ok(p)
}

fn input_path(flag: Option<PathBuf>, config: &Config) -> CliResult<PathBuf> {
    flag.or_else(|| config.instances.first().cloned())
        .ok_or_else(|| anyhow!("no input instance; pass --in").into())
}

fn read_instance(path: &Path) -> CliResult<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_instance(&text).with_context(|| format!("parsing {}", path.display()))?)
}

fn write_output(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn out_path(flag: Option<PathBuf>, config: &Config, default_name: &str) -> Option<PathBuf> {
    flag.or_else(|| config.output_dir.as_ref().map(|d| d.join(default_name)))
}

fn generate(a: GenerateArgs, config: &Config) -> CliResult<u8> {
    let kind = match (a.normalized, a.tree) {
        (_, true) => GeneratorKind::NormalizedTree,
        (true, false) => GeneratorKind::Normalized,
        (false, false) => GeneratorKind::General,
    };
    let seed = a.seed.or(config.seed).unwrap_or(0);
    let inst = generate_random(a.agents, a.delta_i, a.delta_k, seed, kind)?;
    let text = serialize_instance(&inst)?;
    write_output(out_path(a.out, config, "instance.mmlp").as_deref(), &text)?;
    Ok(0)
}

fn exit_code_for_unbounded(inst: &Instance) -> CliResult<()> {
    if let Err(e) = prepare(inst) {
        if let Error::Unbounded { agents } = &e {
            eprintln!("unbounded_agents {}", join(agents.iter()));
        }
        return Err(e.into());
    }
    Ok(())
}

fn join<T: ToString>(items: impl Iterator<Item = T>) -> String {
    items.map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn solve(a: SolveArgs, config: &Config) -> CliResult<u8> {
    let p = params(&a.solver, config)?;
    let inst = read_instance(&input_path(a.input, config)?)?;
    exit_code_for_unbounded(&inst)?;
    let run = solve_instance(&inst, &p)?;
    let out = out_path(a.out, config, "solution.txt");
    let solution = serialize_solution(&run.x, run.utility);
    if let Some(path) = &out {
        fs::write(path, &solution).with_context(|| format!("writing {}", path.display()))?;
    } else {
        print!("{solution}");
    }
    if let Some(path) = a.g_table {
        fs::write(&path, run.local.g.to_tsv())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let d = &run.degeneracy;
    println!("R {}", p.period());
    println!("horizon {}", p.horizon());
    println!("agents {}", inst.n_agents());
    if !d.is_clean() {
        println!("deleted_constraints {}", join(d.deleted_constraints.iter()));
        println!(
            "zero_forcing_objectives {}",
            join(d.zero_forcing_objectives.iter())
        );
        println!("zeroed_agents {}", join(d.zeroed_agents.iter()));
    }
    if out.is_some() {
        println!("omega {:?}", run.utility);
    }
    Ok(0)
}

fn exact(a: ExactArgs, config: &Config) -> CliResult<u8> {
    let inst = read_instance(&input_path(a.input, config)?)?;
    let (omega, x) = solve_exact(&inst)?;
    let out = out_path(a.out, config, "exact.txt");
    let text = serialize_solution(&x, omega);
    match &out {
        Some(path) => {
            fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
            println!("omega {omega:?}");
        }
        None => print!("{text}"),
    }
    Ok(0)
}

fn normalize(a: NormalizeArgs, config: &Config) -> CliResult<u8> {
    let inst = read_instance(&input_path(a.input, config)?)?;
    exit_code_for_unbounded(&inst)?;
    let (normalized, backmap, _) = prepare(&inst)?;
    let out = out_path(a.out, config, "normalized.mmlp")
        .ok_or_else(|| anyhow!("normalize needs --out"))?;
    let sidecar = a.backmap.unwrap_or_else(|| {
        let mut s = out.clone().into_os_string();
        s.push(".backmap");
        PathBuf::from(s)
    });
    let ni = normalized.instance.instance();
    fs::write(&out, serialize_instance(ni)?)
        .with_context(|| format!("writing {}", out.display()))?;
    fs::write(&sidecar, serialize_backmap(&backmap))
        .with_context(|| format!("writing {}", sidecar.display()))?;
    println!("agents {}", ni.n_agents());
    println!("constraints {}", ni.n_constraints());
    println!("objectives {}", ni.n_objectives());
    println!("multiplier {:?}", backmap.multiplier);
    println!("backmap {}", sidecar.display());
    Ok(0)
}

/// One instance to verify and the name it is reported under.
struct Case {
    name: String,
    instance: Instance,
}

fn sweep_cases(sweep: &SweepConfig, count: usize, seed: u64) -> CliResult<Vec<Case>> {
    let kind = match (sweep.normalized, sweep.tree) {
        (_, true) => GeneratorKind::NormalizedTree,
        (true, false) => GeneratorKind::Normalized,
        (false, false) => GeneratorKind::General,
    };
    (0..count as u64)
        .map(|j| {
            let s = seed + j;
            let instance = generate_random(sweep.agents, sweep.delta_i, sweep.delta_k, s, kind)?;
            Ok(Case {
                name: format!("sweep-{s}"),
                instance,
            })
        })
        .collect()
}

fn verify(a: VerifyArgs, config: &Config) -> CliResult<u8> {
    let p = params(&a.solver, config)?;
    let mut cases = Vec::new();
    let inputs = if a.inputs.is_empty() {
        config.instances.clone()
    } else {
        a.inputs.clone()
    };
    for path in &inputs {
        let name = path
            .file_stem()
            .map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned());
        cases.push(Case {
            name,
            instance: read_instance(path)?,
        });
    }
    let sweep = config.sweep.clone().unwrap_or_default();
    if let Some(count) = a.sweep.or(config.sweep.as_ref().map(|s| s.count)) {
        cases.extend(sweep_cases(
            &sweep,
            count,
            a.seed.or(config.seed).unwrap_or(0),
        )?);
    }
    if cases.is_empty() {
        return Err(anyhow!("nothing to verify; pass --in or --sweep").into());
    }
    let report_dir = a.report_dir.clone().or_else(|| config.output_dir.clone());
    if let Some(dir) = &report_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut tsv = format!("instance\t{}\tlocality\n", Report::tsv_header());
    let mut failed = 0;
    for case in &cases {
        exit_code_for_unbounded(&case.instance)?;
        let start = Instant::now();
        let mut run = solve_instance(&case.instance, &p)?;
        let local_time = start.elapsed();
        match a.inject {
            Some(Inject::Solution) => run = corrupted(run, Corruption::ScaleOutput(3.0)),
            Some(Inject::GTable) => run = corrupted(run, Corruption::TopMinus),
            None => {}
        }
        let mut report = report_for_run(&case.instance, &p, &run, Some(&LemmaOptions::default()))?;
        report.timings.local = local_time;
        let locality = locality(
            &run,
            &p,
            a.locality_pairs,
            a.seed.or(config.seed).unwrap_or(0),
        )?;
        let passed = report.passed() && locality.differs == 0;
        if !passed {
            failed += 1;
        }
        println!(
            "instance {} passed {passed} ratio {:?} ratio_bound {:?} exact_optimum {:?} local_utility {:?}",
            case.name, report.ratio, report.ratio_bound, report.exact_optimum, report.local_utility
        );
        if !passed {
            for r in report.lemmas.iter().flat_map(|s| s.failures()) {
                println!("failure {} {} {}", case.name, r.name, r.outcome);
            }
            if !report.local_feasible {
                println!(
                    "failure {} local-feasible output violates a constraint",
                    case.name
                );
            }
            if !report.ratio_ok() {
                println!(
                    "failure {} ratio {:?} above {:?}",
                    case.name, report.ratio, report.ratio_bound
                );
            }
            if locality.differs > 0 {
                println!(
                    "failure {} locality {} pairs with equal views differ",
                    case.name, locality.differs
                );
            }
        }
        tsv.push_str(&format!(
            "{}\t{}\t{}/{}\n",
            case.name,
            report.to_tsv_row(),
            locality.identical,
            locality.pairs
        ));
        if let Some(dir) = &report_dir {
            let mut text = format!("instance {}\n", case.name);
            text.push_str(&report.to_text());
            text.push_str(&format!(
                "locality_identical {}\nlocality_pairs {}\n",
                locality.identical, locality.pairs
            ));
            write_file(&dir.join(format!("{}.report.txt", case.name)), &text)?;
            if !passed {
                write_file(
                    &dir.join(format!("{}.counterexample.mmlp", case.name)),
                    &serialize_instance(&case.instance)?,
                )?;
                write_file(
                    &dir.join(format!("{}.g.tsv", case.name)),
                    &run.local.g.to_tsv(),
                )?;
                write_file(
                    &dir.join(format!("{}.solution.txt", case.name)),
                    &serialize_solution(&run.x, report.local_utility),
                )?;
            }
        }
    }
    if let Some(dir) = &report_dir {
        write_file(&dir.join("report.tsv"), &tsv)?;
    }
    println!("instances {}", cases.len());
    println!("failed {failed}");
    Ok(if failed == 0 { 0 } else { 1 })
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn corrupted(mut run: PipelineRun, how: Corruption) -> PipelineRun {
    run.local = corrupt_run(&run.local, how);
    if let Corruption::ScaleOutput(f) = how {
        run.x.values.iter_mut().for_each(|x| *x *= f);
    }
    run
}

#[derive(Default)]
struct LocalityTally {
    pairs: usize,
    identical: usize,
    differs: usize,
}

/// Compares agents of the normalized instance with copies of themselves in
/// a random double cover, and sampled pairs within the instance.
fn locality(run: &PipelineRun, p: &Params, pairs: usize, seed: u64) -> CliResult<LocalityTally> {
    let inst = run.normalized.instance.instance();
    let mut tally = LocalityTally::default();
    let n = inst.n_agents();
    if n == 0 || pairs == 0 {
        return Ok(tally);
    }
    let x = &run.local.x;
    let (cover, proj) = random_cover(inst, 2, seed)?;
    let y = solve_local(&NormalizedInstance::certify(cover.clone())?, p)?;
    let mut signer = ViewSigner::new();
    let step = (n / pairs).max(1);
    let mut record = |l: Locality| {
        tally.pairs += 1;
        match l {
            Locality::Identical => tally.identical += 1,
            Locality::Differs => tally.differs += 1,
            Locality::NotApplicable => {}
        }
    };
    for v in (0..n).step_by(step).take(pairs) {
        let c = v + n;
        record(check_locality_with(
            &mut signer,
            (&cover, &y, c),
            (inst, x, proj[c]),
            p.horizon(),
        )?);
        let w = (v + 1) % n;
        record(check_locality_with(
            &mut signer,
            (inst, x, v),
            (inst, x, w),
            p.horizon(),
        )?);
    }
    Ok(tally)
}
