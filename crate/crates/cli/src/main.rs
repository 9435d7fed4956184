//! `tpspace`: run axiom suites, flows, algebra reconstruction, ħ inference and
//! lattice checks from the command line.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 on invalid
//! input (with a diagnostic on standard error).

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use tpspace::axioms::{self, Suite, SuiteConfig, SuiteReport};
use tpspace::json::{
    self, trajectory_json, BundleJson, FlowComparisonJson, HamiltonianJson, HbarJson,
    HbarSectorJson, InitialStateJson, LatticeJson, ReconstructionJson,
};
use tpspace::lattice::{check_covering, check_orthomodular, random_nested_pair, random_subspace};
use tpspace::linalg::random_hermitian;
use tpspace::poisson::{
    bracket_sample, flow_operator, infer_hbar, relative_error, BracketOracle, FlowMethod,
};
use tpspace::reconstruct::{associativity_residual, identify_algebra, star_product};
use tpspace::{tolerance, SeededRng, StateSpace};

#[derive(Parser, Debug)]
#[command(
    name = "tpspace",
    about = "Transition-probability spaces: axiom checks, flows and algebra reconstruction"
)]
#[command(disable_version_flag = true, arg_required_else_help = true)]
struct Cli {
    /// Check that FILE is a well-formed document of any known kind.
    #[arg(long, value_name = "FILE", global = false)]
    validate: Option<PathBuf>,

    /// Print the tool and schema versions.
    #[arg(short = 'V', long)]
    version: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run an axiom suite over a state-space bundle and write its report.
    Verify(VerifyArgs),
    /// Integrate a Hamiltonian flow from an initial state.
    Flow(FlowArgs),
    /// Rebuild the observable algebra of a quantum space.
    Reconstruct(ReconstructArgs),
    /// Infer ħ per sector from bracket and commutator data.
    Hbar(HbarArgs),
    /// Sample the orthomodular and covering laws of the subspace lattice.
    Lattice(LatticeArgs),
}

#[derive(Args, Debug)]
struct Output {
    /// Output path, `-` for standard output.
    #[arg(short = 'o', long = "output", default_value = "-")]
    output: String,
}

#[derive(Args, Debug)]
struct SeedArg {
    #[arg(long, env = "TPSPACE_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum SuiteArg {
    Qm,
    Cm,
    Reconstruction,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Qm => Suite::Qm,
            SuiteArg::Cm => Suite::Cm,
            SuiteArg::Reconstruction => Suite::Reconstruction,
        }
    }
}

fn parse_tolerance(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or("expected NAME=VALUE")?;
    let value: f64 = value
        .parse()
        .map_err(|e| format!("bad tolerance value: {e}"))?;
    Ok((name.to_string(), value))
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_name = "FILE")]
    space: PathBuf,
    #[arg(long, value_enum)]
    suite: SuiteArg,
    #[command(flatten)]
    seed: SeedArg,
    /// Trials per check.
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Tolerance override, repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE", value_parser = parse_tolerance)]
    tolerances: Vec<(String, f64)>,
    /// Time grid for flow checks.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [0.0, 0.5, 1.0, 2.0, 5.0, 10.0])]
    times: Vec<f64>,
    /// Largest sector dimension for the reconstruction suite.
    #[arg(long, default_value_t = 16)]
    max_dim: usize,
    /// Minimum RK4 step count over the time horizon.
    #[arg(long, default_value_t = FlowMethod::DEFAULT_RK4_STEPS)]
    rk4_steps: usize,
    /// Worker threads for independent checks.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    out: Output,
    /// Also write the check table as CSV.
    #[arg(long, value_name = "FILE")]
    emit_csv: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum MethodArg {
    Exact,
    Rk4,
}

#[derive(Args, Debug)]
struct FlowArgs {
    /// Hamiltonian as a matrix or observable document.
    #[arg(long, value_name = "FILE")]
    hamiltonian: PathBuf,
    /// Initial state: a bundle, a state record or a bare vector.
    #[arg(long, value_name = "FILE")]
    state: PathBuf,
    /// Explicit time grid.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        conflicts_with = "t_max"
    )]
    times: Option<Vec<f64>>,
    /// End of a uniform grid starting at 0.
    #[arg(long, default_value_t = 1.0)]
    t_max: f64,
    /// Points of the uniform grid.
    #[arg(long, default_value_t = 101)]
    points: usize,
    #[arg(long, value_enum, default_value = "exact")]
    method: MethodArg,
    /// RK4 steps over the time horizon.
    #[arg(long, default_value_t = FlowMethod::DEFAULT_RK4_STEPS)]
    steps: usize,
    /// Planck constant; defaults to the bundle's sector value, else 1.
    #[arg(long)]
    hbar: Option<f64>,
    /// Run both methods and report their largest projector distance.
    #[arg(long)]
    compare: bool,
    #[command(flatten)]
    out: Output,
    /// Also write the trajectory amplitudes as CSV.
    #[arg(long, value_name = "FILE")]
    emit_csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReconstructArgs {
    #[arg(long, value_name = "FILE")]
    space: PathBuf,
    #[command(flatten)]
    seed: SeedArg,
    /// Random triples per sector for the associativity and oracle residuals.
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[command(flatten)]
    out: Output,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ModeArg {
    Operator,
    FiniteDifference,
}

#[derive(Args, Debug)]
struct HbarArgs {
    #[arg(long, value_name = "FILE")]
    space: PathBuf,
    /// Planck constant used to generate the data; overrides the bundle's value in every sector.
    #[arg(long)]
    true_hbar: Option<f64>,
    #[command(flatten)]
    seed: SeedArg,
    /// Bracket samples per sector.
    #[arg(long, default_value_t = 32)]
    samples: usize,
    /// How brackets are measured.
    #[arg(long, value_enum, default_value = "finite-difference")]
    mode: ModeArg,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct LatticeArgs {
    #[arg(long)]
    dim: usize,
    /// Sampled pairs per law.
    #[arg(long, default_value_t = 1000)]
    pairs: usize,
    #[command(flatten)]
    seed: SeedArg,
    #[command(flatten)]
    out: Output,
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn parse<T: for<'de> serde::Deserialize<'de>>(path: &Path) -> anyhow::Result<T> {
    serde_json::from_str(&read(path)?)
        .with_context(|| format!("{} is not a valid document", path.display()))
}

fn load_space(path: &Path) -> anyhow::Result<StateSpace> {
    let bundle: BundleJson = parse(path)?;
    Ok(bundle.to_space()?)
}

fn emit<T: Serialize>(value: &T, out: &Output) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    if out.output == "-" {
        std::io::stdout().write_all(text.as_bytes())?;
    } else {
        fs::write(&out.output, text).with_context(|| format!("cannot write {}", out.output))?;
    }
    Ok(())
}

fn write_report_csv(report: &SuiteReport, path: &Path) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["name", "sector", "trials", "worst", "tol", "pass", "note"])?;
    for c in &report.checks {
        w.write_record([
            c.name.clone(),
            c.sector.map(|s| s.to_string()).unwrap_or_default(),
            c.trials.to_string(),
            c.worst.to_string(),
            c.tol.to_string(),
            c.pass.to_string(),
            c.note.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> anyhow::Result<bool> {
    let space = load_space(&args.space)?;
    let cfg = SuiteConfig {
        seed: args.seed.seed,
        trials: args.trials,
        tolerances: args.tolerances.iter().cloned().collect::<BTreeMap<_, _>>(),
        times: args.times.clone(),
        max_dim: args.max_dim,
        rk4_steps: args.rk4_steps,
        jobs: args.jobs,
    };
    let report = axioms::run_suite(args.suite.into(), &space, &cfg)?;
    emit(&report, &args.out)?;
    if let Some(path) = &args.emit_csv {
        write_report_csv(&report, path)?;
    }
    Ok(report.pass)
}

fn cmd_flow(args: &FlowArgs) -> anyhow::Result<bool> {
    let h = parse::<HamiltonianJson>(&args.hamiltonian)?.to_operator()?;
    let initial: InitialStateJson = parse(&args.state)?;
    let rho = initial.to_state()?;
    let hbar = match (args.hbar, &initial) {
        (Some(h), _) => h,
        (None, InitialStateJson::Bundle(b)) => b.to_space()?.hbar(rho.sector())?,
        (None, _) => 1.0,
    };
    BracketOracle::operator(hbar)?;
    let times = match &args.times {
        Some(t) if t.is_empty() => bail!("empty time grid"),
        Some(t) => t.clone(),
        None => {
            if args.points == 0 {
                bail!("--points must be positive");
            }
            if args.points == 1 {
                vec![0.0]
            } else {
                let n = (args.points - 1) as f64;
                (0..args.points)
                    .map(|k| args.t_max * k as f64 / n)
                    .collect()
            }
        }
    };
    let method = match args.method {
        MethodArg::Exact => FlowMethod::Exact,
        MethodArg::Rk4 => FlowMethod::Rk4 { steps: args.steps },
    };
    let flow = flow_operator(&h, &rho, &times, hbar, method)?;
    if let Some(path) = &args.emit_csv {
        let mut w = csv::Writer::from_path(path)?;
        let dim = h.dim();
        let mut header = vec!["t".to_string()];
        header.extend((0..dim).map(|k| format!("re{k}")));
        header.extend((0..dim).map(|k| format!("im{k}")));
        w.write_record(&header)?;
        for (t, s) in &flow.trajectory {
            let v = s.vector().expect("flows are quantum");
            let mut row = vec![t.to_string()];
            row.extend(v.iter().map(|z| z.re.to_string()));
            row.extend(v.iter().map(|z| z.im.to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
    }
    if !args.compare {
        emit(&trajectory_json(&flow), &args.out)?;
        return Ok(true);
    }
    let other = match method {
        FlowMethod::Exact => FlowMethod::Rk4 { steps: args.steps },
        FlowMethod::Rk4 { .. } => FlowMethod::Exact,
    };
    let reference = flow_operator(&h, &rho, &times, hbar, other)?;
    let max_distance = flow.max_distance(&reference);
    let tol = tolerance::INTEGRATED_FLOW;
    let doc = FlowComparisonJson {
        method: match method {
            FlowMethod::Exact => "exact".into(),
            FlowMethod::Rk4 { .. } => "rk4".into(),
        },
        max_distance,
        tol,
        pass: max_distance <= tol,
        trajectory: trajectory_json(&flow),
    };
    emit(&doc, &args.out)?;
    Ok(doc.pass)
}

fn cmd_reconstruct(args: &ReconstructArgs) -> anyhow::Result<bool> {
    let space = load_space(&args.space)?;
    if !space.is_all_quantum() {
        bail!("reconstruction needs quantum sectors only");
    }
    let rng = SeededRng::new(args.seed.seed, 0);
    let id = identify_algebra(&space, &rng)?;
    let (mut assoc, mut oracle_gap) = (0.0f64, 0.0f64);
    for sector in 0..space.len() {
        let oracle = BracketOracle::operator(space.hbar(sector)?)?;
        for k in 0..args.trials {
            let mut r = rng.substream(((sector as u64 + 1) << 32) | k as u64);
            let f = axioms::random_observable(&space, sector, &mut r)?;
            let g = axioms::random_observable(&space, sector, &mut r)?;
            let h = axioms::random_observable(&space, sector, &mut r)?;
            assoc = assoc.max(associativity_residual(&f, &g, &h, &oracle)?);
            let product = f.operator_form(sector).expect("sector form")
                * g.operator_form(sector).expect("sector form");
            oracle_gap =
                oracle_gap.max(star_product(&f, &g, &oracle)?.form_distance_to(sector, &product));
        }
    }
    let tol = tolerance::ALGEBRA;
    let membership = id
        .reports
        .iter()
        .fold(0.0f64, |a, r| a.max(r.membership_residual));
    let spans_ok = id.reports.iter().all(|r| r.span_rank == r.dim * r.dim);
    let doc = ReconstructionJson {
        blocks: id.blocks.clone(),
        span_ranks: id.reports.iter().map(|r| r.span_rank).collect(),
        membership_residual: membership,
        assoc_residual: assoc,
        oracle_residual: oracle_gap,
        cross_sector_residual: id.cross_sector_residual,
        tol,
        pass: spans_ok
            && [membership, assoc, oracle_gap, id.cross_sector_residual]
                .iter()
                .all(|&x| x <= tol),
    };
    emit(&doc, &args.out)?;
    Ok(doc.pass)
}

fn cmd_hbar(args: &HbarArgs) -> anyhow::Result<bool> {
    let space = load_space(&args.space)?;
    if args.samples == 0 {
        bail!("--samples must be positive");
    }
    let rng = SeededRng::new(args.seed.seed, 0);
    let mut sectors = Vec::new();
    for sector in 0..space.len() {
        let Ok(dim) = space.quantum_dim(sector) else {
            continue;
        };
        let truth = match args.true_hbar {
            Some(h) => h,
            None => space.hbar(sector)?,
        };
        let oracle = match args.mode {
            ModeArg::Operator => BracketOracle::operator(truth)?,
            ModeArg::FiniteDifference => BracketOracle::finite_difference(truth)?,
        };
        let mut samples = Vec::with_capacity(args.samples);
        for k in 0..args.samples {
            let mut r = rng.substream(((sector as u64) << 32) | k as u64);
            let a = random_hermitian::<f64, _>(dim, &mut r);
            let b = random_hermitian::<f64, _>(dim, &mut r);
            let rho = space.random_state(sector, &mut r)?;
            samples.push(bracket_sample(&a, &b, &rho, &oracle)?);
        }
        let est = infer_hbar(&samples).with_context(|| format!("sector {sector}"))?;
        sectors.push(HbarSectorJson {
            sector,
            true_hbar: truth,
            hbar_est: est,
            rel_error: relative_error(est, truth),
            samples: samples.len(),
        });
    }
    let first = sectors
        .first()
        .ok_or_else(|| anyhow!("space has no quantum sector"))?;
    let tol = match args.mode {
        ModeArg::Operator => tolerance::HBAR_ROUND_TRIP,
        ModeArg::FiniteDifference => tolerance::FINITE_DIFFERENCE,
    };
    let doc = HbarJson {
        hbar_est: first.hbar_est,
        pass: sectors.iter().all(|s| s.rel_error <= tol),
        sectors,
        tol,
    };
    emit(&doc, &args.out)?;
    Ok(doc.pass)
}

fn cmd_lattice(args: &LatticeArgs) -> anyhow::Result<bool> {
    let n = args.dim;
    if n == 0 {
        bail!("--dim must be positive");
    }
    let rng = SeededRng::new(args.seed.seed, 0);
    let (mut om_fail, mut cov_fail) = (0usize, 0usize);
    for k in 0..args.pairs {
        use rand::Rng;
        let mut r = rng.substream(2 * k as u64);
        let outer = r.random_range(0..=n);
        let inner = r.random_range(0..=outer);
        let (v, w) = random_nested_pair::<f64, _>(0, n, inner, outer, &mut r)?;
        if !check_orthomodular(&v, &w)? {
            om_fail += 1;
        }
        let mut r = rng.substream(2 * k as u64 + 1);
        let rank = r.random_range(0..n);
        let v = random_subspace::<f64, _>(0, n, rank, &mut r)?;
        let atom = StateSpace::quantum(&[n])?.random_state(0, &mut r)?;
        if !check_covering(&atom, &v)? {
            cov_fail += 1;
        }
    }
    let doc = LatticeJson {
        dim: n,
        pairs: args.pairs,
        orthomodular_pass: om_fail == 0,
        covering_pass: cov_fail == 0,
        orthomodular_failures: om_fail,
        covering_failures: cov_fail,
    };
    emit(&doc, &args.out)?;
    Ok(om_fail == 0 && cov_fail == 0)
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    if cli.version {
        println!(
            "tpspace {} (schema {})",
            env!("CARGO_PKG_VERSION"),
            json::SCHEMA_VERSION
        );
        return Ok(true);
    }
    if let Some(path) = &cli.validate {
        let kind = json::validate_document(&read(path)?)?;
        println!("{}", kind.name());
        return Ok(true);
    }
    match &cli.command {
        Some(Command::Verify(a)) => cmd_verify(a),
        Some(Command::Flow(a)) => cmd_flow(a),
        Some(Command::Reconstruct(a)) => cmd_reconstruct(a),
        Some(Command::Hbar(a)) => cmd_hbar(a),
        Some(Command::Lattice(a)) => cmd_lattice(a),
        None => bail!("no subcommand given"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
