//! Executable axiom suites.
//!
//! Each suite expands into independent checks, each check into seeded trials.
//! Trial `k` of a check draws from its own stream, so adding trials never
//! changes the earlier ones. Checks may run on a thread pool; the report is
//! always ordered by (sector, name).

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, random_hermitian, ComplexMatrix};
use crate::poisson::{
    bracket_observable, bracket_sample, canonical_bracket, check_invariance, check_unitarity,
    flow_operator, infer_hbar, leaf_rank_full, relative_error, BracketOracle, FlowMethod,
};
use crate::reconstruct::{
    associativity_residual, identify_algebra, jordan, star_product, symmetrized_product,
};
use crate::rng::SeededRng;
use crate::states::{
    decompose_sectors, transition_probability, Observable, PureState, Sector, StateSpace, Term,
};
use crate::transition::{check_qm2, superpositions, Superposition};
use crate::C64;

/// Phase advanced per RK4 step is kept at or below this many radians.
const RK4_MAX_PHASE_STEP: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Qm,
    Cm,
    Reconstruction,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Qm => "qm",
            Suite::Cm => "cm",
            Suite::Reconstruction => "reconstruction",
        }
    }

    /// Check names with their default tolerances.
    pub fn tolerances(self) -> &'static [(&'static str, f64)] {
        match self {
            Suite::Qm => &[
                ("tp_symmetry", 0.0),
                ("tp_range", 1e-12),
                ("tp_identity", 1e-9),
                ("basis_sum", 1e-10),
                ("unitarity_exact", 1e-10),
                ("unitarity_rk4", 1e-6),
                ("rk4_vs_exact", 1e-6),
                ("invariance", 1e-10),
                ("qm2", 1e-9),
                ("leaf_rank", 0.0),
                ("cross_sector_probability", 0.0),
                ("cross_sector_superposition", 0.0),
                ("sector_decomposition", 0.0),
            ],
            Suite::Cm => &[
                ("tp_symmetry", 0.0),
                ("delta", 0.0),
                ("pair_orthoclosure", 0.0),
                ("point_sectors", 0.0),
                ("canonical_bracket", 1e-6),
            ],
            Suite::Reconstruction => &[
                ("jordan_commutativity", 1e-9),
                ("jordan_bilinearity", 1e-9),
                ("jordan_oracle", 1e-9),
                ("jordan_identity", 1e-8),
                ("star_oracle", 1e-9),
                ("associativity", 1e-9),
                ("hermitian_split", 1e-9),
                ("bracket_antisymmetry", 1e-10),
                ("jacobi", 1e-8),
                ("leibniz", 1e-8),
                ("algebra_span", 0.0),
                ("algebra_membership", 1e-9),
                ("algebra_cross_sector", 1e-9),
                ("hbar_round_trip", 1e-9),
                ("hbar_finite_difference", 1e-6),
                ("hbar_sector_ratio", 1e-9),
            ],
        }
    }
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Trials per check.
    pub trials: usize,
    /// Per-check tolerance overrides, keyed by check name.
    pub tolerances: BTreeMap<String, f64>,
    /// Time grid for flow checks.
    pub times: Vec<f64>,
    /// Largest sector dimension the reconstruction suite accepts.
    pub max_dim: usize,
    /// Minimum RK4 step count over the time horizon.
    pub rk4_steps: usize,
    /// Worker threads; affects wall time only, so it is not echoed.
    #[serde(skip, default = "one")]
    pub jobs: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 100,
            tolerances: BTreeMap::new(),
            times: vec![0.0, 0.5, 1.0, 2.0, 5.0, 10.0],
            max_dim: 16,
            rk4_steps: FlowMethod::DEFAULT_RK4_STEPS,
            jobs: 1,
        }
    }
}

impl SuiteConfig {
    fn validate(&self, suite: Suite) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidInput("trials must be at least 1".into()));
        }
        if self.jobs == 0 {
            return Err(Error::InvalidInput("jobs must be at least 1".into()));
        }
        if self.times.is_empty() || self.times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidInput(
                "time grid must be non-empty and finite".into(),
            ));
        }
        for (name, &tol) in &self.tolerances {
            if !suite.tolerances().iter().any(|(n, _)| n == name) {
                return Err(Error::InvalidInput(format!(
                    "unknown check {name:?} for the {} suite",
                    suite.name()
                )));
            }
            if !(tol.is_finite() && tol > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "tolerance for {name} must be positive"
                )));
            }
        }
        Ok(())
    }

    fn tol(&self, suite: Suite, name: &str) -> f64 {
        self.tolerances.get(name).copied().unwrap_or_else(|| {
            suite
                .tolerances()
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, t)| *t)
                .expect("check has a default tolerance")
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckRecord {
    pub name: String,
    /// `None` for checks spanning several sectors.
    pub sector: Option<usize>,
    pub trials: usize,
    pub worst: f64,
    pub tol: f64,
    pub pass: bool,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteReport {
    pub suite: Suite,
    pub pass: bool,
    pub checks: Vec<CheckRecord>,
    pub config: SuiteConfig,
}

impl SuiteReport {
    pub fn check(&self, name: &str, sector: Option<usize>) -> Option<&CheckRecord> {
        self.checks
            .iter()
            .find(|c| c.name == name && c.sector == sector)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

// FNV-1a, so stream ids do not depend on the platform or the std hasher
fn stream_id(name: &str, sector: Option<usize>) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let s = sector.map_or(u64::MAX, |s| s as u64);
    h ^ s.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

struct Ctx<'a> {
    suite: Suite,
    cfg: &'a SuiteConfig,
}

impl Ctx<'_> {
    fn rng(&self, name: &str, sector: Option<usize>) -> SeededRng {
        SeededRng::new(self.cfg.seed, stream_id(name, sector))
    }

    fn record(
        &self,
        name: &str,
        sector: Option<usize>,
        trials: usize,
        worst: f64,
        note: impl Into<String>,
    ) -> CheckRecord {
        let tol = self.cfg.tol(self.suite, name);
        let pass = worst.is_finite() && worst <= tol;
        CheckRecord {
            name: name.to_string(),
            sector,
            trials,
            worst: if worst.is_finite() { worst } else { f64::MAX },
            tol,
            pass,
            note: note.into(),
        }
    }

    fn skipped(&self, name: &str, sector: Option<usize>, why: &str) -> CheckRecord {
        let mut r = self.record(name, sector, 0, 0.0, format!("skipped: {why}"));
        r.pass = true;
        r
    }

    fn failed(&self, name: &str, sector: Option<usize>, err: &Error) -> CheckRecord {
        let mut r = self.record(name, sector, 0, f64::MAX, format!("error: {err}"));
        r.pass = false;
        r
    }
}

type Job<'a> = Box<dyn Fn(&Ctx) -> Vec<CheckRecord> + Send + Sync + 'a>;

/// Wrap a fallible single-record check.
fn job<'a>(
    name: &'static str,
    sector: Option<usize>,
    f: impl Fn(&Ctx, &str, Option<usize>) -> Result<CheckRecord> + Send + Sync + 'a,
) -> Job<'a> {
    Box::new(move |ctx| vec![f(ctx, name, sector).unwrap_or_else(|e| ctx.failed(name, sector, &e))])
}

fn run_jobs(suite: Suite, cfg: &SuiteConfig, jobs: Vec<Job<'_>>) -> Result<SuiteReport> {
    let ctx = Ctx { suite, cfg };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    let nested: Vec<Vec<CheckRecord>> = pool.install(|| jobs.par_iter().map(|j| j(&ctx)).collect());
    let mut checks: Vec<CheckRecord> = nested.into_iter().flatten().collect();
    checks.sort_by(|a, b| (a.sector, &a.name).cmp(&(b.sector, &b.name)));
    Ok(SuiteReport {
        suite,
        pass: checks.iter().all(|c| c.pass),
        checks,
        config: cfg.clone(),
    })
}

fn quantum_sectors(space: &StateSpace<f64>) -> Vec<(usize, usize, f64)> {
    space
        .sectors()
        .iter()
        .enumerate()
        .filter_map(|(id, s)| match s {
            Sector::Quantum { dim, hbar } => Some((id, *dim, *hbar)),
            Sector::Classical { .. } => None,
        })
        .collect()
}

fn random_phase<G: Rng + ?Sized>(rng: &mut G) -> C64 {
    let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    C64::new(theta.cos(), theta.sin())
}

fn rk4_steps(cfg: &SuiteConfig, hbar: f64) -> usize {
    // the Hamiltonian p_ρ has unit norm
    let horizon = cfg.times.iter().fold(0.0f64, |a, t| a.max(t.abs()));
    let needed = (horizon / (hbar * RK4_MAX_PHASE_STEP)).ceil() as usize;
    cfg.rk4_steps.max(needed).max(1)
}

/// Axioms of a space of quantum sectors: transition-probability laws,
/// unitarity, two-level superpositions and leaf rank per sector, plus the
/// superselection rules between sectors.
pub fn run_qm_suite(space: &StateSpace<f64>, cfg: &SuiteConfig) -> Result<SuiteReport> {
    if !space.is_all_quantum() {
        return Err(Error::InvalidSpace(
            "the qm suite needs quantum sectors only".into(),
        ));
    }
    cfg.validate(Suite::Qm)?;
    let mut jobs: Vec<Job> = Vec::new();
    for (s, dim, hbar) in quantum_sectors(space) {
        let sec = Some(s);
        jobs.push(job("tp_symmetry", sec, move |ctx, name, sec| {
            let base = ctx.rng(name, sec);
            let mut worst = 0.0f64;
            for k in 0..ctx.cfg.trials {
                let mut r = base.substream(k as u64);
                let a = space.random_state(s, &mut r)?;
                let b = space.random_state(s, &mut r)?;
                worst = worst
                    .max((transition_probability(&a, &b)? - transition_probability(&b, &a)?).abs());
            }
            Ok(ctx.record(name, sec, ctx.cfg.trials, worst, ""))
        }));
        jobs.push(job("tp_range", sec, move |ctx, name, sec| {
            let base = ctx.rng(name, sec);
            let mut worst = 0.0f64;
            for k in 0..ctx.cfg.trials {
                let mut r = base.substream(k as u64);
                let a = space.random_state(s, &mut r)?;
                let b = space.random_state(s, &mut r)?;
                for p in [
                    transition_probability(&a, &b)?,
                    transition_probability(&a, &a)?,
                ] {
                    worst = worst.max(-p).max(p - 1.0);
                }
            }
            Ok(ctx.record(name, sec, ctx.cfg.trials, worst, "excess outside [0, 1]"))
        }));
        jobs.push(job("tp_identity", sec, move |ctx, name, sec| {
            // equal rays (a phase apart) must give p = 1; distinct rays,
            // including 1e-3 perturbations, must not
            let tol = ctx.cfg.tol(ctx.suite, name);
            let base = ctx.rng(name, sec);
            let mut worst = 0.0f64;
            let mut mismatches = 0usize;
            for k in 0..ctx.cfg.trials {
                let mut r = base.substream(k as u64);
                let a = space.random_state(s, &mut r)?;
                let v = a.vector().expect("quantum");
                let same = PureState::from_vector(s, &(v * random_phase(&mut r)))?;
                worst = worst.max((transition_probability(&a, &same)? - 1.0).abs());
                if same.distance(&a) > tol {
                    mismatches += 1;
                }
                if dim > 1 {
                    let b = space.random_state(s, &mut r)?;
                    let near = PureState::from_vector(
                        s,
                        &(v + b.vector().expect("quantum") * C64::new(1e-3, 0.0)),
                    )?;
                    for other in [&b, &near] {
                        let p_is_one = (transition_probability(&a, other)? - 1.0).abs() <= tol;
                        let equal = a.distance(other) <= tol;
                        if p_is_one != equal {
                            mismatches += 1;
                        }
                    }
                }
            }
            let mut rec = ctx.record(
                name,
                sec,
                ctx.cfg.trials,
                worst,
                format!("{mismatches} iff violations"),
            );
            rec.pass &= mismatches == 0;
            Ok(rec)
        }));
        jobs.push(job("basis_sum", sec, move |ctx, name, sec| {
            let base = ctx.rng(name, sec);
            let mut worst = 0.0f64;
            for k in 0..ctx.cfg.trials {
                let mut r = base.substream(k as u64);
                let rho = space.random_state(s, &mut r)?;
                let eig = eig_hermitian(&random_hermitian::<f64, _>(dim, &mut r))?;
                let mut sum = 0.0;
                for j in 0..dim {
                    sum += transition_probability(
                        &rho,
                        &PureState::from_vector(s, &eig.eigenvector(j))?,
                    )?;
                }
                worst = worst.max((sum - 1.0).abs());
            }
            Ok(ctx.record(name, sec, ctx.cfg.trials, worst, "random orthonormal bases"))
        }));
        jobs.push(job("unitarity_exact", sec, move |ctx, name, sec| {
            let oracle = BracketOracle::operator(hbar)?;
            let base = ctx.rng(name, sec);
            let mut worst = 0.0f64;
            for k in 0..ctx.cfg.trials {
                let mut r = base.substream(k as u64);
                let [rho, a, b] = [0; 3].map(|_| space.random_state(s, &mut r));
                let rep =
                    check_unitarity(&rho?, &a?, &b?, &ctx.cfg.times, &oracle, FlowMethod::Exact)?;
                worst = worst.max(rep.max_drift);
            }
            Ok(ctx.record(
                name,
                sec,
                ctx.cfg.trials,
                worst,
                "model-verified: flows of p_rho",
            ))
        }));
        jobs.push(Box::new(move |ctx: &Ctx| {
            let steps = rk4_steps(ctx.cfg, hbar);
            let run = || -> Result<(f64, f64)> {
                let oracle = BracketOracle::operator(hbar)?;
                let base = ctx.rng("unitarity_rk4", sec);
                let (mut drift, mut gap) = (0.0f64, 0.0f64);
                for k in 0..ctx.cfg.trials {
                    let mut r = base.substream(k as u64);
                    let [rho, a, b] = [0; 3].map(|_| space.random_state(s, &mut r));
                    let (rho, a, b) = (rho?, a?, b?);
                    let method = FlowMethod::Rk4 { steps };
                    drift = drift.max(
                        check_unitarity(&rho, &a, &b, &ctx.cfg.times, &oracle, method)?.max_drift,
                    );
                    let h = Observable::p_rho(&rho)?.hermitian_form(s)?;
                    let exact = flow_operator(&h, &a, &ctx.cfg.times, hbar, FlowMethod::Exact)?;
                    let rk4 = flow_operator(&h, &a, &ctx.cfg.times, hbar, method)?;
                    gap = gap.max(exact.max_distance(&rk4));
                }
                Ok((drift, gap))
            };
            let note = format!("integrated: RK4 with {steps} steps");
            match run() {
                Ok((drift, gap)) => vec![
                    ctx.record("unitarity_rk4", sec, ctx.cfg.trials, drift, note.clone()),
                    ctx.record("rk4_vs_exact", sec, ctx.cfg.trials, gap, note),
                ],
                Err(e) => vec![
                    ctx.failed("unitarity_rk4", sec, &e),
                    ctx.failed("rk4_vs_exact", sec, &e),
                ],
            }
        }));
        jobs.push(job("invariance", sec, move |ctx, name, sec| {
            let oracle = BracketOracle::operator(hbar)?;
            let base = ctx.rng(name, sec);
            let mut worst = 0.0f64;
            for k in 0..ctx.cfg.trials {
                let mut r = base.substream(k as u64);
                let f = Observable::from_operator(s, &random_hermitian::<f64, _>(dim, &mut r))?;
                let a = space.random_state(s, &mut r)?;
                let b = space.random_state(s, &mut r)?;
                let rep =
                    check_invariance(&f, s, &a, &b, &ctx.cfg.times, &oracle, FlowMethod::Exact)?;
                worst = worst.max(rep.max_drift);
            }
            Ok(ctx.record(
                name,
                sec,
                ctx.cfg.trials,
                worst,
                "model property: flows of random f_A",
            ))
        }));
        jobs.push(job("qm2", sec, move |ctx, name, sec| {
            if dim == 1 {
                return Ok(ctx.skipped(name, sec, "sector of dimension 1 has no distinct pairs"));
            }
            let base = ctx.rng(name, sec);
            let mut worst = 0.0f64;
            let mut compared = 0;
            for k in 0..ctx.cfg.trials {
                let mut r = base.substream(k as u64);
                let a = space.random_state(s, &mut r)?;
                let b = space.random_state(s, &mut r)?;
                let rep = check_qm2(&a, &b, &r, 4)?;
                worst = worst.max(rep.max_deviation);
                compared += rep.pairs;
            }
            Ok(ctx.record(
                name,
                sec,
                ctx.cfg.trials,
                worst,
                format!("{compared} probabilities compared"),
            ))
        }));
        jobs.push(job("leaf_rank", sec, move |ctx, name, sec| {
            let base = ctx.rng(name, sec);
            let expected = 2 * (dim - 1);
            let mut worst = 0.0f64;
            for k in 0..ctx.cfg.trials {
                let mut r = base.substream(k as u64);
                let rho = space.random_state(s, &mut r)?;
                let rank = leaf_rank_full(&rho, hbar)?;
                worst = worst.max((rank as f64 - expected as f64).abs());
            }
            Ok(ctx.record(
                name,
                sec,
                ctx.cfg.trials,
                worst,
                format!("expected rank {expected}"),
            ))
        }));
    }

    let sectors = quantum_sectors(space);
    let multi = sectors.len() > 1;
    jobs.push(job(
        "cross_sector_probability",
        None,
        move |ctx, name, sec| {
            if !multi {
                return Ok(ctx.skipped(name, sec, "single sector"));
            }
            let base = ctx.rng(name, sec);
            let mut worst = 0.0f64;
            for k in 0..ctx.cfg.trials {
                let mut r = base.substream(k as u64);
                let (i, j) = distinct_pair(space.len(), &mut r);
                let a = space.random_state(i, &mut r)?;
                let b = space.random_state(j, &mut r)?;
                worst = worst.max(transition_probability(&a, &b)?.abs());
            }
            Ok(ctx.record(name, sec, ctx.cfg.trials, worst, ""))
        },
    ));
    jobs.push(job(
        "cross_sector_superposition",
        None,
        move |ctx, name, sec| {
            if !multi {
                return Ok(ctx.skipped(name, sec, "single sector"));
            }
            let base = ctx.rng(name, sec);
            let mut wrong = 0usize;
            for k in 0..ctx.cfg.trials {
                let mut r = base.substream(k as u64);
                let (i, j) = distinct_pair(space.len(), &mut r);
                let a = space.random_state(i, &mut r)?;
                let b = space.random_state(j, &mut r)?;
                match superpositions(&a, &b)? {
                    Superposition::Pair(x, y) if x.same_as(&a) && y.same_as(&b) => {}
                    _ => wrong += 1,
                }
            }
            Ok(ctx.record(
                name,
                sec,
                ctx.cfg.trials,
                wrong as f64,
                "closure of a cross-sector pair is the pair",
            ))
        },
    ));
    jobs.push(job("sector_decomposition", None, move |ctx, name, sec| {
        let base = ctx.rng(name, sec);
        let mut wrong = 0usize;
        for k in 0..ctx.cfg.trials {
            let mut r = base.substream(k as u64);
            let mut states = Vec::new();
            let mut expected = Vec::new();
            for &(s, dim, _) in &sectors {
                let members: Vec<usize> = (0..dim.min(3)).map(|i| states.len() + i).collect();
                for _ in 0..members.len() {
                    states.push(space.random_state(s, &mut r)?);
                }
                expected.push(members);
            }
            if decompose_sectors(&probability_matrix(&states)?)? != expected {
                wrong += 1;
            }
        }
        Ok(ctx.record(
            name,
            sec,
            ctx.cfg.trials,
            wrong as f64,
            "components of p > 0 match the sectors",
        ))
    }));
    run_jobs(Suite::Qm, cfg, jobs)
}

fn distinct_pair<G: Rng + ?Sized>(n: usize, rng: &mut G) -> (usize, usize) {
    let i = rng.random_range(0..n);
    let j = (i + rng.random_range(1..n)) % n;
    (i, j)
}

/// `p(xᵢ, xⱼ)` over a list of states.
pub fn probability_matrix(states: &[PureState<f64>]) -> Result<DMatrix<f64>> {
    let n = states.len();
    let mut p = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = transition_probability(&states[i], &states[j])?;
            p[(i, j)] = v;
            p[(j, i)] = v;
        }
    }
    Ok(p)
}

/// Set-level orthoplement inside a finite universe: the indices with zero
/// transition probability to every member of `q`.
pub fn set_orthoplement(p: &DMatrix<f64>, q: &[usize]) -> Vec<usize> {
    (0..p.nrows())
        .filter(|&x| q.iter().all(|&y| p[(x, y)] == 0.0))
        .collect()
}

/// Classical axioms: δ transition probability, trivial superpositions and
/// one sector per point, plus an informational canonical-bracket check.
pub fn run_cm_suite(space: &StateSpace<f64>, cfg: &SuiteConfig) -> Result<SuiteReport> {
    if !space.is_all_classical() {
        return Err(Error::InvalidSpace(
            "the cm suite needs classical sectors only".into(),
        ));
    }
    cfg.validate(Suite::Cm)?;
    let points = space.classical_points();
    let p = probability_matrix(&points)?;
    let n = points.len();
    let (points, p) = (&points, &p);
    let mut jobs: Vec<Job> = Vec::new();
    jobs.push(job("delta", None, move |ctx, name, sec| {
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let same = points[i].sector() == points[j].sector()
                    && points[i].label() == points[j].label();
                let delta = if same { 1.0 } else { 0.0 };
                worst = worst.max((p[(i, j)] - delta).abs());
            }
        }
        Ok(ctx.record(name, sec, n * n, worst, format!("{n} points")))
    }));
    jobs.push(job("tp_symmetry", None, move |ctx, name, sec| {
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let back = transition_probability(&points[j], &points[i])?;
                worst = worst.max((p[(i, j)] - back).abs());
            }
        }
        Ok(ctx.record(name, sec, n * n, worst, ""))
    }));
    jobs.push(job("pair_orthoclosure", None, move |ctx, name, sec| {
        if n < 2 {
            return Ok(ctx.skipped(name, sec, "fewer than two points"));
        }
        let all_pairs = n * (n - 1) / 2;
        let pairs: Vec<(usize, usize)> = if all_pairs <= ctx.cfg.trials {
            (0..n).flat_map(|i| (0..i).map(move |j| (j, i))).collect()
        } else {
            let base = ctx.rng(name, sec);
            (0..ctx.cfg.trials)
                .map(|k| distinct_pair(n, &mut base.substream(k as u64)))
                .collect()
        };
        let mut wrong = 0usize;
        for &(i, j) in &pairs {
            let mut closure = set_orthoplement(p, &set_orthoplement(p, &[i, j]));
            closure.sort_unstable();
            let pair_ok = match superpositions(&points[i], &points[j])? {
                Superposition::Pair(..) => true,
                Superposition::Subspace(_) => false,
            };
            if closure != [i.min(j), i.max(j)] || !pair_ok {
                wrong += 1;
            }
        }
        Ok(ctx.record(
            name,
            sec,
            pairs.len(),
            wrong as f64,
            "{a, b} closure equals {a, b}",
        ))
    }));
    jobs.push(job("point_sectors", None, move |ctx, name, sec| {
        let found = decompose_sectors(p)?.len();
        Ok(ctx.record(
            name,
            sec,
            1,
            (found as f64 - n as f64).abs(),
            format!("{found} sectors for {n} points"),
        ))
    }));
    jobs.push(job("canonical_bracket", None, move |ctx, name, sec| {
        let base = ctx.rng(name, sec);
        let mut worst = 0.0f64;
        let q = |x: &[f64]| x[0];
        let mom = |x: &[f64]| x[1];
        let energy = |x: &[f64]| 0.5 * (x[0] * x[0] + x[1] * x[1]);
        for k in 0..ctx.cfg.trials {
            let mut r = base.substream(k as u64);
            let x = [r.random_range(-5.0..5.0), r.random_range(-5.0..5.0)];
            worst = worst.max((canonical_bracket(q, mom, &x)? - 1.0).abs());
            // {H, q} = −p
            worst = worst.max((canonical_bracket(energy, q, &x)? + x[1]).abs());
        }
        Ok(ctx.record(
            name,
            sec,
            ctx.cfg.trials,
            worst,
            "informational: {q, p} = 1 and {H, q} = -p on R^2",
        ))
    }));
    run_jobs(Suite::Cm, cfg, jobs)
}

/// Real observable `Σ μᵢ p_{ρᵢ}` with `dim + 1` Gaussian coefficients.
pub fn random_observable<G: Rng + ?Sized>(
    space: &StateSpace<f64>,
    sector: usize,
    rng: &mut G,
) -> Result<Observable<f64>> {
    let dim = space.quantum_dim(sector)?;
    let mut terms = Vec::with_capacity(dim + 1);
    for _ in 0..=dim {
        let mu: f64 = rng.sample(StandardNormal);
        terms.push(Term {
            coeff: C64::new(mu, 0.0),
            state: space.random_state(sector, rng)?,
        });
    }
    Observable::from_terms(terms)
}

fn form(f: &Observable<f64>, sector: usize, dim: usize) -> ComplexMatrix<f64> {
    f.operator_form(sector)
        .cloned()
        .unwrap_or_else(|| ComplexMatrix::zeros(dim, dim))
}

fn size(f: &Observable<f64>) -> f64 {
    f.form_distance(&Observable::zero())
}

/// Residual measured against the largest term it is built from.
fn relative(residual: f64, sizes: &[f64]) -> f64 {
    residual / sizes.iter().fold(1.0f64, |a, &b| a.max(b))
}

/// The products rebuilt from transition probabilities against their operator
/// counterparts, bracket identities, algebra identification and ħ recovery.
pub fn run_reconstruction_suite(space: &StateSpace<f64>, cfg: &SuiteConfig) -> Result<SuiteReport> {
    if !space.is_all_quantum() {
        return Err(Error::InvalidSpace(
            "reconstruction needs quantum sectors only".into(),
        ));
    }
    cfg.validate(Suite::Reconstruction)?;
    if let Some((s, dim, _)) = quantum_sectors(space)
        .into_iter()
        .find(|&(_, d, _)| d > cfg.max_dim)
    {
        return Err(Error::InvalidSpace(format!(
            "sector {s} has dimension {dim}, above the configured maximum {}",
            cfg.max_dim
        )));
    }
    let mut jobs: Vec<Job> = Vec::new();
    for (s, dim, hbar) in quantum_sectors(space) {
        let sec = Some(s);
        // trial k of every product check sees fresh observables f, g, h
        type Triple = (Observable<f64>, Observable<f64>, Observable<f64>);
        let triple = move |r: &mut SeededRng| -> Result<Triple> {
            Ok((
                random_observable(space, s, r)?,
                random_observable(space, s, r)?,
                random_observable(space, s, r)?,
            ))
        };
        let trials_of = move |ctx: &Ctx,
                              name: &str,
                              sec: Option<usize>,
                              body: &dyn Fn(&mut SeededRng, &BracketOracle<f64>) -> Result<f64>|
              -> Result<f64> {
            let oracle = BracketOracle::operator(hbar)?;
            let base = ctx.rng(name, sec);
            let mut worst = 0.0f64;
            for k in 0..ctx.cfg.trials {
                worst = worst.max(body(&mut base.substream(k as u64), &oracle)?);
            }
            Ok(worst)
        };
        jobs.push(job("jordan_commutativity", sec, move |ctx, name, sec| {
            let worst = trials_of(ctx, name, sec, &|r, _| {
                let (f, g, _) = triple(r)?;
                Ok(jordan(&f, &g)?.form_distance(&jordan(&g, &f)?))
            })?;
            Ok(ctx.record(name, sec, ctx.cfg.trials, worst, ""))
        }));
        jobs.push(job("jordan_bilinearity", sec, move |ctx, name, sec| {
            let worst = trials_of(ctx, name, sec, &|r, _| {
                let (f, g, h) = triple(r)?;
                let a: f64 = r.sample(StandardNormal);
                let b: f64 = r.sample(StandardNormal);
                let lhs = jordan(&f.scale_real(a).add(&g.scale_real(b)), &h)?;
                let rhs = jordan(&f, &h)?
                    .scale_real(a)
                    .add(&jordan(&g, &h)?.scale_real(b));
                Ok(lhs.form_distance(&rhs))
            })?;
            Ok(ctx.record(name, sec, ctx.cfg.trials, worst, ""))
        }));
        jobs.push(job("jordan_oracle", sec, move |ctx, name, sec| {
            let worst = trials_of(ctx, name, sec, &|r, _| {
                let (f, g, _) = triple(r)?;
                let oracle = symmetrized_product(&form(&f, s, dim), &form(&g, s, dim));
                Ok(jordan(&f, &g)?.form_distance_to(s, &oracle))
            })?;
            Ok(ctx.record(name, sec, ctx.cfg.trials, worst, "against (AB + BA)/2"))
        }));
        jobs.push(job("jordan_identity", sec, move |ctx, name, sec| {
            let worst = trials_of(ctx, name, sec, &|r, _| {
                let (f, g, _) = triple(r)?;
                let ff = jordan(&f, &f)?;
                let lhs = jordan(&jordan(&f, &g)?, &ff)?;
                let rhs = jordan(&f, &jordan(&g, &ff)?)?;
                Ok(relative(lhs.form_distance(&rhs), &[size(&lhs), size(&rhs)]))
            })?;
            Ok(ctx.record(
                name,
                sec,
                ctx.cfg.trials,
                worst,
                "(f∘g)∘(f∘f) = f∘(g∘(f∘f)), relative",
            ))
        }));
        jobs.push(job("star_oracle", sec, move |ctx, name, sec| {
            let worst = trials_of(ctx, name, sec, &|r, oracle| {
                let (f, g, _) = triple(r)?;
                let product = form(&f, s, dim) * form(&g, s, dim);
                Ok(star_product(&f, &g, oracle)?.form_distance_to(s, &product))
            })?;
            Ok(ctx.record(
                name,
                sec,
                ctx.cfg.trials,
                worst,
                "against the operator product AB",
            ))
        }));
        jobs.push(job("associativity", sec, move |ctx, name, sec| {
            let worst = trials_of(ctx, name, sec, &|r, oracle| {
                let (f, g, h) = triple(r)?;
                associativity_residual(&f, &g, &h, oracle)
            })?;
            Ok(ctx.record(name, sec, ctx.cfg.trials, worst, ""))
        }));
        jobs.push(job("hermitian_split", sec, move |ctx, name, sec| {
            let worst = trials_of(ctx, name, sec, &|r, oracle| {
                let (f, g, _) = triple(r)?;
                let fg = star_product(&f, &g, oracle)?;
                let gf = star_product(&g, &f, oracle)?;
                let sym = fg.add(&gf).scale_real(0.5);
                let skew = fg.sub(&gf).scale(C64::new(0.0, 1.0 / hbar));
                let a = sym.form_distance(&jordan(&f, &g)?);
                let b = skew.form_distance(&bracket_observable(&f, &g, oracle)?);
                Ok(a.max(relative(b, &[size(&skew)])))
            })?;
            Ok(ctx.record(
                name,
                sec,
                ctx.cfg.trials,
                worst,
                "symmetric part is f∘g, (i/hbar)·antisymmetric part is {f, g}",
            ))
        }));
        jobs.push(job("bracket_antisymmetry", sec, move |ctx, name, sec| {
            let worst = trials_of(ctx, name, sec, &|r, oracle| {
                let (f, g, _) = triple(r)?;
                let fg = bracket_observable(&f, &g, oracle)?;
                let gf = bracket_observable(&g, &f, oracle)?;
                Ok(relative(size(&fg.add(&gf)), &[size(&fg)]))
            })?;
            Ok(ctx.record(name, sec, ctx.cfg.trials, worst, "relative"))
        }));
        jobs.push(job("jacobi", sec, move |ctx, name, sec| {
            let worst = trials_of(ctx, name, sec, &|r, oracle| {
                let (f, g, h) = triple(r)?;
                let br =
                    |x: &Observable<f64>, y: &Observable<f64>| bracket_observable(x, y, oracle);
                let a = br(&f, &br(&g, &h)?)?;
                let b = br(&g, &br(&h, &f)?)?;
                let c = br(&h, &br(&f, &g)?)?;
                let sum = a.add(&b).add(&c);
                Ok(relative(size(&sum), &[size(&a), size(&b), size(&c)]))
            })?;
            Ok(ctx.record(name, sec, ctx.cfg.trials, worst, "relative"))
        }));
        jobs.push(job("leibniz", sec, move |ctx, name, sec| {
            let worst = trials_of(ctx, name, sec, &|r, oracle| {
                let (f, g, h) = triple(r)?;
                let lhs = bracket_observable(&f, &jordan(&g, &h)?, oracle)?;
                let a = jordan(&bracket_observable(&f, &g, oracle)?, &h)?;
                let b = jordan(&g, &bracket_observable(&f, &h, oracle)?)?;
                let rhs = a.add(&b);
                Ok(relative(
                    lhs.form_distance(&rhs),
                    &[size(&lhs), size(&a), size(&b)],
                ))
            })?;
            Ok(ctx.record(
                name,
                sec,
                ctx.cfg.trials,
                worst,
                "{f, g∘h} = {f, g}∘h + g∘{f, h}, relative",
            ))
        }));
        jobs.push(Box::new(move |ctx: &Ctx| {
            let names = ["hbar_round_trip", "hbar_finite_difference"];
            let run = || -> Result<(f64, f64, usize)> {
                let base = ctx.rng("hbar_round_trip", sec);
                let exact = BracketOracle::operator(hbar)?;
                let fd = BracketOracle::finite_difference(hbar)?;
                let (mut a, mut b) = (Vec::new(), Vec::new());
                for k in 0..ctx.cfg.trials {
                    let mut r = base.substream(k as u64);
                    let x = random_hermitian::<f64, _>(dim, &mut r);
                    let y = random_hermitian::<f64, _>(dim, &mut r);
                    let rho = space.random_state(s, &mut r)?;
                    a.push(bracket_sample(&x, &y, &rho, &exact)?);
                    b.push(bracket_sample(&x, &y, &rho, &fd)?);
                }
                Ok((
                    relative_error(infer_hbar(&a)?, hbar),
                    relative_error(infer_hbar(&b)?, hbar),
                    a.len(),
                ))
            };
            if dim == 1 {
                return names
                    .iter()
                    .map(|n| ctx.skipped(n, sec, "brackets vanish in dimension 1"))
                    .collect();
            }
            match run() {
                Ok((e1, e2, n)) => vec![
                    ctx.record(
                        names[0],
                        sec,
                        n,
                        e1,
                        format!("relative error, hbar = {hbar}"),
                    ),
                    ctx.record(
                        names[1],
                        sec,
                        n,
                        e2,
                        format!("relative error, hbar = {hbar}"),
                    ),
                ],
                Err(e) => names.iter().map(|n| ctx.failed(n, sec, &e)).collect(),
            }
        }));
    }

    jobs.push(Box::new(move |ctx: &Ctx| {
        let rng = ctx.rng("identify_algebra", None);
        match identify_algebra(space, &rng) {
            Ok(id) => {
                let mut out = Vec::new();
                for rep in &id.reports {
                    let sec = Some(rep.sector);
                    let target = rep.dim * rep.dim;
                    out.push(ctx.record(
                        "algebra_span",
                        sec,
                        1,
                        (rep.span_rank as f64 - target as f64).abs(),
                        format!(
                            "span of sampled p_rho has dimension {} (block {})",
                            rep.span_rank, rep.dim
                        ),
                    ));
                    out.push(ctx.record(
                        "algebra_membership",
                        sec,
                        1,
                        rep.membership_residual,
                        "random f_A expanded in sampled p_rho",
                    ));
                }
                out.push(ctx.record(
                    "algebra_cross_sector",
                    None,
                    1,
                    id.cross_sector_residual,
                    format!("blocks {:?}", id.blocks),
                ));
                out
            }
            Err(e) => vec![ctx.failed("algebra_span", None, &e)],
        }
    }));
    let sectors = quantum_sectors(space);
    jobs.push(job("hbar_sector_ratio", None, move |ctx, name, sec| {
        let nontrivial: Vec<_> = sectors.iter().filter(|&&(_, d, _)| d > 1).copied().collect();
        if nontrivial.len() < 2 {
            return Ok(ctx.skipped(name, sec, "fewer than two sectors with brackets"));
        }
        let base = ctx.rng(name, sec);
        let mut estimates = Vec::new();
        for &(s, dim, hbar) in &nontrivial {
            let oracle = BracketOracle::operator(hbar)?;
            let mut samples = Vec::new();
            for k in 0..ctx.cfg.trials.min(16) {
                let mut r = base.substream(((s as u64) << 32) | k as u64);
                let x = random_hermitian::<f64, _>(dim, &mut r);
                let y = random_hermitian::<f64, _>(dim, &mut r);
                samples.push(bracket_sample(&x, &y, &space.random_state(s, &mut r)?, &oracle)?);
            }
            estimates.push((infer_hbar(&samples)?, hbar));
        }
        let (e0, h0) = estimates[0];
        let mut worst = 0.0f64;
        let mut ratios = Vec::new();
        for &(e, h) in &estimates[1..] {
            worst = worst.max(relative_error(e / e0, h / h0));
            ratios.push(format!("{:.6}", e / e0));
        }
        let distinct = estimates.iter().any(|&(e, _)| relative_error(e, e0) > 1e-9);
        let note = if distinct {
            format!("informational: hbar differs between sectors (ratios {}); a per-sector rescaling removes it", ratios.join(", "))
        } else {
            "informational: one hbar across sectors".to_string()
        };
        Ok(ctx.record(name, sec, estimates.len(), worst, note))
    }));
    run_jobs(Suite::Reconstruction, cfg, jobs)
}

pub fn run_suite(suite: Suite, space: &StateSpace<f64>, cfg: &SuiteConfig) -> Result<SuiteReport> {
    match suite {
        Suite::Qm => run_qm_suite(space, cfg),
        Suite::Cm => run_cm_suite(space, cfg),
        Suite::Reconstruction => run_reconstruction_suite(space, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> SuiteConfig {
        SuiteConfig {
            trials: 10,
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn qubit_suite_passes() {
        let space = StateSpace::quantum(&[2]).unwrap();
        let report = run_qm_suite(&space, &quick()).unwrap();
        assert!(report.pass, "{}", report.to_json());
        assert!(report.check("qm2", Some(0)).unwrap().pass);
        assert_eq!(report.check("leaf_rank", Some(0)).unwrap().worst, 0.0);
        assert!(report
            .check("unitarity_exact", Some(0))
            .unwrap()
            .note
            .contains("model-verified"));
    }

    #[test]
    fn two_sector_suite_passes() {
        let space = StateSpace::quantum(&[2, 3]).unwrap();
        let report = run_qm_suite(&space, &quick()).unwrap();
        assert!(report.pass, "{}", report.to_json());
        assert_eq!(
            report
                .check("cross_sector_probability", None)
                .unwrap()
                .worst,
            0.0
        );
        assert!(report
            .check("leaf_rank", Some(1))
            .unwrap()
            .note
            .contains("rank 4"));
    }

    #[test]
    fn dimension_one_sector_is_skipped_not_failed() {
        let space = StateSpace::quantum(&[1, 2]).unwrap();
        let report = run_qm_suite(&space, &quick()).unwrap();
        assert!(report.pass, "{}", report.to_json());
        let qm2 = report.check("qm2", Some(0)).unwrap();
        assert!(qm2.note.starts_with("skipped"));
        assert_eq!(qm2.trials, 0);
        assert!(report
            .check("leaf_rank", Some(0))
            .unwrap()
            .note
            .contains("rank 0"));
    }

    #[test]
    fn report_is_ordered_and_consistent() {
        let space = StateSpace::quantum(&[2, 2]).unwrap();
        let report = run_qm_suite(&space, &quick()).unwrap();
        let keys: Vec<_> = report
            .checks
            .iter()
            .map(|c| (c.sector, c.name.clone()))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(report.pass, report.checks.iter().all(|c| c.pass));
    }

    #[test]
    fn jobs_do_not_change_the_report() {
        let space = StateSpace::quantum(&[2, 3]).unwrap();
        let one = run_qm_suite(&space, &quick()).unwrap();
        let four = run_qm_suite(&space, &SuiteConfig { jobs: 4, ..quick() }).unwrap();
        assert_eq!(one.to_json(), four.to_json());
    }

    #[test]
    fn extra_trials_keep_earlier_worst() {
        let space = StateSpace::quantum(&[3]).unwrap();
        let few = run_qm_suite(
            &space,
            &SuiteConfig {
                trials: 5,
                ..quick()
            },
        )
        .unwrap();
        let more = run_qm_suite(
            &space,
            &SuiteConfig {
                trials: 12,
                ..quick()
            },
        )
        .unwrap();
        for c in &few.checks {
            let d = more.check(&c.name, c.sector).unwrap();
            assert!(d.worst >= c.worst, "{}", c.name);
        }
    }

    #[test]
    fn suites_reject_wrong_space_kind() {
        let classical = StateSpace::classical(["a", "b"]).unwrap();
        let quantum = StateSpace::quantum(&[2]).unwrap();
        assert!(matches!(
            run_qm_suite(&classical, &quick()),
            Err(Error::InvalidSpace(_))
        ));
        assert!(matches!(
            run_cm_suite(&quantum, &quick()),
            Err(Error::InvalidSpace(_))
        ));
        assert!(matches!(
            run_reconstruction_suite(&classical, &quick()),
            Err(Error::InvalidSpace(_))
        ));
        let big = SuiteConfig {
            max_dim: 2,
            ..quick()
        };
        assert!(matches!(
            run_reconstruction_suite(&StateSpace::quantum(&[3]).unwrap(), &big),
            Err(Error::InvalidSpace(_))
        ));
    }

    #[test]
    fn bad_config_rejected() {
        let space = StateSpace::quantum(&[2]).unwrap();
        let mut cfg = quick();
        cfg.tolerances.insert("no_such_check".into(), 1e-3);
        assert!(run_qm_suite(&space, &cfg).is_err());
        let mut cfg = quick();
        cfg.tolerances.insert("qm2".into(), -1.0);
        assert!(run_qm_suite(&space, &cfg).is_err());
        assert!(run_qm_suite(
            &space,
            &SuiteConfig {
                trials: 0,
                ..quick()
            }
        )
        .is_err());
    }

    #[test]
    fn tolerance_override_is_applied() {
        let space = StateSpace::quantum(&[2]).unwrap();
        let mut cfg = quick();
        cfg.tolerances.insert("qm2".into(), 1e-3);
        let report = run_qm_suite(&space, &cfg).unwrap();
        assert_eq!(report.check("qm2", Some(0)).unwrap().tol, 1e-3);
    }

    #[test]
    fn classical_suite() {
        let points: Vec<String> = (0..5).map(|k| format!("x{k}")).collect();
        let space = StateSpace::classical(points).unwrap();
        let report = run_cm_suite(&space, &quick()).unwrap();
        assert!(report.pass, "{}", report.to_json());
        assert!(report
            .check("point_sectors", None)
            .unwrap()
            .note
            .starts_with("5 sectors"));

        let single = StateSpace::classical(["only"]).unwrap();
        let report = run_cm_suite(&single, &quick()).unwrap();
        assert!(report.pass);
        assert!(report
            .check("pair_orthoclosure", None)
            .unwrap()
            .note
            .starts_with("skipped"));
    }

    #[test]
    fn reconstruction_suite_two_sectors() {
        let space = StateSpace::quantum_with_hbar(&[(2, 1.0), (3, 2.0)]).unwrap();
        let report = run_reconstruction_suite(&space, &quick()).unwrap();
        assert!(report.pass, "{}", report.to_json());
        assert!(report
            .check("hbar_sector_ratio", None)
            .unwrap()
            .note
            .contains("differs"));
        assert_eq!(report.check("algebra_span", Some(1)).unwrap().worst, 0.0);
    }

    #[test]
    fn reconstruction_equal_hbar() {
        let space = StateSpace::quantum(&[2, 2]).unwrap();
        let report = run_reconstruction_suite(&space, &quick()).unwrap();
        assert!(report.pass, "{}", report.to_json());
        assert!(report.check("hbar_round_trip", Some(1)).unwrap().worst <= 1e-9);
        assert!(report
            .check("hbar_sector_ratio", None)
            .unwrap()
            .note
            .contains("one hbar"));
    }

    #[test]
    fn set_orthoplement_on_classical_points() {
        let space = StateSpace::<f64>::classical(["a", "b", "c"]).unwrap();
        let p = probability_matrix(&space.classical_points()).unwrap();
        assert_eq!(set_orthoplement(&p, &[0]), vec![1, 2]);
        assert_eq!(
            set_orthoplement(&p, &set_orthoplement(&p, &[0, 2])),
            vec![0, 2]
        );
    }

    #[test]
    fn report_json_round_trips() {
        let space = StateSpace::quantum(&[2]).unwrap();
        let report = run_qm_suite(&space, &quick()).unwrap();
        let back: SuiteReport = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(back, report);
        assert_eq!(
            crate::json::validate_document(&report.to_json()).unwrap(),
            crate::json::DocumentKind::SuiteReport
        );
    }
}
