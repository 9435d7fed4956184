//! Acceptance gate. Runs every primary criterion at its stated tolerance and
//! prints one PASS/FAIL line each; exits non-zero if any criterion fails.
//!
//! Reference values come from oracles written here against raw vectors and
//! matrices, not from the library routines under test.

use std::process::Command;
use std::time::Instant;

use rand::Rng;
use tpspace::axioms::{self, run_cm_suite, SuiteConfig};
use tpspace::lattice::{
    atom, check_covering, check_orthomodular, join, random_nested_pair, random_subspace,
};
use tpspace::linalg::{random_hermitian, random_unit_vector, standard_complex_gaussian};
use tpspace::poisson::{
    bracket, bracket_observable, bracket_operators, bracket_sample, canonical_bracket,
    check_unitarity, flow_operator, infer_hbar, leaf_rank_full, relative_error, BracketOracle,
    BracketSample, FlowMethod,
};
use tpspace::reconstruct::{associativity_residual, identify_algebra, jordan, star_product};
use tpspace::states::{decompose_sectors, transition_probability};
use tpspace::transition::{check_qm2, superpositions, Superposition};
use tpspace::{
    ComplexMatrix, ComplexVector, Error, Observable, PureState, SeededRng, StateSpace, C64,
};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn lib<T>(r: tpspace::Result<T>) -> Result<T, String> {
    r.map_err(|e| format!("library error: {e}"))
}

// ---- independent oracles -------------------------------------------------

fn oracle_inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn oracle_born(a: &[C64], b: &[C64]) -> f64 {
    let na = oracle_inner(a, a).re;
    let nb = oracle_inner(b, b).re;
    oracle_inner(a, b).norm_sqr() / (na * nb)
}

fn raw(v: &ComplexVector) -> Vec<C64> {
    v.iter().copied().collect()
}

fn oracle_projector(v: &[C64]) -> ComplexMatrix {
    let n2 = oracle_inner(v, v).re;
    ComplexMatrix::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj() / n2)
}

fn max_entry(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0f64, |a, z| a.max(z.norm()))
}

fn gram_schmidt(vs: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let mut out: Vec<Vec<C64>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &out {
                let c = oracle_inner(b, &w);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let n = oracle_inner(&w, &w).re.sqrt();
        if n > 1e-10 {
            out.push(w.iter().map(|z| z / n).collect());
        }
    }
    out
}

fn random_raw(dim: usize, r: &mut SeededRng) -> Vec<C64> {
    (0..dim)
        .map(|_| standard_complex_gaussian::<f64, _>(r))
        .collect()
}

fn state(sector: usize, v: &[C64]) -> Result<PureState, String> {
    lib(PureState::from_vector(
        sector,
        &ComplexVector::from_vec(v.to_vec()),
    ))
}

/// `(i/ħ)⟨ψ|[A,B]|ψ⟩` straight from the matrices.
fn oracle_bracket(a: &ComplexMatrix, b: &ComplexMatrix, psi: &[C64], hbar: f64) -> f64 {
    let c = a * b - b * a;
    let v = ComplexVector::from_vec(psi.to_vec());
    let expect = oracle_inner(psi, &raw(&(c * v))) / oracle_inner(psi, psi).re;
    (C64::new(0.0, 1.0 / hbar) * expect).re
}

fn random_observable(
    space: &StateSpace,
    sector: usize,
    r: &mut SeededRng,
) -> Result<Observable, String> {
    lib(axioms::random_observable(space, sector, r))
}

fn form(f: &Observable, sector: usize) -> ComplexMatrix {
    f.operator_form(sector)
        .expect("observable lives on the sector")
        .clone()
}

// ---- criteria -------------------------------------------------------------

fn criterion_1() -> Outcome {
    let rng = SeededRng::new(1, 1);
    let (mut pairs, mut worst_oracle, mut worst_range, mut worst_basis, mut worst_equal) =
        (0usize, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for dim in 2..=8usize {
        for k in 0..1430u64 {
            let mut r = rng.substream(((dim as u64) << 32) | k);
            let a = random_raw(dim, &mut r);
            let b = random_raw(dim, &mut r);
            let (sa, sb) = (state(0, &a)?, state(0, &b)?);
            let pab = lib(transition_probability(&sa, &sb))?;
            let pba = lib(transition_probability(&sb, &sa))?;
            ensure(pab == pba, format!("symmetry broken: {pab} vs {pba}"))?;
            worst_range = worst_range.max(-pab).max(pab - 1.0);
            worst_oracle = worst_oracle.max((pab - oracle_born(&a, &b)).abs());
            // p = 1 iff projector distance ≤ 1e-9
            let theta: f64 = r.random_range(0.0..std::f64::consts::TAU);
            let phase = C64::new(theta.cos(), theta.sin());
            let same = state(0, &a.iter().map(|z| z * phase).collect::<Vec<_>>())?;
            let p_same = lib(transition_probability(&sa, &same))?;
            worst_equal = worst_equal.max((p_same - 1.0).abs());
            let d_same = max_entry(&(oracle_projector(&a) - same.projector().unwrap()));
            ensure(
                d_same <= 1e-9,
                "phase copy not recognised as the same state",
            )?;
            let d_other = max_entry(&(oracle_projector(&a) - oracle_projector(&b)));
            ensure(
                ((pab - 1.0).abs() <= 1e-9) == (d_other <= 1e-9),
                "p = 1 iff equal violated",
            )?;
            // basis sums over an orthonormal basis built here
            let basis = gram_schmidt(
                &(0..dim)
                    .map(|_| random_raw(dim, &mut r))
                    .collect::<Vec<_>>(),
            );
            ensure(basis.len() == dim, "oracle basis degenerate")?;
            let mut sum = 0.0;
            for e in &basis {
                sum += lib(transition_probability(&sa, &state(0, e)?))?;
            }
            worst_basis = worst_basis.max((sum - 1.0).abs());
            pairs += 1;
        }
    }
    ensure(
        worst_range <= 1e-12,
        format!("range excess {worst_range:e}"),
    )?;
    ensure(
        worst_equal <= 1e-9,
        format!("p(ρ, ρ) off by {worst_equal:e}"),
    )?;
    ensure(
        worst_basis <= 1e-10,
        format!("basis sum off by {worst_basis:e}"),
    )?;
    ensure(
        worst_oracle <= 1e-12,
        format!("Born oracle disagreement {worst_oracle:e}"),
    )?;
    Ok(format!(
        "{pairs} pairs, dims 2-8: symmetry exact, range excess {worst_range:.1e}, basis sum {worst_basis:.1e}, oracle {worst_oracle:.1e}"
    ))
}

fn criterion_2() -> Outcome {
    let rng = SeededRng::new(2, 2);
    let times = [0.0, 0.5, 1.0, 2.5, 5.0, 7.5, 10.0];
    let (mut exact_drift, mut rk4_drift, mut gap, mut closed_form) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for k in 0..100u64 {
        let mut r = rng.substream(k);
        let dim = 2 + (k as usize % 7);
        let rho = random_raw(dim, &mut r);
        let s1 = random_raw(dim, &mut r);
        let s2 = random_raw(dim, &mut r);
        let (rho_s, s1_s, s2_s) = (state(0, &rho)?, state(0, &s1)?, state(0, &s2)?);
        let oracle = lib(BracketOracle::operator(1.0))?;
        exact_drift = exact_drift.max(
            lib(check_unitarity(
                &rho_s,
                &s1_s,
                &s2_s,
                &times,
                &oracle,
                FlowMethod::Exact,
            ))?
            .max_drift,
        );
        rk4_drift = rk4_drift.max(
            lib(check_unitarity(
                &rho_s,
                &s1_s,
                &s2_s,
                &times,
                &oracle,
                FlowMethod::Rk4 { steps: 1000 },
            ))?
            .max_drift,
        );
        let h = lib(Observable::p_rho(&rho_s).and_then(|f| f.hermitian_form(0)))?;
        let exact = lib(flow_operator(&h, &s1_s, &times, 1.0, FlowMethod::Exact))?;
        let rk4 = lib(flow_operator(
            &h,
            &s1_s,
            &times,
            1.0,
            FlowMethod::Rk4 { steps: 1000 },
        ))?;
        gap = gap.max(exact.max_distance(&rk4));
        // exp(−itP) = I + (e^{−it} − 1) P for a projector P
        let p = oracle_projector(&rho);
        for (t, s) in &exact.trajectory {
            let u = ComplexMatrix::identity(dim, dim) + &p * (C64::new(0.0, -t).exp() - 1.0);
            let moved = raw(&(u * ComplexVector::from_vec(s1.clone())));
            closed_form = closed_form.max(max_entry(
                &(oracle_projector(&moved) - s.projector().unwrap()),
            ));
        }
    }
    ensure(exact_drift <= 1e-10, format!("exact drift {exact_drift:e}"))?;
    ensure(rk4_drift <= 1e-6, format!("RK4 drift {rk4_drift:e}"))?;
    ensure(gap <= 1e-6, format!("exact vs RK4 {gap:e}"))?;
    ensure(
        closed_form <= 1e-10,
        format!("exact flow vs closed form {closed_form:e}"),
    )?;
    Ok(format!(
        "100 trials, t <= 10: exact drift {exact_drift:.1e}, RK4 drift {rk4_drift:.1e}, exact-vs-RK4 {gap:.1e}, closed form {closed_form:.1e}"
    ))
}

fn criterion_3() -> Outcome {
    let rng = SeededRng::new(3, 3);
    let (mut worst, mut worst_oracle) = (0.0f64, 0.0f64);
    for dim in 2..=8usize {
        for k in 0..200u64 {
            let mut r = rng.substream(((dim as u64) << 32) | k);
            let a = random_raw(dim, &mut r);
            let b = random_raw(dim, &mut r);
            let (sa, sb) = (state(0, &a)?, state(0, &b)?);
            worst = worst.max(lib(check_qm2(&sa, &sb, &r, 3))?.max_deviation);
            // oracle: coordinates in a frame of span{a, b} built here
            let frame = gram_schmidt(&[a.clone(), b.clone()]);
            let x: Vec<C64> = {
                let (u, v) = (
                    standard_complex_gaussian::<f64, _>(&mut r),
                    standard_complex_gaussian::<f64, _>(&mut r),
                );
                a.iter().zip(&b).map(|(p, q)| u * p + v * q).collect()
            };
            let coords =
                |w: &[C64]| -> Vec<C64> { frame.iter().map(|f| oracle_inner(f, w)).collect() };
            let inside = lib(transition_probability(&state(0, &x)?, &sa))?;
            let outside = oracle_born(&coords(&x), &coords(&a));
            worst_oracle = worst_oracle.max((inside - outside).abs());
        }
    }
    let space = lib(StateSpace::quantum(&[3, 4]))?;
    let mut r = rng.substream(u64::MAX);
    for _ in 0..50 {
        let a = lib(space.random_state(0, &mut r))?;
        let b = lib(space.random_state(1, &mut r))?;
        match lib(superpositions(&a, &b))? {
            Superposition::Pair(x, y) => ensure(x.same_as(&a) && y.same_as(&b), "pair altered")?,
            Superposition::Subspace(_) => {
                return Err("cross-sector pair produced a subspace".into())
            }
        }
    }
    ensure(worst <= 1e-9, format!("QM2 deviation {worst:e}"))?;
    ensure(
        worst_oracle <= 1e-9,
        format!("QM2 oracle deviation {worst_oracle:e}"),
    )?;
    Ok(format!("200 pairs per dim 2-8: max deviation {worst:.1e}, oracle {worst_oracle:.1e}; cross-sector pairs literal"))
}

fn criterion_4() -> Outcome {
    let rng = SeededRng::new(4, 4);
    for dim in 2..=8usize {
        for k in 0..50u64 {
            let mut r = rng.substream(((dim as u64) << 32) | k);
            let rho = state(0, &random_raw(dim, &mut r))?;
            let rank = lib(leaf_rank_full(&rho, 1.0))?;
            ensure(
                rank == 2 * (dim - 1),
                format!("dim {dim}: rank {rank}, expected {}", 2 * (dim - 1)),
            )?;
        }
    }
    let space = lib(StateSpace::quantum(&[2, 5, 3]))?;
    let mut r = rng.substream(u64::MAX);
    for _ in 0..200 {
        let i = r.random_range(0..3);
        let j = (i + r.random_range(1..3)) % 3;
        let p = lib(transition_probability(
            &lib(space.random_state(i, &mut r))?,
            &lib(space.random_state(j, &mut r))?,
        ))?;
        ensure(p == 0.0, format!("cross-sector p = {p}"))?;
    }
    Ok("50 states per dim 2-8: rank 2(n-1) exactly; cross-sector p = 0 exactly".into())
}

fn criterion_5() -> Outcome {
    let rng = SeededRng::new(5, 5);
    let (mut star, mut assoc, mut comm, mut bilin, mut jordan_oracle) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for k in 0..500u64 {
        let dim = 2 + (k as usize % 5);
        let space = lib(StateSpace::quantum(&[dim]))?;
        let mut r = rng.substream(k);
        let oracle = lib(BracketOracle::operator(1.0))?;
        let f = random_observable(&space, 0, &mut r)?;
        let g = random_observable(&space, 0, &mut r)?;
        let h = random_observable(&space, 0, &mut r)?;
        let (a, b) = (form(&f, 0), form(&g, 0));
        star = star.max(lib(star_product(&f, &g, &oracle))?.form_distance_to(0, &(&a * &b)));
        assoc = assoc.max(lib(associativity_residual(&f, &g, &h, &oracle))?);
        let fg = lib(jordan(&f, &g))?;
        comm = comm.max(fg.form_distance(&lib(jordan(&g, &f))?));
        jordan_oracle =
            jordan_oracle.max(fg.form_distance_to(0, &((&a * &b + &b * &a) * C64::new(0.5, 0.0))));
        let (x, y): (f64, f64) = (r.random_range(-2.0..2.0), r.random_range(-2.0..2.0));
        let lhs = lib(jordan(&f.scale_real(x).add(&g.scale_real(y)), &h))?;
        let rhs = lib(jordan(&f, &h))?
            .scale_real(x)
            .add(&lib(jordan(&g, &h))?.scale_real(y));
        bilin = bilin.max(lhs.form_distance(&rhs));
    }
    for (dims, blocks) in [
        (vec![2], vec![2]),
        (vec![2, 3], vec![2, 3]),
        (vec![1], vec![1]),
        (vec![4, 2, 3], vec![4, 2, 3]),
    ] {
        let space = lib(StateSpace::quantum(&dims))?;
        let id = lib(identify_algebra(&space, &rng.substream(dims.len() as u64)))?;
        ensure(
            id.blocks == blocks,
            format!("blocks {:?}, expected {blocks:?}", id.blocks),
        )?;
        for rep in &id.reports {
            ensure(
                rep.span_rank == rep.dim * rep.dim,
                format!("span rank {} for block {}", rep.span_rank, rep.dim),
            )?;
        }
    }
    for (name, v) in [
        ("star oracle", star),
        ("associativity", assoc),
        ("Jordan commutativity", comm),
        ("Jordan bilinearity", bilin),
        ("Jordan oracle", jordan_oracle),
    ] {
        ensure(v <= 1e-9, format!("{name} residual {v:e}"))?;
    }
    Ok(format!(
        "500 triples, dims 2-6: star {star:.1e}, assoc {assoc:.1e}, comm {comm:.1e}, bilinear {bilin:.1e}; blocks and spans n^2 exact"
    ))
}

fn criterion_6() -> Outcome {
    let rng = SeededRng::new(6, 6);
    let (mut anti, mut jac, mut leib, mut pointwise, mut fd) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let zero = Observable::zero();
    for k in 0..500u64 {
        let dim = 2 + (k as usize % 5);
        let space = lib(StateSpace::quantum(&[dim]))?;
        let mut r = rng.substream(k);
        let oracle = lib(BracketOracle::operator(1.0))?;
        let f = random_observable(&space, 0, &mut r)?;
        let g = random_observable(&space, 0, &mut r)?;
        let h = random_observable(&space, 0, &mut r)?;
        let br = |x: &Observable, y: &Observable| lib(bracket_observable(x, y, &oracle));
        anti = anti.max(br(&f, &g)?.add(&br(&g, &f)?).form_distance(&zero));
        let sum = br(&f, &br(&g, &h)?)?
            .add(&br(&g, &br(&h, &f)?)?)
            .add(&br(&h, &br(&f, &g)?)?);
        jac = jac.max(sum.form_distance(&zero));
        let lhs = br(&f, &lib(jordan(&g, &h))?)?;
        let rhs = lib(jordan(&br(&f, &g)?, &h))?.add(&lib(jordan(&g, &br(&f, &h)?))?);
        leib = leib.max(lhs.form_distance(&rhs));
        // pointwise against the matrix oracle, and the flow-derivative route
        let psi = random_raw(dim, &mut r);
        let rho = state(0, &psi)?;
        let value = lib(bracket(&f, &g, &rho, &oracle))?;
        pointwise =
            pointwise.max((value - oracle_bracket(&form(&f, 0), &form(&g, 0), &psi, 1.0)).abs());
        let fd_oracle = lib(BracketOracle::finite_difference(1.0))?;
        let (a, b) = (lib(f.hermitian_form(0))?, lib(g.hermitian_form(0))?);
        fd = fd.max((lib(bracket_operators(&a, &b, &rho, &fd_oracle))? - value).abs());
    }
    ensure(anti <= 1e-10, format!("antisymmetry {anti:e}"))?;
    ensure(jac <= 1e-8, format!("Jacobi {jac:e}"))?;
    ensure(leib <= 1e-8, format!("Leibniz {leib:e}"))?;
    ensure(pointwise <= 1e-10, format!("matrix oracle {pointwise:e}"))?;
    ensure(fd <= 1e-6, format!("finite-difference route {fd:e}"))?;
    Ok(format!(
        "500 samples: antisymmetry {anti:.1e}, Jacobi {jac:.1e}, Leibniz {leib:.1e}, oracle {pointwise:.1e}, FD route {fd:.1e}"
    ))
}

fn hbar_samples(
    dim: usize,
    hbar: f64,
    rng: &SeededRng,
    count: u64,
) -> Result<Vec<BracketSample<f64>>, String> {
    let mut out = Vec::new();
    for k in 0..count {
        let mut r = rng.substream(k);
        let a = random_hermitian::<f64, _>(dim, &mut r);
        let b = random_hermitian::<f64, _>(dim, &mut r);
        let psi = random_raw(dim, &mut r);
        // brackets measured by the oracle, commutators i⟨[A,B]⟩ likewise
        let bracket = oracle_bracket(a.matrix(), b.matrix(), &psi, hbar);
        let commutator = oracle_bracket(a.matrix(), b.matrix(), &psi, 1.0);
        let lib_sample = lib(bracket_sample(
            &a,
            &b,
            &state(0, &psi)?,
            &lib(BracketOracle::operator(hbar))?,
        ))?;
        ensure(
            relative_error(lib_sample.bracket, bracket) <= 1e-9
                || (lib_sample.bracket - bracket).abs() <= 1e-12,
            "library bracket disagrees with the oracle",
        )?;
        out.push(BracketSample {
            bracket,
            commutator,
        });
    }
    Ok(out)
}

fn criterion_7() -> Outcome {
    let rng = SeededRng::new(7, 7);
    let mut worst = 0.0f64;
    for (i, &hbar) in [1e-3, 1.0, 1e3].iter().enumerate() {
        for dim in [2usize, 4, 7] {
            let samples = hbar_samples(dim, hbar, &rng.substream((i * 16 + dim) as u64), 20)?;
            worst = worst.max(relative_error(lib(infer_hbar(&samples))?, hbar));
        }
    }
    // commuting inputs carry no signal
    let a = tpspace::HermitianOperator::from_real_diagonal(&[1.0, -2.0, 0.5]);
    let b = tpspace::HermitianOperator::from_real_diagonal(&[3.0, 1.0, -1.0]);
    let mut r = rng.substream(99);
    let mut commuting = Vec::new();
    for _ in 0..10 {
        let rho = state(0, &random_raw(3, &mut r))?;
        commuting.push(lib(bracket_sample(
            &a,
            &b,
            &rho,
            &lib(BracketOracle::operator(1.0))?,
        ))?);
    }
    ensure(
        infer_hbar(&commuting) == Err(Error::InsufficientSignal),
        "commuting inputs did not raise InsufficientSignal",
    )?;
    // two sectors with ħ = (1, 2), recovered independently
    let space = lib(StateSpace::quantum_with_hbar(&[(2, 1.0), (3, 2.0)]))?;
    let mut per_sector = Vec::new();
    for sector in 0..2 {
        let hbar = lib(space.hbar(sector))?;
        let oracle = lib(BracketOracle::operator(hbar))?;
        let dim = lib(space.quantum_dim(sector))?;
        let mut samples = Vec::new();
        for k in 0..20u64 {
            let mut r = rng.substream(1000 + 100 * sector as u64 + k);
            let x = random_hermitian::<f64, _>(dim, &mut r);
            let y = random_hermitian::<f64, _>(dim, &mut r);
            samples.push(lib(bracket_sample(
                &x,
                &y,
                &lib(space.random_state(sector, &mut r))?,
                &oracle,
            ))?);
        }
        per_sector.push(lib(infer_hbar(&samples))?);
    }
    ensure(
        relative_error(per_sector[0], 1.0) <= 1e-9 && relative_error(per_sector[1], 2.0) <= 1e-9,
        format!("per-sector estimates {per_sector:?}"),
    )?;
    ensure(worst <= 1e-9, format!("round-trip error {worst:e}"))?;
    Ok(format!("hbar in {{1e-3, 1, 1e3}}: rel error {worst:.1e}; commuting -> InsufficientSignal; sectors -> {per_sector:?}"))
}

fn criterion_8() -> Outcome {
    let rng = SeededRng::new(8, 8);
    for k in 0..1000u64 {
        let mut r = rng.substream(k);
        let dim = r.random_range(2..=6);
        let outer = r.random_range(0..=dim);
        let inner = r.random_range(0..=outer);
        let (v, w) = lib(random_nested_pair::<f64, _>(0, dim, inner, outer, &mut r))?;
        ensure(
            lib(check_orthomodular(&v, &w))?,
            format!("orthomodular law failed, dim {dim}, ranks {inner} <= {outer}"),
        )?;
    }
    for k in 0..500u64 {
        let mut r = rng.substream(10_000 + k);
        let dim = r.random_range(2..=6);
        let rank = r.random_range(0..dim);
        let v = lib(random_subspace::<f64, _>(0, dim, rank, &mut r))?;
        let a = state(0, &raw(&random_unit_vector::<f64, _>(dim, &mut r)))?;
        ensure(
            lib(check_covering(&a, &v))?,
            format!("covering failed, dim {dim}, rank {rank}"),
        )?;
        // oracle: trace of the joined projector is rank + 1
        let joined = lib(join(&v, &lib(atom(&a))?))?;
        let tr: f64 = (0..dim)
            .map(|i| joined.projector().matrix()[(i, i)].re)
            .sum();
        ensure(
            (tr - (rank + 1) as f64).abs() <= 1e-9,
            format!("trace {tr} for rank {rank} + 1"),
        )?;
    }
    Ok(
        "1000 nested pairs orthomodular, 500 (atom, subspace) pairs covering, dims 2-6 at 1e-9"
            .into(),
    )
}

fn criterion_9() -> Outcome {
    for n in [1usize, 2, 5, 12] {
        let labels: Vec<String> = (0..n).map(|k| format!("p{k}")).collect();
        let space = lib(StateSpace::classical(labels))?;
        let points = space.classical_points();
        let p = lib(axioms::probability_matrix(&points))?;
        let sectors = lib(decompose_sectors(&p))?;
        ensure(
            sectors.len() == n,
            format!("{n} points gave {} sectors", sectors.len()),
        )?;
        // set-level closure computed directly from δ
        for i in 0..n {
            for j in 0..i {
                let perp: Vec<usize> = (0..n).filter(|&x| x != i && x != j).collect();
                let closure: Vec<usize> = (0..n).filter(|x| !perp.contains(x)).collect();
                ensure(closure == vec![j, i], "pair closure oracle")?;
                ensure(
                    axioms::set_orthoplement(&p, &axioms::set_orthoplement(&p, &[i, j])) == closure,
                    "pair orthoclosure differs",
                )?;
            }
        }
        let report = lib(run_cm_suite(&space, &SuiteConfig::default()))?;
        ensure(report.pass, format!("cm suite failed for {n} points"))?;
    }
    let rng = SeededRng::new(9, 9);
    let mut worst = 0.0f64;
    for k in 0..100u64 {
        let mut r = rng.substream(k);
        let x = [r.random_range(-10.0..10.0), r.random_range(-10.0..10.0)];
        worst = worst
            .max((lib(canonical_bracket(|y: &[f64]| y[0], |y: &[f64]| y[1], &x))? - 1.0).abs());
    }
    ensure(worst <= 1e-6, format!("{{q, p}} off by {worst:e}"))?;
    Ok(format!("N in {{1, 2, 5, 12}}: N sectors, pair closure = pair; {{q, p}} = 1 within {worst:.1e} on 100 points"))
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bundle = dir.path().join("qubit.json");
    std::fs::write(
        &bundle,
        r#"{"sectors":[{"kind":"quantum","dim":2,"hbar":1.0}]}"#,
    )
    .map_err(|e| e.to_string())?;
    let run = |out: &str| -> Result<Vec<u8>, String> {
        let path = dir.path().join(out);
        let status = Command::new(env!("CARGO_BIN_EXE_tpspace"))
            .args(["verify", "--suite", "qm", "--seed", "7", "--space"])
            .arg(&bundle)
            .arg("-o")
            .arg(&path)
            .status()
            .map_err(|e| e.to_string())?;
        ensure(
            status.code() == Some(0),
            format!("verify exited with {status}"),
        )?;
        std::fs::read(&path).map_err(|e| e.to_string())
    };
    let first = run("a.json")?;
    let second = run("b.json")?;
    ensure(
        !first.is_empty() && first == second,
        "reports differ between runs",
    )?;
    Ok(format!(
        "two runs of verify --suite qm --seed 7: {} identical bytes",
        first.len()
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("transition-probability axioms", criterion_1),
        ("unitarity", criterion_2),
        ("two-level superpositions", criterion_3),
        ("leaf rank and sectors", criterion_4),
        ("algebra reconstruction", criterion_5),
        ("bracket structure", criterion_6),
        ("hbar inference", criterion_7),
        ("lattice laws", criterion_8),
        ("classical suite", criterion_9),
        ("determinism", criterion_10),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} ({secs:.2}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} ({secs:.2}s)", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
