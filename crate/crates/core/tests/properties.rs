use proptest::prelude::*;
use tpspace::lattice::{
    check_orthomodular, complement, join, meet, random_nested_pair, random_subspace,
};
use tpspace::linalg::{
    commutator, eig_hermitian, expm_skew, max_abs, max_abs_diff, random_hermitian, unitarity_defect,
};
use tpspace::poisson::{bracket_operators, bracket_sample, flow_operator, infer_hbar, FlowMethod};
use tpspace::states::transition_probability;
use tpspace::{
    BracketOracle, BracketOracleF32, ComplexMatrix, HermitianOperator, PureState, PureStateF32,
    SeededRng, StateSpace, StateSpaceF32,
};

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig {
        cases: n,
        ..ProptestConfig::default()
    }
}

fn random_pair(dim: usize, seed: u64) -> (PureState, PureState) {
    let space = StateSpace::quantum(&[dim]).unwrap();
    let mut rng = SeededRng::new(seed, 0);
    (
        space.random_state(0, &mut rng).unwrap(),
        space.random_state(0, &mut rng).unwrap(),
    )
}

fn hermitians(dim: usize, seed: u64, count: usize) -> Vec<HermitianOperator> {
    let mut rng = SeededRng::new(seed, 1);
    (0..count)
        .map(|_| random_hermitian(dim, &mut rng))
        .collect()
}

proptest! {
    #![proptest_config(cases(128))]

    #[test]
    fn transition_probability_symmetric_and_bounded(dim in 1usize..=8, seed in any::<u64>()) {
        let (a, b) = random_pair(dim, seed);
        let ab = transition_probability(&a, &b).unwrap();
        let ba = transition_probability(&b, &a).unwrap();
        prop_assert_eq!(ab.to_bits(), ba.to_bits());
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&ab));
        prop_assert!((transition_probability(&a, &a).unwrap() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn transition_probability_is_unitarily_invariant(dim in 1usize..=6, seed in any::<u64>(), t in -5.0f64..5.0) {
        let (a, b) = random_pair(dim, seed);
        let u = expm_skew(&hermitians(dim, seed, 1)[0], t).unwrap();
        let before = transition_probability(&a, &b).unwrap();
        let after = transition_probability(&a.transformed(&u).unwrap(), &b.transformed(&u).unwrap()).unwrap();
        prop_assert!((before - after).abs() <= 1e-10);
    }

    #[test]
    fn bracket_antisymmetric_and_bilinear(dim in 1usize..=6, seed in any::<u64>(), s in -3.0f64..3.0, hbar in 0.1f64..10.0) {
        let (rho, _) = random_pair(dim, seed);
        let ops = hermitians(dim, seed, 3);
        let oracle = BracketOracle::operator(hbar).unwrap();
        let br = |a: &HermitianOperator, b: &HermitianOperator| bracket_operators(a, b, &rho, &oracle).unwrap();
        prop_assert_eq!(br(&ops[0], &ops[1]), -br(&ops[1], &ops[0]));
        let combo = ops[0].scale(s).add(&ops[2]);
        let lhs = br(&combo, &ops[1]);
        let rhs = s * br(&ops[0], &ops[1]) + br(&ops[2], &ops[1]);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn bracket_matches_commutator_trace(dim in 1usize..=6, seed in any::<u64>(), hbar in 0.1f64..10.0) {
        // (i/ħ) Tr(ρ [A, B]) from the matrices directly
        let (rho, _) = random_pair(dim, seed);
        let ops = hermitians(dim, seed, 2);
        let c = commutator(ops[0].matrix(), ops[1].matrix());
        let psi = rho.vector().unwrap();
        let tr = (psi.adjoint() * c * psi)[(0, 0)];
        let expected = -tr.im / hbar;
        let got = bracket_operators(&ops[0], &ops[1], &rho, &BracketOracle::operator(hbar).unwrap()).unwrap();
        prop_assert!((got - expected).abs() <= 1e-10 * (1.0 + expected.abs()));
    }

    #[test]
    fn jacobi_identity_on_operators(dim in 1usize..=5, seed in any::<u64>()) {
        let ops = hermitians(dim, seed, 3);
        let (a, b, c) = (ops[0].matrix(), ops[1].matrix(), ops[2].matrix());
        let sum = commutator(a, &commutator(b, c)) + commutator(b, &commutator(c, a)) + commutator(c, &commutator(a, b));
        let scale = max_abs(a) * max_abs(b) * max_abs(c);
        prop_assert!(max_abs(&sum) <= 1e-12 * (1.0 + scale));
    }

    #[test]
    fn expm_group_law(dim in 1usize..=6, seed in any::<u64>(), s in -4.0f64..4.0, t in -4.0f64..4.0) {
        let a = &hermitians(dim, seed, 1)[0];
        let us = expm_skew(a, s).unwrap();
        let ut = expm_skew(a, t).unwrap();
        let ust = expm_skew(a, s + t).unwrap();
        prop_assert!(unitarity_defect(&us) <= 1e-10);
        prop_assert!(max_abs_diff(&(&us * &ut), &ust) <= 1e-9);
        let id = expm_skew(a, 0.0).unwrap();
        prop_assert!(max_abs_diff(&id, &ComplexMatrix::identity(dim, dim)) <= 1e-12);
    }

    #[test]
    fn exact_flow_preserves_energy_and_hbar(dim in 2usize..=5, seed in any::<u64>(), hbar in 0.2f64..5.0) {
        let (rho, _) = random_pair(dim, seed);
        let ops = hermitians(dim, seed, 3);
        let (h, a, b) = (&ops[0], &ops[1], &ops[2]);
        let times = [0.0, 0.3, 1.1, 2.5];
        let flow = flow_operator(h, &rho, &times, hbar, FlowMethod::Exact).unwrap();
        let oracle = BracketOracle::operator(hbar).unwrap();
        let e0 = h.expectation_in(rho.vector().unwrap());
        for state in flow.states() {
            let e = h.expectation_in(state.vector().unwrap());
            prop_assert!((e - e0).abs() <= 1e-9 * (1.0 + e0.abs()));
            let sample = bracket_sample(a, b, state, &oracle).unwrap();
            if sample.bracket.abs() > 1e-6 {
                let est = infer_hbar(&[sample]).unwrap();
                prop_assert!((est - hbar).abs() / hbar <= 1e-9);
            }
        }
    }
}

proptest! {
    #![proptest_config(cases(32))]

    #[test]
    fn eigen_residual(dim in 1usize..=32, seed in any::<u64>()) {
        let a = &hermitians(dim, seed, 1)[0];
        let eig = eig_hermitian(a).unwrap();
        let v = &eig.eigenvectors;
        prop_assert!(unitarity_defect(v) <= 1e-10);
        prop_assert!(eig.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        let scale = 1.0 + max_abs(a.matrix());
        prop_assert!(max_abs_diff(&eig.reconstruct(), a.matrix()) <= 1e-12 * scale * dim as f64);
    }

    #[test]
    fn rk4_tracks_exact_flow(dim in 1usize..=4, seed in any::<u64>()) {
        let (rho, _) = random_pair(dim, seed);
        let h = &hermitians(dim, seed, 1)[0];
        let times = [0.0, 0.5, 1.0];
        let exact = flow_operator(h, &rho, &times, 1.0, FlowMethod::Exact).unwrap();
        let rk4 = flow_operator(h, &rho, &times, 1.0, FlowMethod::Rk4 { steps: 2000 }).unwrap();
        prop_assert!(exact.max_distance(&rk4) <= 1e-6);
    }

    #[test]
    fn lattice_de_morgan(dim in 1usize..=6, seed in any::<u64>(), r1 in 0usize..=6, r2 in 0usize..=6) {
        let mut rng = SeededRng::new(seed, 2);
        let v = random_subspace::<f64, _>(0, dim, r1.min(dim), &mut rng).unwrap();
        let w = random_subspace::<f64, _>(0, dim, r2.min(dim), &mut rng).unwrap();
        let lhs = complement(&join(&v, &w).unwrap());
        let rhs = meet(&complement(&v), &complement(&w)).unwrap();
        prop_assert!(lhs.distance(&rhs) <= 1e-9);
        let m = meet(&v, &w).unwrap();
        let j = join(&v, &w).unwrap();
        prop_assert!(m.is_subspace_of(&v, 1e-9) && m.is_subspace_of(&w, 1e-9));
        prop_assert!(v.is_subspace_of(&j, 1e-9) && w.is_subspace_of(&j, 1e-9));
        prop_assert!(complement(&complement(&v)).distance(&v) <= 1e-9);
    }

    #[test]
    fn lattice_orthomodular(dim in 1usize..=6, seed in any::<u64>(), a in 0usize..=6, b in 0usize..=6) {
        let outer = a.max(b).min(dim);
        let inner = a.min(b).min(outer);
        let mut rng = SeededRng::new(seed, 3);
        let (v, w) = random_nested_pair::<f64, _>(0, dim, inner, outer, &mut rng).unwrap();
        prop_assert!(check_orthomodular(&v, &w).unwrap());
    }
}

proptest! {
    #![proptest_config(cases(32))]

    #[test]
    fn f32_smoke(dim in 1usize..=4, seed in any::<u64>()) {
        let space = StateSpaceF32::quantum(&[dim]).unwrap();
        let mut rng = SeededRng::new(seed, 4);
        let a: PureStateF32 = space.random_state(0, &mut rng).unwrap();
        let b: PureStateF32 = space.random_state(0, &mut rng).unwrap();
        let p = transition_probability(&a, &b).unwrap();
        prop_assert_eq!(p.to_bits(), transition_probability(&b, &a).unwrap().to_bits());
        prop_assert!((-1e-5..=1.0 + 1e-5).contains(&p));
        let ops: Vec<_> = (0..2).map(|_| random_hermitian::<f32, _>(dim, &mut rng)).collect();
        let oracle = BracketOracleF32::operator(1.0).unwrap();
        let ab = bracket_operators(&ops[0], &ops[1], &a, &oracle).unwrap();
        let ba = bracket_operators(&ops[1], &ops[0], &a, &oracle).unwrap();
        prop_assert_eq!(ab, -ba);
        let u = expm_skew(&ops[0], 0.7f32).unwrap();
        prop_assert!(unitarity_defect(&u) <= 1e-5);
    }
}
