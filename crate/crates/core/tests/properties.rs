use modulaire::entropy::{araki_relative_entropy, entanglement_entropy, entanglement_entropy_of};
use modulaire::factorlab::{
    chain_inner, classify_type, functional_f, trace_property_test, ChainOptions, FiniteSupportOperator, Side, TailRule,
    TensorChainState,
};
use modulaire::linalg::{
    coefficient_matrix, eig_hermitian, hs_inner, kron, operator_norm, partial_trace, random, vdot, vnorm, Subsystem,
};
use modulaire::modular::{relative_modular, tomita_adjoint_apply, tomita_apply, ModularData};
use modulaire::projlat::{leq_positive, preceq, spectral_pvm, Projector};
use modulaire::staralg::{analyze, commutant, generate_algebra};
use modulaire::{ComplexMatrix, Tolerances, C64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cauchy_schwarz(seed: u64, rows in 1usize..6, cols in 1usize..6, scale in 1e-3f64..1e3) {
        let mut r = rng(seed);
        let a = random::gaussian_matrix(&mut r, rows, cols).scale_real(scale);
        let b = random::gaussian_matrix(&mut r, rows, cols);
        let ab = hs_inner(&a, &b).unwrap().norm_sqr();
        let aa = hs_inner(&a, &a).unwrap().re;
        let bb = hs_inner(&b, &b).unwrap().re;
        prop_assert!(ab <= aa * bb * (1.0 + 1e-12));
    }

    #[test]
    fn c_star_identity(seed: u64, rows in 1usize..7, cols in 1usize..7) {
        let a = random::gaussian_matrix(&mut rng(seed), rows, cols);
        let lhs = operator_norm(&(&a.adjoint() * &a));
        let rhs = operator_norm(&a).powi(2);
        prop_assert!((lhs - rhs).abs() < 1e-9 * rhs.max(1.0));
    }

    #[test]
    fn partial_trace_of_products(seed: u64, n in 1usize..5, m in 1usize..5) {
        let mut r = rng(seed);
        let a = random::density(&mut r, n).scale_real(1.7);
        let b = random::density(&mut r, m).scale_real(0.4);
        let ab = kron(&a, &b);
        let keep_first = partial_trace(&ab, (n, m), Subsystem::First).unwrap();
        let keep_second = partial_trace(&ab, (n, m), Subsystem::Second).unwrap();
        prop_assert!(keep_first.approx_eq(&a.scale(b.trace()), 1e-12));
        prop_assert!(keep_second.approx_eq(&b.scale(a.trace()), 1e-12));
    }

    #[test]
    fn eigen_reconstruction(seed: u64, n in 1usize..=64) {
        let t = tol();
        let a = random::hermitian(&mut rng(seed), n);
        let sys = eig_hermitian(&a, &t).unwrap();
        prop_assert!(sys.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!((&sys.reconstruct() - &a).norm() < t.eig * a.norm());
    }

    #[test]
    fn random_generator_sets_give_von_neumann_algebras(seed: u64, n in 1usize..=8, count in 1usize..3) {
        let t = tol();
        let mut r = rng(seed);
        let u = random::unitary(&mut r, n);
        let split = r.random_range(0..=n);
        let gens: Vec<_> = (0..count)
            .map(|_| {
                let g = random::gaussian_matrix(&mut r, n, n);
                let blocked = ComplexMatrix::from_fn(n, n, |i, j| if (i < split) == (j < split) { g.get(i, j) } else { C64::new(0.0, 0.0) });
                &(&u * &blocked) * &u.adjoint()
            })
            .collect();
        let alg = generate_algebra(n, &gens, &t).unwrap();
        prop_assert!(analyze(&alg, &t).is_von_neumann);
    }

    #[test]
    fn coefficient_matrix_is_an_isometry(seed: u64, n in 1usize..6, m in 1usize..6) {
        let psi: Vec<C64> = {
            let mut r = rng(seed);
            (0..n * m).map(|_| random::complex_gaussian(&mut r)).collect()
        };
        let t = coefficient_matrix(&psi, (n, m)).unwrap();
        prop_assert!((t.norm() - vnorm(&psi)).abs() < 1e-12 * vnorm(&psi).max(1.0));
    }

    #[test]
    fn commutant_is_stable_under_two_more_passes(seed: u64, n in 1usize..5, count in 0usize..3) {
        let t = tol();
        let mut r = rng(seed);
        let rank = r.random_range(0..=n);
        let mask = random::projector(&mut r, n, rank);
        let gens: Vec<_> = (0..count).map(|_| &(&mask * &random::gaussian_matrix(&mut r, n, n)) * &mask).collect();
        let alg = generate_algebra(n, &gens, &t).unwrap();
        let c1 = commutant(&alg, &t);
        let c3 = commutant(&commutant(&c1, &t), &t);
        prop_assert!(c1.span_equals(&c3, &t));
        prop_assert!(analyze(&alg, &t).is_von_neumann);
    }

    #[test]
    fn commutative_algebras_sit_in_their_commutant(seed: u64, n in 1usize..6) {
        let t = tol();
        let h = random::hermitian(&mut rng(seed), n);
        let alg = generate_algebra(n, &[h], &t).unwrap();
        prop_assert!(alg.is_commutative(&t));
        prop_assert!(alg.is_subalgebra_of(&commutant(&alg, &t), &t));
    }

    #[test]
    fn spectral_projectors_collapse(seed: u64, n in 1usize..7) {
        let t = tol();
        let x = random::hermitian(&mut rng(seed), n);
        let pvm = spectral_pvm(&x, &t).unwrap();
        for (value, p) in pvm.values.iter().zip(&pvm.projectors) {
            let lhs = &x * p.matrix();
            prop_assert!(lhs.approx_eq(&p.matrix().scale_real(*value), 1e-9));
            let spec = eig_hermitian(p.matrix(), &t).unwrap().eigenvalues;
            prop_assert!(spec.iter().all(|&e| e.abs() < 1e-9 || (e - 1.0).abs() < 1e-9));
        }
    }

    #[test]
    fn positivity_order_implies_preorder(seed: u64, n in 2usize..7) {
        let t = tol();
        let mut r = rng(seed);
        let rank = r.random_range(1..=n);
        let q = Projector::new(random::projector(&mut r, n, rank), &t).unwrap();
        let p = q.subprojector(r.random_range(0..=rank));
        prop_assert!(leq_positive(&p, &q, &t).unwrap());
        prop_assert!(preceq(&p, &q, &t).unwrap());
    }

    #[test]
    fn coefficient_matrix_gives_both_reductions(seed: u64, n in 2usize..6) {
        let t = tol();
        let psi = random::full_rank_state(&mut rng(seed), n, 0.05);
        let md = ModularData::new(&psi, (n, n), &t).unwrap();
        let tilde = md.tilde();
        prop_assert!((&tilde * &tilde.adjoint()).approx_eq(md.rho1().matrix(), 1e-12));
        prop_assert!((&tilde.adjoint() * &tilde).approx_eq(&md.rho2().matrix().conj(), 1e-12));
    }

    #[test]
    fn tomita_is_antilinear(seed: u64, n in 2usize..6) {
        let t = tol();
        let mut r = rng(seed);
        let psi = random::full_rank_state(&mut r, n, 0.05);
        let md = ModularData::new(&psi, (n, n), &t).unwrap();
        let xi = random::unit_vector(&mut r, n * n);
        let eta = random::unit_vector(&mut r, n * n);
        let alpha = random::complex_gaussian(&mut r);
        let beta = random::complex_gaussian(&mut r);
        let combo: Vec<C64> = xi.iter().zip(&eta).map(|(x, y)| alpha * x + beta * y).collect();
        let lhs = tomita_apply(&md, &combo).unwrap();
        let sx = tomita_apply(&md, &xi).unwrap();
        let se = tomita_apply(&md, &eta).unwrap();
        let rhs: Vec<C64> = sx.iter().zip(&se).map(|(x, y)| alpha.conj() * x + beta.conj() * y).collect();
        prop_assert!(max_diff(&lhs, &rhs) < 1e-9);
    }

    #[test]
    fn tomita_adjoint_relation(seed: u64, n in 2usize..6) {
        let t = tol();
        let mut r = rng(seed);
        let psi = random::full_rank_state(&mut r, n, 0.05);
        let md = ModularData::new(&psi, (n, n), &t).unwrap();
        let xi = random::unit_vector(&mut r, n * n);
        let eta = random::unit_vector(&mut r, n * n);
        let lhs = vdot(&tomita_apply(&md, &xi).unwrap(), &eta);
        let rhs = vdot(&tomita_adjoint_apply(&md, &eta).unwrap(), &xi);
        prop_assert!((lhs - rhs).norm() < 1e-9);
    }

    #[test]
    fn relative_flow_depends_on_phi_only(seed: u64, n in 2usize..5, s in -3.0f64..3.0) {
        let t = tol();
        let mut r = rng(seed);
        let psi = random::full_rank_state(&mut r, n, 0.05);
        let psi2 = random::full_rank_state(&mut r, n, 0.05);
        let phi = random::unit_vector(&mut r, n * n);
        let a = random::gaussian_matrix(&mut r, n, n);
        let f1 = relative_modular(&psi, &phi, (n, n), &t).unwrap().flow(&a, s).unwrap();
        let f2 = relative_modular(&psi2, &phi, (n, n), &t).unwrap().flow(&a, s).unwrap();
        prop_assert!(f1.approx_eq(&f2, 1e-9 * a.max_abs().max(1.0)));
    }

    #[test]
    fn entanglement_entropy_symmetries(seed: u64, n in 1usize..5, m in 1usize..5) {
        let t = tol();
        let mut r = rng(seed);
        let psi = random::unit_vector(&mut r, n * m);
        let s1 = entanglement_entropy_of(&psi, (n, m), Subsystem::First, &t).unwrap().value;
        let s2 = entanglement_entropy_of(&psi, (n, m), Subsystem::Second, &t).unwrap().value;
        prop_assert!((s1 - s2).abs() < 1e-10);
        let local = kron(&random::unitary(&mut r, n), &random::unitary(&mut r, m));
        let rotated = entanglement_entropy(&local.apply(&psi), (n, m), &t).unwrap().value;
        prop_assert!((rotated - s1).abs() < 1e-10);
    }

    #[test]
    fn klein_inequality(seed: u64, n in 2usize..9) {
        let t = tol();
        let mut r = rng(seed);
        let psi = random::full_rank_state(&mut r, n, 0.05);
        let phi = random::unit_vector(&mut r, n * n);
        prop_assert!(araki_relative_entropy(&psi, &phi, (n, n), &t).unwrap().value >= -t.eig);
    }

    #[test]
    fn chain_inner_is_conjugate_symmetric(seed: u64, lambda in 0.05f64..1.0, len in 0usize..4) {
        let t = tol();
        let mut r = rng(seed);
        let prefix: Vec<ComplexMatrix> = (0..len)
            .map(|_| {
                let m = random::gaussian_matrix(&mut r, 2, 2);
                m.scale_real(1.0 / m.norm())
            })
            .collect();
        let v = TensorChainState::new(prefix.clone(), TailRule::Constant { lambda }, 120, &t).unwrap();
        let w = TensorChainState::new(prefix, TailRule::Constant { lambda: (lambda + 0.3).min(1.0) }, 120, &t).unwrap();
        let opts = ChainOptions::default();
        let vw = chain_inner(&v, &w, &opts).unwrap().value;
        let wv = chain_inner(&w, &v, &opts).unwrap().value;
        prop_assert!((vw - wv.conj()).norm() < 1e-12);
        prop_assert!((chain_inner(&v, &v, &opts).unwrap().value - 1.0).norm() < 1e-12);
    }

    #[test]
    fn functional_is_linear(seed: u64, lambda in 0.05f64..1.0) {
        let state = TensorChainState::from_tail(TailRule::Constant { lambda }, 60).unwrap();
        let mut r = rng(seed);
        let shared: BTreeMap<usize, ComplexMatrix> =
            [2, 5].into_iter().map(|k| (k, random::gaussian_matrix(&mut r, 2, 2))).collect();
        let x = random::gaussian_matrix(&mut r, 2, 2);
        let y = random::gaussian_matrix(&mut r, 2, 2);
        let alpha = random::complex_gaussian(&mut r);
        let f = |last: ComplexMatrix| {
            let mut factors = shared.clone();
            factors.insert(9, last);
            functional_f(&state, &FiniteSupportOperator::new(factors, Side::LeftAction).unwrap()).unwrap()
        };
        let lhs = f(&x + &y.scale(alpha));
        let rhs = f(x) + alpha * f(y);
        prop_assert!((lhs - rhs).norm() < 1e-10 * (1.0 + rhs.norm()));
    }

    #[test]
    fn witness_matches_closed_form(lambda in 0.01f64..0.99) {
        let state = TensorChainState::from_tail(TailRule::Constant { lambda }, 20).unwrap();
        let w = trace_property_test(&state, 1, 0, &tol()).unwrap().witness.unwrap();
        prop_assert!((w.f_ab - 1.0 / (1.0 + lambda)).abs() < 1e-12);
        prop_assert!((w.f_ba - lambda / (1.0 + lambda)).abs() < 1e-12);
    }

    #[test]
    fn classification_ignores_finite_heads(
        head in proptest::collection::vec(0.01f64..1.0, 0..6),
        lambda in 0.05f64..0.95,
    ) {
        let t = tol();
        let rest = TailRule::Constant { lambda };
        let with_head = TailRule::WithHead { head, rest: Box::new(rest.clone()) };
        prop_assert_eq!(classify_type(&rest, 400, &t).unwrap(), classify_type(&with_head, 400, &t).unwrap());
    }
}
