mod common;

use common::{factorial, k_route_scale, random_draw, random_leaf, random_spec};
use proptest::collection::vec;
use proptest::prelude::*;
use qgid::analysis::{
    k_jet, mixture_precheck, nid_k_jet, qgid_test, reconstruct_check, split_pgf, QMethod,
    SemigroupFamily, Settings,
};
use qgid::lst::poisson_mixture_pmf;
use qgid::recursions::{a_from_p, b_from_r, logconvexity_check, p_from_a, p_from_r, r_from_p};
use qgid::{LstSpec, TruncatedSeries};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;
/// Past this order, fast-decaying mixing laws make both routes to `K`
/// cancellation-limited well above 1e-10.
const K_ORDER: usize = 12;

fn series(coeffs: Vec<f64>) -> TruncatedSeries {
    TruncatedSeries::new(coeffs, 0.0).unwrap()
}

fn close(x: &TruncatedSeries, y: &TruncatedSeries, tol: f64) -> bool {
    let scale = x.max_abs().max(y.max_abs()).max(1.0);
    x.coeffs()
        .iter()
        .zip(y.coeffs())
        .all(|(a, b)| (a - b).abs() <= tol * scale)
}

fn coeffs(len: usize) -> impl Strategy<Value = Vec<f64>> {
    vec(-2.0..2.0f64, len)
}

fn positive_head(len: usize) -> impl Strategy<Value = Vec<f64>> {
    (0.5..2.0f64, vec(-1.0..1.0f64, len - 1)).prop_map(|(c0, mut rest)| {
        rest.insert(0, c0);
        rest
    })
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(a in coeffs(12), b in coeffs(12), c in coeffs(12)) {
        let (a, b, c) = (series(a), series(b), series(c));
        prop_assert!(close(&a.add(&b).unwrap(), &b.add(&a).unwrap(), TOL));
        prop_assert!(close(&a.mul(&b).unwrap(), &b.mul(&a).unwrap(), TOL));
        let left = a.mul(&b).unwrap().mul(&c).unwrap();
        let right = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert!(close(&left, &right, TOL));
        let left = a.mul(&b.add(&c).unwrap()).unwrap();
        let right = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
        prop_assert!(close(&left, &right, TOL));
        let left = a.add(&b).unwrap().add(&c).unwrap();
        let right = a.add(&b.add(&c).unwrap()).unwrap();
        prop_assert!(close(&left, &right, TOL));
    }

    #[test]
    fn reciprocal_is_inverse(a in positive_head(16)) {
        let s = series(a);
        let unit = s.mul(&s.recip().unwrap()).unwrap();
        prop_assert!(close(&unit, &TruncatedSeries::one(0.0, 15), TOL));
        prop_assert!(close(&s.recip().unwrap().recip().unwrap(), &s, TOL));
    }

    #[test]
    fn powers_add(a in positive_head(12), alpha in -2.0..2.0f64, beta in -2.0..2.0f64) {
        let s = series(a);
        let whole = s.powf(alpha + beta).unwrap();
        let split = s.powf(alpha).unwrap().mul(&s.powf(beta).unwrap()).unwrap();
        prop_assert!(close(&whole, &split, 1e-8));
    }

    #[test]
    fn exp_inverts_ln(a in positive_head(12)) {
        let s = series(a);
        prop_assert!(close(&s.ln().unwrap().exp().unwrap(), &s, TOL));
    }

    #[test]
    fn p0_is_transform_value(seed in any::<u64>()) {
        let mut r = rng(seed);
        let spec = random_spec(&mut r);
        let lambda = common::log_uniform(&mut r, 0.05, 20.0);
        let pmf = poisson_mixture_pmf(&spec, lambda, 16).unwrap();
        prop_assert!((pmf.probs()[0] - spec.value(lambda)).abs() <= 1e-12);
        prop_assert!(pmf.mass() <= 1.0 + 1e-9);
    }

    #[test]
    fn degenerate_mixture_is_poisson(x0 in 0.1..3.0f64, lambda in 0.05..10.0f64) {
        let pmf = poisson_mixture_pmf(&LstSpec::degenerate(x0).unwrap(), lambda, 24).unwrap();
        let mean = lambda * x0;
        for (n, p) in pmf.probs().iter().enumerate() {
            let expected = (-mean).exp() * mean.powi(n as i32) / factorial(n);
            prop_assert!((p - expected).abs() <= 1e-12 * expected.max(1e-300) + 1e-300);
        }
    }

    #[test]
    fn scale_arg_moves_lambda(seed in any::<u64>(), c in 0.2..5.0f64, lambda in 0.05..5.0f64) {
        let inner = random_leaf(&mut rng(seed));
        let scaled = LstSpec::scale_arg(c, inner.clone()).unwrap();
        let left = poisson_mixture_pmf(&scaled, lambda, 20).unwrap();
        let right = poisson_mixture_pmf(&inner, c * lambda, 20).unwrap();
        for (x, y) in left.probs().iter().zip(right.probs()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn convolution_convolves_pmfs(seed in any::<u64>(), lambda in 0.05..5.0f64) {
        let mut r = rng(seed);
        let (a, b) = (random_leaf(&mut r), random_leaf(&mut r));
        let both = LstSpec::convolution(vec![a.clone(), b.clone()]).unwrap();
        let n = 20;
        let pa = poisson_mixture_pmf(&a, lambda, n).unwrap();
        let pb = poisson_mixture_pmf(&b, lambda, n).unwrap();
        let pc = poisson_mixture_pmf(&both, lambda, n).unwrap();
        for k in 0..=n {
            let conv: f64 = (0..=k).map(|j| pa.probs()[j] * pb.probs()[k - j]).sum();
            prop_assert!((pc.probs()[k] - conv).abs() <= 1e-12);
        }
    }

    #[test]
    fn recursions_round_trip(seed in any::<u64>()) {
        let (spec, lambda) = random_draw(&mut rng(seed));
        let pmf = poisson_mixture_pmf(&spec, lambda, 24).unwrap();
        let p = pmf.probs();
        let a = a_from_p(p, TOL).unwrap().seq;
        let r = r_from_p(p, TOL).unwrap();
        for (x, y) in p_from_a(p[0], &a.values).iter().zip(p) {
            prop_assert!((x - y).abs() <= TOL * a.scale.max(1.0));
        }
        for (x, y) in p_from_r(p[0], &r.values).iter().zip(p) {
            prop_assert!((x - y).abs() <= TOL * r.scale.max(1.0));
        }
    }

    #[test]
    fn a_and_b_characterizations_agree(seed in any::<u64>()) {
        let (spec, lambda) = random_draw(&mut rng(seed));
        let pmf = poisson_mixture_pmf(&spec, lambda, 24).unwrap();
        let a = a_from_p(pmf.probs(), TOL).unwrap().seq;
        let r = r_from_p(pmf.probs(), TOL).unwrap();
        let b = b_from_r(&r.values, TOL).unwrap().seq;
        prop_assert_eq!(a.nonneg, b.nonneg);
        prop_assert_eq!(a.violation_index().map(|i| i + 1), b.violation_index());
        for (n, an) in a.values.iter().enumerate() {
            prop_assert!((b.values[n + 1] - an).abs() <= 1e-6 * a.scale.max(1.0));
        }
    }

    #[test]
    fn log_convex_pmf_is_gid(p0 in 0.05..0.95f64, ratios in vec(0.05..1.0f64, 20)) {
        // p_{n+1}/p_n nondecreasing and below one
        let mut ratios = ratios;
        ratios.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut p = vec![p0];
        for rho in &ratios {
            let last = p[p.len() - 1];
            p.push(last * rho * (1.0 - p0));
        }
        prop_assert!(logconvexity_check(&p, TOL).unwrap().holds);
        prop_assert!(a_from_p(&p, TOL).unwrap().seq.nonneg);
    }

    #[test]
    fn methods_agree(seed in any::<u64>()) {
        let (spec, lambda) = random_draw(&mut rng(seed));
        let s = Settings::with_order(48);
        let q = qgid_test(&spec, lambda, QMethod::QSeries, &s).unwrap();
        let a = qgid_test(&spec, lambda, QMethod::ARecursion, &s).unwrap();
        prop_assert_eq!(q.holds, a.holds);
        prop_assert_eq!(q.violation_index(), a.violation_index());
    }

    #[test]
    fn membership_closed_downward(seed in any::<u64>(), shrink in 0.01..1.0f64) {
        let (spec, lambda) = random_draw(&mut rng(seed));
        let s = Settings::with_order(32);
        if qgid_test(&spec, lambda, QMethod::QSeries, &s).unwrap().holds {
            prop_assert!(qgid_test(&spec, lambda * shrink, QMethod::QSeries, &s).unwrap().holds);
        }
    }

    #[test]
    fn scaling_law(seed in any::<u64>(), c in 0.2..5.0f64) {
        let (spec, lambda) = random_draw(&mut rng(seed));
        let s = Settings::with_order(32);
        let base = qgid_test(&spec, lambda, QMethod::ARecursion, &s).unwrap();
        let scaled = LstSpec::scale_arg(c, spec).unwrap();
        let moved = qgid_test(&scaled, lambda / c, QMethod::ARecursion, &s).unwrap();
        prop_assert_eq!(base.violation_index(), moved.violation_index());
    }

    #[test]
    fn reconstruction_residual(seed in any::<u64>(), p in 0.01..0.99f64) {
        let (spec, lambda) = random_draw(&mut rng(seed));
        let residual = reconstruct_check(&spec, lambda, p, &Settings::with_order(32)).unwrap();
        prop_assert!(residual <= TOL);
    }

    #[test]
    fn classical_k_is_log_derivative(seed in any::<u64>()) {
        let (spec, lambda) = random_draw(&mut rng(seed));
        let s = Settings::with_order(K_ORDER);
        let nid = nid_k_jet(SemigroupFamily::Classical, &spec, lambda, &s).unwrap();
        let phi = spec.jet(lambda, K_ORDER + 1).unwrap();
        let direct = phi.derivative().unwrap().div(&phi.truncate(K_ORDER)).unwrap().neg();
        let scale = k_route_scale(&spec, lambda, K_ORDER).max(direct.max_abs());
        for (x, y) in nid.jet.coeffs().iter().zip(direct.coeffs()) {
            prop_assert!((x - y).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn geometric_k_matches_direct_jet(seed in any::<u64>()) {
        let (spec, lambda) = random_draw(&mut rng(seed));
        let s = Settings::with_order(K_ORDER);
        let nid = nid_k_jet(SemigroupFamily::Geometric, &spec, lambda, &s).unwrap();
        let direct = k_jet(&spec, lambda, K_ORDER).unwrap();
        let scale = k_route_scale(&spec, lambda, K_ORDER).max(direct.max_abs());
        for (x, y) in nid.jet.coeffs().iter().zip(direct.coeffs()) {
            prop_assert!((x - y).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn gid_laws_split_into_pgfs(
        which in 0usize..3,
        param in 0.2..3.0f64,
        alpha in 0.3..1.0f64,
        lambda in 0.05..10.0f64,
    ) {
        let spec = match which {
            0 => LstSpec::exponential(param).unwrap(),
            1 => LstSpec::mittag_leffler(alpha, param).unwrap(),
            _ => LstSpec::LogMixture,
        };
        let s = Settings::with_order(32);
        for p in [0.05, 0.25, 0.5, 0.75, 0.95] {
            prop_assert!(split_pgf(&spec, lambda, p, &s).unwrap().is_pgf);
        }
    }

    #[test]
    fn exponential_mixture_passes_precheck(theta in 0.2..5.0f64, lambda in 0.05..5.0f64) {
        // λ-Poisson mixture of an exponential is geometric, H(z) = θλ(1 - z)
        let pgf = poisson_mixture_pmf(&LstSpec::exponential(theta).unwrap(), lambda, 64)
            .unwrap()
            .probs()
            .to_vec();
        let report = mixture_precheck(&pgf, &qgid::analysis::DEFAULT_Z_GRID, 6, TOL).unwrap();
        prop_assert!(report.holds);
        for point in report.points.iter().filter(|p| p.holds.is_some()) {
            let h = &point.h_derivatives;
            let expected = theta * lambda * (1.0 - point.z);
            prop_assert!((h[0] - expected).abs() <= 1e-6 * expected.max(1.0));
        }
    }
}
