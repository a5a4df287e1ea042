#![allow(dead_code)]

use qgid::LstSpec;
use rand::Rng;

pub fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

pub fn random_leaf<R: Rng>(rng: &mut R) -> LstSpec {
    match rng.gen_range(0..5) {
        0 => LstSpec::degenerate(rng.gen_range(0.1..3.0)).unwrap(),
        1 => LstSpec::exponential(log_uniform(rng, 0.2, 5.0)).unwrap(),
        2 => LstSpec::mittag_leffler(rng.gen_range(0.3..=1.0), log_uniform(rng, 0.2, 3.0)).unwrap(),
        3 => LstSpec::ml_squared(rng.gen_range(0.55..=1.0)).unwrap(),
        _ => LstSpec::LogMixture,
    }
}

/// A catalog spec, composite with probability about 0.4.
pub fn random_spec<R: Rng>(rng: &mut R) -> LstSpec {
    match rng.gen_range(0..10) {
        0 | 1 => LstSpec::shift(rng.gen_range(0.1..2.0), random_leaf(rng)).unwrap(),
        2 => LstSpec::convolution(vec![random_leaf(rng), random_leaf(rng)]).unwrap(),
        3 => LstSpec::scale_arg(log_uniform(rng, 0.2, 5.0), random_leaf(rng)).unwrap(),
        _ => random_leaf(rng),
    }
}

/// A `(spec, λ)` draw whose mixture has `p_0` away from 0 and 1.
pub fn random_draw<R: Rng>(rng: &mut R) -> (LstSpec, f64) {
    loop {
        let spec = random_spec(rng);
        let lambda = log_uniform(rng, 0.05, 20.0);
        let p0 = spec.value(lambda);
        if p0 > 1e-6 && p0 < 1.0 - 1e-6 {
            return (spec, lambda);
        }
    }
}

/// Every leaf family plus one of each composite.
pub fn catalog() -> Vec<LstSpec> {
    vec![
        LstSpec::degenerate(1.3).unwrap(),
        LstSpec::exponential(0.7).unwrap(),
        LstSpec::mittag_leffler(0.6, 1.5).unwrap(),
        LstSpec::mittag_leffler(1.0, 2.0).unwrap(),
        LstSpec::ml_squared(0.8).unwrap(),
        LstSpec::LogMixture,
        LstSpec::shift(0.5, LstSpec::LogMixture).unwrap(),
        LstSpec::convolution(vec![
            LstSpec::exponential(1.0).unwrap(),
            LstSpec::mittag_leffler(0.7, 0.5).unwrap(),
        ])
        .unwrap(),
        LstSpec::scale_arg(2.5, LstSpec::ml_squared(0.9).unwrap()).unwrap(),
    ]
}

/// `n`-th derivative of `f` at `x` by central differences with two rounds
/// of Richardson extrapolation.
pub fn richardson_derivative(f: impl Fn(f64) -> f64, x: f64, n: usize, h: f64) -> f64 {
    let central = |h: f64| match n {
        0 => f(x),
        1 => (f(x + h) - f(x - h)) / (2.0 * h),
        2 => (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h),
        3 => {
            (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) / (2.0 * h.powi(3))
        }
        4 => {
            (f(x + 2.0 * h) - 4.0 * f(x + h) + 6.0 * f(x) - 4.0 * f(x - h) + f(x - 2.0 * h))
                / h.powi(4)
        }
        _ => panic!("stencil for order {n} not tabulated"),
    };
    let (d0, d1, d2) = (central(h), central(h / 2.0), central(h / 4.0));
    let r0 = (4.0 * d1 - d0) / 3.0;
    let r1 = (4.0 * d2 - d1) / 3.0;
    (16.0 * r1 - r0) / 15.0
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Largest coefficient met while forming `K` from the transform jet at `λ`:
/// the jet itself, `1/φ` and `1/φ²`. Comparisons of two routes to `K` use it
/// as the tolerance scale, since cancellation there bounds attainable accuracy.
pub fn k_route_scale(spec: &LstSpec, lambda: f64, order: usize) -> f64 {
    let phi = spec.jet(lambda, order + 1).unwrap();
    let inverse = phi.recip().unwrap();
    let inverse_sq = inverse.mul(&inverse).unwrap();
    phi.max_abs()
        .max(inverse.max_abs())
        .max(inverse_sq.max_abs())
        .max(1.0)
}
