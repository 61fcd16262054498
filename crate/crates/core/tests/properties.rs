mod common;

use erasure_welch::bounds::{check_bound, trace_inequality_check, EqualityClass, Tolerances};
use erasure_welch::erasure_moments::{expected_moment, moment_polynomial, normalized_trace_power};
use erasure_welch::frames::{coherence, gram, random_frame, welch_floor};
use erasure_welch::manova::{moment_closed, moment_numeric, ManovaLaw, ManovaParams};
use erasure_welch::spectral::ks_distance_to;
use erasure_welch::Field;
use proptest::prelude::*;

fn field(complex: bool) -> Field {
    if complex {
        Field::Complex
    } else {
        Field::Real
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_moments_match_explicit_enumeration(
        m in 1usize..4, extra in 0usize..5, seed: u64, complex: bool, p in 0.0f64..=1.0, d in 1u32..=4
    ) {
        let f = random_frame(m, m + extra, field(complex), seed).unwrap();
        let poly = expected_moment(&f, p, d as usize).unwrap();
        let naive = common::naive_moment(&f, p, d);
        prop_assert!((poly - naive).abs() <= 1e-10 * naive.abs().max(1.0), "{poly} vs {naive}");
    }

    #[test]
    fn moment_polynomial_structure(m in 1usize..6, extra in 0usize..8, seed: u64, complex: bool, d in 1usize..=4) {
        let f = random_frame(m, m + extra, field(complex), seed).unwrap();
        let poly = moment_polynomial(&f, d).unwrap();
        // coefficients of p^1..p^d: linear term 1, total tr((FF')^d)/n
        prop_assert_eq!(poly.coeffs.len(), d);
        prop_assert!((poly.coeffs[0] - 1.0).abs() < 1e-12);
        let total: f64 = poly.coeffs.iter().sum();
        prop_assert!((total - normalized_trace_power(&f, d)).abs() < 1e-10 * total.max(1.0));
    }

    #[test]
    fn erasure_welch_bound_holds(m in 1usize..7, extra in 0usize..10, seed: u64, complex: bool, p in 0.0f64..=1.0, d in 2usize..=4) {
        let f = random_frame(m, m + extra, field(complex), seed).unwrap();
        let r = check_bound(&f, p, d, &Tolerances::default()).unwrap();
        prop_assert!(r.slack >= -1e-9, "slack {}", r.slack);
        prop_assert_ne!(r.equality_class, EqualityClass::Violation);
    }

    #[test]
    fn trace_inequality_holds(m in 1usize..7, extra in 0usize..10, seed: u64, complex: bool, d in 1usize..=6) {
        let f = random_frame(m, m + extra, field(complex), seed).unwrap();
        prop_assert!(trace_inequality_check(&f, d, &Tolerances::default()).unwrap().slack >= -1e-10);
    }

    #[test]
    fn welch_floor_bounds_coherence(m in 1usize..7, extra in 1usize..10, seed: u64, complex: bool) {
        let f = random_frame(m, m + extra, field(complex), seed).unwrap();
        let c = coherence(&f).unwrap();
        prop_assert!(c.rms_sq >= welch_floor(f.m(), f.n()) - 1e-12);
        prop_assert!(c.max_sq >= c.rms_sq - 1e-12);
        let g = gram(&f);
        for i in 0..f.n() {
            prop_assert_eq!(g.get(i, i).re, 1.0);
        }
    }

    #[test]
    fn manova_closed_matches_quadrature(gamma in 0.05f64..=1.0, p in 0.0f64..=1.0, d in 1usize..=4) {
        let params = ManovaParams::new(gamma, p).unwrap();
        let closed = moment_closed(&params, d).unwrap();
        let numeric = moment_numeric(&params, d).unwrap();
        prop_assert!((closed - numeric).abs() <= 1e-6, "{closed} vs {numeric}");
    }

    #[test]
    fn manova_cdf_is_a_distribution_function(gamma in 0.05f64..=1.0, p in 0.0f64..=1.0, ts in proptest::collection::vec(-0.5f64..25.0, 2..20)) {
        let law = ManovaLaw::new(ManovaParams::new(gamma, p).unwrap()).unwrap();
        let mut ts = ts;
        ts.sort_by(f64::total_cmp);
        let mut last = 0.0;
        for t in ts {
            let (lo, hi) = (law.cdf_left(t), law.cdf(t));
            prop_assert!((0.0..=1.0).contains(&hi));
            prop_assert!(lo <= hi + 1e-12);
            prop_assert!(hi + 1e-12 >= last);
            last = hi;
        }
        prop_assert_eq!(law.cdf(1e6), 1.0);
        prop_assert_eq!(law.cdf(-1.0), 0.0);
    }
}

/// Inverse-transform samples from the law reach the KS critical value.
#[test]
fn ks_self_test_on_exact_samples() {
    use rand::Rng;
    let n = 100_000usize;
    let limit = 1.63 / (n as f64).sqrt() + 0.005;
    for (gamma, p) in [(0.5, 0.5), (0.7, 0.6), (0.25, 0.9), (0.9, 0.2)] {
        let law = ManovaLaw::new(ManovaParams::new(gamma, p).unwrap()).unwrap();
        let mut rng = erasure_welch::rng::stream(77, 0);
        let samples: Vec<f64> = (0..n).map(|_| law.quantile(rng.random::<f64>())).collect();
        let d = ks_distance_to(&samples, &law).unwrap();
        assert!(d <= limit, "γ={gamma} p={p}: KS {d} > {limit}");
    }
}
