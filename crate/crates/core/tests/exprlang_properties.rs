use proptest::prelude::*;
use twolevel_core::exprlang::{locate_poles, locate_roots, parse, Expression, ParsedFunction, Ratio};

fn leaf() -> impl Strategy<Value = Expression> {
    prop_oneof![
        3 => Just(Expression::var()),
        2 => (-2.0f64..2.0).prop_map(|c| Expression::constant((c * 100.0).round() / 100.0)),
    ]
}

fn expression() -> impl Strategy<Value = Expression> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a / (b.powi(2) + 1.0)),
            (inner.clone(), 1i64..4).prop_map(|(a, n)| a.powi(n)),
            (inner.clone(), prop_oneof![Just(Ratio::new(1, 3)), Just(Ratio::new(-1, 1)), Just(Ratio::new(2, 3))])
                .prop_map(|(a, p)| (a.powi(2) + 0.5).pow(p)),
            inner.clone().prop_map(|a| (0.5 * a).exp()),
            inner.clone().prop_map(|a| (a.powi(2) + 0.25).ln()),
            inner.clone().prop_map(|a| (a.powi(2) + 1.0).sqrt()),
            inner.clone().prop_map(|a| a.sinh()),
            inner.clone().prop_map(|a| a.cosh()),
            inner.prop_map(|a| a.tanh()),
        ]
    })
}

fn sample_points(seed: f64) -> impl Iterator<Item = f64> {
    (0..100).map(move |i| -1.5 + 3.0 * ((i as f64 + seed) * 0.618_033_988_749_895).fract())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, ..ProptestConfig::default() })]

    #[test]
    fn symbolic_derivatives_match_central_differences(e in expression(), seed in 0.0f64..1.0) {
        let f = ParsedFunction::new(e);
        let h = 1e-3;
        for x in sample_points(seed) {
            for k in 0..3 {
                let g = f.derivative_expr(k);
                let exact = f.eval(k + 1, x);
                let (lo, mid, hi) = (g.eval_f64(x - h), g.eval_f64(x), g.eval_f64(x + h));
                let (lo2, hi2) = (g.eval_f64(x - 2.0 * h), g.eval_f64(x + 2.0 * h));
                // regular points only: moderate size and curvature
                let bound = f.eval(k, x).abs().max(exact.abs());
                let curvature = if k < 2 { f.eval(k + 2, x).abs() } else { (f.eval(3, x + 1e-3) - f.eval(3, x - 1e-3)).abs() / 2e-3 };
                if ![lo, mid, hi, lo2, hi2, exact].iter().all(|v| v.is_finite())
                    || bound > 1e3 || !(curvature < 1e4) {
                    continue;
                }
                // Richardson step removes the h^2 term
                let fd = (8.0 * (hi - lo) - (hi2 - lo2)) / (12.0 * h);
                prop_assert!((exact - fd).abs() <= 1e-6 * (1.0 + exact.abs()),
                    "order {} of {} at {}: {} vs {}", k + 1, f, x, exact, fd);
            }
        }
    }

    #[test]
    fn display_then_parse_is_identity(e in expression(), seed in 0.0f64..1.0) {
        let back = parse(&e.to_string()).unwrap();
        for x in sample_points(seed).take(10) {
            let (a, b) = (e.eval_f64(x), back.eval_f64(x));
            prop_assert!(a.to_bits() == b.to_bits() || (a - b).abs() <= 1e-12 * a.abs().max(1.0) || (a.is_nan() && b.is_nan()),
                "{} -> {}: {} vs {}", e, back, a, b);
        }
    }

    #[test]
    fn roots_are_invariant_under_negation(
        roots in prop::collection::btree_set(-40i32..40, 1..5),
        scale in prop_oneof![0.2f64..5.0, -5.0f64..-0.2],
    ) {
        let locs: Vec<f64> = roots.iter().map(|r| *r as f64 / 10.0).collect();
        let mut e = Expression::constant(scale);
        for r in &locs {
            e = e * (Expression::var() - *r);
        }
        let f = ParsedFunction::new(e.clone());
        let g = ParsedFunction::new(-e);
        let a = locate_roots(&f, (-5.0, 5.0), 2048).unwrap();
        let b = locate_roots(&g, (-5.0, 5.0), 2048).unwrap();
        prop_assert_eq!(a.locations(), b.locations());
        prop_assert_eq!(a.len(), locs.len());
        for (found, want) in a.locations().iter().zip(&locs) {
            prop_assert!((found - want).abs() < 1e-12);
        }
        for z in a.locations() {
            let v = f.eval(0, z).abs();
            let typical = (1.0 + 5f64.powi(locs.len() as i32)) * scale.abs();
            prop_assert!(v < 1e-10 * typical.max(1.0));
            prop_assert!(f.eval(1, z).abs() > 0.0);
        }
    }

    #[test]
    fn poles_of_reciprocal_polynomials(roots in prop::collection::btree_set(-30i32..30, 1..4)) {
        let locs: Vec<f64> = roots.iter().map(|r| *r as f64 / 10.0 + 0.013).collect();
        let mut den = Expression::constant(1.0);
        for r in &locs {
            den = den * (Expression::var() - *r);
        }
        let f = ParsedFunction::new(Expression::constant(2.0) / den);
        let poles = locate_poles(&f, (-4.0, 4.0), 2048).unwrap();
        prop_assert_eq!(poles.len(), locs.len());
        for (p, want) in poles.locations().iter().zip(&locs) {
            prop_assert!((p - want).abs() < 1e-9);
        }
    }
}

#[test]
fn quartic_root_value() {
    let f = parse("x^4+2*x^2-1").unwrap();
    assert!(f.eval_f64(0.643594).abs() < 1e-5);
    let roots = locate_roots(&ParsedFunction::new(f), (-3.0, 3.0), 2048).unwrap();
    let z = (2f64.sqrt() - 1.0).sqrt();
    assert!((roots.locations()[1] - z).abs() < 1e-14);
}

#[test]
fn simple_pole_examples() {
    let p = locate_poles(&ParsedFunction::parse("(x-1)/(x+1)").unwrap(), (-3.0, 3.0), 2048).unwrap();
    assert_eq!(p.locations(), vec![-1.0]);
    let p = locate_poles(&ParsedFunction::parse("x^4+2*x^2-1").unwrap(), (-3.0, 3.0), 2048).unwrap();
    assert!(p.is_empty());
}
