use proptest::prelude::*;
use twolevel_core::catalog::{instantiate_entry, names, Params};
use twolevel_core::construct::{Grid, LevelPair};
use twolevel_core::exprlang::ParsedFunction;
use twolevel_core::pipeline::{construct, construct_and_verify, verify, verify_strict, VerifyOptions};
use twolevel_core::spectral::{
    check_two_levels, count_nodes, discretize, eigenpair_by_index, eigenvalue_by_index, sturm_count, SampledConstruction,
    TridiagonalOperator, DEFAULT_NODE_FLOOR,
};

fn operator(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> TridiagonalOperator {
    let g = Grid::new(a, b, n).unwrap();
    let u: Vec<f64> = g.points().into_iter().map(f).collect();
    discretize(&u, &g).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn sturm_count_is_monotone(
        c in prop::collection::vec(-3.0f64..3.0, 3),
        mut lambdas in prop::collection::vec(-50.0f64..200.0, 2..20),
    ) {
        let t = operator(|x| x.powi(4) + c[0] * x * x + c[1] * x + c[2], -5.0, 5.0, 401);
        lambdas.sort_by(f64::total_cmp);
        let counts: Vec<usize> = lambdas.iter().map(|&l| sturm_count(&t, l)).collect();
        prop_assert!(counts.windows(2).all(|w| w[0] <= w[1]));
        let (lo, hi) = t.gershgorin();
        prop_assert_eq!(sturm_count(&t, lo - 1.0), 0);
        prop_assert_eq!(sturm_count(&t, hi + 1.0), t.dim());
    }

    #[test]
    fn eigenvalues_ordered_and_nodes_match_index(
        c in prop::collection::vec(-2.0f64..2.0, 2),
    ) {
        let t = operator(|x| x * x + c[0] * x.powi(3) / 10.0 + c[1] * (2.0 * x).sin(), -7.0, 7.0, 1401);
        let mut prev = f64::NEG_INFINITY;
        for k in 0..6 {
            let e = eigenpair_by_index(&t, k).unwrap();
            prop_assert!(e.value > prev);
            prop_assert_eq!(e.nodes, k);
            prop_assert_eq!(sturm_count(&t, e.value - 1e-9 * e.value.abs().max(1.0)), k);
            prev = e.value;
        }
    }
}

#[test]
fn oscillator_spectrum() {
    let t = operator(|x| x * x, -8.0, 8.0, 4001);
    for (k, want) in [1.0, 3.0, 5.0].iter().enumerate() {
        let e = eigenvalue_by_index(&t, k);
        assert!((e - want).abs() <= 1e-4, "{k}: {e}");
    }
}

#[test]
fn second_order_convergence_and_richardson() {
    let exact = 3.0;
    let errs: Vec<f64> = [401, 801, 1601]
        .iter()
        .map(|&n| (eigenvalue_by_index(&operator(|x| x * x, -8.0, 8.0, n), 1) - exact).abs())
        .collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.9..4.1).contains(&ratio), "{errs:?}");
    }
    let fine = eigenvalue_by_index(&operator(|x| x * x, -8.0, 8.0, 1601), 1);
    let coarse = eigenvalue_by_index(&operator(|x| x * x, -8.0, 8.0, 801), 1);
    let extrapolated = (4.0 * fine - coarse) / 3.0;
    assert!((extrapolated - exact).abs() < errs[2] / 50.0);
}

#[test]
fn node_counting_ignores_roundoff_tails() {
    let v = [0.0, 1e-12, -1e-13, 0.5, 1.0, 0.5, -0.5, -1.0, -1e-14, 2e-15, 0.0];
    assert_eq!(count_nodes(&v, DEFAULT_NODE_FLOOR), 1);
}

#[test]
fn wrong_indices_fail_verification() {
    let xi = ParsedFunction::parse("x").unwrap();
    let c = construct(&xi, LevelPair::new(1.0, 3.0).unwrap(), Grid::new(-8.0, 8.0, 2001).unwrap()).unwrap();
    let data: SampledConstruction<'_> = (&c.result).into();
    let good = check_two_levels(data, 0, 1, None).unwrap();
    assert!(good.pass, "{}", good.summary());
    let bad = check_two_levels(data, 1, 2, None).unwrap();
    assert!(!bad.pass);
    assert!(verify(&c, None).unwrap().pass);
}

fn instance(name: &str, kv: &[(&str, f64)]) -> twolevel_core::catalog::Instance {
    let p: Params = kv.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    instantiate_entry(name, &p).unwrap()
}

#[test]
fn every_catalog_default_verifies() {
    for name in names() {
        let inst = instance(name, &[]);
        let v = verify_strict(&inst.xi, inst.levels, inst.domain, VerifyOptions::default())
            .unwrap_or_else(|e| panic!("{name}: {e}"));
        let s = &v.report.states;
        assert_eq!((s[0].index, s[1].index), inst.expected, "{name}");
        let gap = inst.levels.delta_e;
        assert!((v.report.gap - gap).abs() <= 1e-3 * gap, "{name}: gap {}", v.report.gap);
        assert!(s.iter().all(|s| s.overlap >= 0.999), "{name}");
    }
}

#[test]
fn hyperbolic_variants_verify() {
    for (d, x0, beta) in [(1.0, 0.5, 0.3), (1.0, 0.5, -0.5), (1.4, -0.3, 0.2)] {
        let inst = instance("hyperbolic", &[("delta", d), ("x0", x0), ("beta", beta)]);
        let v = verify_strict(&inst.xi, inst.levels, inst.domain, VerifyOptions::default())
            .unwrap_or_else(|e| panic!("{d} {x0} {beta}: {e}"));
        assert_eq!((v.report.states[0].index, v.report.states[1].index), (0, 1));
        assert!((v.report.gap - d).abs() <= 1e-4, "gap {}", v.report.gap);
    }
}

#[test]
fn odd_oscillator_pathway() {
    let inst = instance("harmonic-odd", &[]);
    let v = construct_and_verify(&inst.xi, inst.levels, inst.domain, VerifyOptions::default()).unwrap();
    assert!(v.report.pass, "{}", v.report.summary());
    assert_eq!((v.report.states[0].index, v.report.states[1].index), (1, 3));
    assert!((v.report.gap - 4.0).abs() <= 1e-4);
}
