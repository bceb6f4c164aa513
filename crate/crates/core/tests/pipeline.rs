use regvar_core::kendall::{analyze, lattice, AnPolicy, AnalysisOptions, KendallInput, Mode, Status, TestSet};
use regvar_core::sequences::{AdmissibilityKind, Generator, SequenceSpec};
use regvar_core::{EquationClass, PopaParam};

fn identity_seq() -> SequenceSpec {
    SequenceSpec::new(AdmissibilityKind::Multiplicative, Generator::Identity, 0)
}

fn karamata(f: &str, b: TestSet) -> KendallInput {
    KendallInput { f: f.parse().unwrap(), seq: identity_seq(), test_set: b, a_policy: AnPolicy::Reciprocal, mode: Mode::Karamata }
}

fn beurling(f: &str, phi: &str, b: TestSet) -> KendallInput {
    KendallInput {
        f: f.parse().unwrap(),
        seq: identity_seq(),
        test_set: b,
        a_policy: AnPolicy::Reciprocal,
        mode: Mode::Beurling { phi: phi.parse().unwrap() },
    }
}

fn quick(n: usize) -> AnalysisOptions {
    AnalysisOptions { n, lattice_points: 81, uct: None, ..AnalysisOptions::default() }
}

#[test]
fn karamata_index_with_holes() {
    let input = karamata("pow_slowvar(1.7, log2)", TestSet::with_even_holes(1.0, 2.0, 0.1, 3).unwrap());
    let r = analyze(&input, &AnalysisOptions { uct: None, ..AnalysisOptions::default() }).unwrap();
    assert_eq!(r.status, Status::Converged);
    assert!((r.kappa_hat.unwrap() - 1.7).abs() < 1e-6);
    assert!(r.mult_residual.unwrap() < 1e-6);
    assert!(r.rescfe_residual.unwrap() < 1e-6);
    assert!((r.c_hat.unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(r.segments.len(), 4);
    assert!(r.segments.iter().all(|s| (s.constant - 1.0).abs() < 1e-6));
}

#[test]
fn hole_fraction_up_to_thirty_percent() {
    for fraction in [0.05, 0.1, 0.2, 0.3] {
        let input = karamata("pow_slowvar(-0.8, log)", TestSet::with_even_holes(1.0, 2.0, fraction, 5).unwrap());
        let r = analyze(&input, &quick(200_000)).unwrap();
        assert_eq!(r.status, Status::Converged, "fraction {fraction}");
        assert!((r.kappa_hat.unwrap() + 0.8).abs() < 1e-6, "fraction {fraction}: {:?}", r.kappa_hat);
    }
}

#[test]
fn iterated_log_factor_is_slower() {
    let input = karamata("pow_slowvar(-0.8, loglog)", TestSet::interval(1.0, 2.0).unwrap());
    let err = |n| (analyze(&input, &quick(n)).unwrap().kappa_hat.unwrap() + 0.8).abs();
    let (coarse, fine) = (err(10_000), err(1_000_000));
    assert!(fine < 1e-2 && fine < coarse, "{coarse} {fine}");
}

#[test]
fn constant_function_has_index_zero() {
    let r = analyze(&karamata("const(4)", TestSet::interval(1.0, 2.0).unwrap()), &quick(10_000)).unwrap();
    assert_eq!(r.status, Status::Converged);
    assert_eq!(r.kappa_hat, Some(0.0));
    assert_eq!(r.c_hat, Some(1.0));
}

#[test]
fn oscillating_function_does_not_converge() {
    let r = analyze(&karamata("sin_osc", TestSet::interval(1.0, 2.0).unwrap()), &quick(100_000)).unwrap();
    assert_eq!(r.status, Status::NonConvergent);
    assert!(r.kappa_hat.is_none());
    assert!(!r.diagnostics.is_empty());
}

#[test]
fn zero_limit_is_trivial() {
    let input = KendallInput { a_policy: AnPolicy::Given(vec![1.0; 10_000]), ..karamata("const(0)", TestSet::interval(1.0, 2.0).unwrap()) };
    let r = analyze(&input, &quick(10_000)).unwrap();
    assert_eq!(r.status, Status::Trivial);
    assert!(r.triviality_flag);
}

#[test]
fn beurling_kernel_for_identity_phi() {
    let input = beurling("shifted_pow(1, 2.5)", "identity", TestSet::interval(0.0, 3.0).unwrap());
    let r = analyze(&input, &AnalysisOptions { uct: None, ..AnalysisOptions::default() }).unwrap();
    assert_eq!(r.status, Status::Converged);
    let rho = r.phi.as_ref().unwrap().rho_hat;
    assert!((rho - 1.0).abs() < 1e-12);
    assert!((r.kappa_hat.unwrap() - 2.5).abs() < 1e-6);
    assert!(r.mult_residual.unwrap() < 1e-6);
    assert!(r.k_hat.last().unwrap().s > 2.99);
    for e in &r.k_hat {
        assert!((e.value / (1.0 + e.s).powf(2.5) - 1.0).abs() < 1e-6, "{e:?}");
    }
}

#[test]
fn self_neglecting_phi_uses_additive_group() {
    let input = beurling("pow_slowvar(0, one)", "const(1)", TestSet::interval(-1.0, 1.0).unwrap());
    let input = KendallInput { f: "decay(2, 1)".parse().unwrap(), ..input };
    let r = analyze(&input, &quick(100_000)).unwrap();
    assert_eq!(r.group, PopaParam::ZERO);
    assert_eq!(r.status, Status::Converged);
    assert!(r.kappa_hat.unwrap().abs() < 1e-9);
}

#[test]
fn general_log_kernel() {
    let input = KendallInput {
        f: "log".parse().unwrap(),
        seq: identity_seq(),
        test_set: TestSet::interval(0.0, 3.0).unwrap(),
        a_policy: AnPolicy::Reciprocal,
        mode: Mode::General { phi: "identity".parse().unwrap(), h: "const(1)".parse().unwrap() },
    };
    let r = analyze(&input, &quick(1_000_000)).unwrap();
    assert_eq!(r.status, Status::Converged);
    let g = r.general.as_ref().unwrap();
    assert_eq!(g.sigma_s, 0.0);
    assert_eq!(g.class, EquationClass::BgGeneral);
    assert!(g.monotone && g.bg_residual < 1e-6);
    assert!(g.r_hat.iter().all(|(_, v)| (v - 1.0).abs() < 1e-9));
    for e in &r.g_hat {
        assert!((e.value - e.lambda.ln_1p()).abs() < 1e-6);
    }
}

#[test]
fn karamata_and_beurling_agree() {
    let f = "pow_slowvar(1.7, log2)";
    let opts = quick(1_000_000);
    let k = analyze(&karamata(f, TestSet::interval(1.0, 2.0).unwrap()), &opts).unwrap();
    let b = analyze(&beurling(f, "identity", TestSet::interval(0.0, 1.0).unwrap()), &opts).unwrap();
    assert!((k.kappa_hat.unwrap() - b.kappa_hat.unwrap()).abs() < 1e-6);
}

#[test]
fn analysis_is_deterministic() {
    let input = karamata("pow_slowvar(1.7, log2)", TestSet::with_even_holes(1.0, 2.0, 0.1, 3).unwrap());
    let opts = AnalysisOptions { n: 100_000, ..AnalysisOptions::default() };
    let a = analyze(&input, &opts).unwrap();
    let b = analyze(&input, &opts).unwrap();
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
}

#[test]
fn lattice_hits_endpoints_and_skips_holes() {
    let b = TestSet::with_even_holes(1.0, 2.0, 0.2, 2).unwrap();
    let (pts, _) = lattice(PopaParam::INFINITY, &b, 101).unwrap();
    assert_eq!(pts[0], 1.0);
    assert_eq!(*pts.last().unwrap(), 2.0);
    assert!(pts.iter().all(|&x| b.contains(x)));
    assert!(pts.len() < 101);
}

#[test]
fn given_weights_recover_constant() {
    let n = 1_000_000;
    let a: Vec<f64> = (1..=n).map(|k| { let x = k as f64; 3.0 * x.powf(-1.7) / x.ln().max(1e-300).powi(2) }).collect();
    let input = KendallInput { a_policy: AnPolicy::Given(a), ..karamata("pow_slowvar(1.7, log2)", TestSet::interval(1.0, 2.0).unwrap()) };
    let opts = AnalysisOptions { ell: Some("pow_slowvar(0, log2)".parse().unwrap()), ..quick(n) };
    let r = analyze(&input, &opts).unwrap();
    assert!((r.c_hat.unwrap() - 3.0).abs() < 1e-9);
    assert!(r.corollary.unwrap().stabilizes);
}

