use std::f64::consts::PI;

use proptest::prelude::*;
use umbilic_core::par::Execution;
use umbilic_core::spectral::*;

fn quarter() -> SpectrumModel {
    SpectrumModel::lattice(0.25, vec![1.0], vec![]).unwrap()
}

#[test]
fn symmetric_spectrum_has_vanishing_eta() {
    let sp = SpectrumModel::symmetric(50);
    assert!(sp.is_symmetric());
    for s in [0.5, 1.0, 2.0, 3.7] {
        assert_eq!(eta_series(&sp, s, 100, Execution::default()).unwrap().value, 0.0);
    }
    assert_eq!(eta_invariant(&sp).unwrap().value, 0.0);
    let heat = heat_trace_eta(&sp, HeatConfig::default(), Execution::default()).unwrap();
    assert!(heat.value.abs() < 1e-12, "{}", heat.value);
}

#[test]
fn quarter_lattice_at_three() {
    // Σ_k (4k+1)^{-3} − (4k+3)^{-3} = π³/32, so the lattice sum is 64 π³/32
    let oracle = 2.0 * PI.powi(3);
    // direct pairwise summation as a second oracle
    let direct: f64 = (0..2_000_000).rev().map(|j| (j as f64 + 0.25).powi(-3) - (j as f64 + 0.75).powi(-3)).sum();
    assert!((direct - oracle).abs() < 1e-12);
    let r = eta_series(&quarter(), 3.0, DEFAULT_LATTICE_RADIUS, Execution::default()).unwrap();
    assert!((r.value - oracle).abs() < 1e-10, "{} vs {oracle}", r.value);
    assert!(r.error < 1e-10);
}

#[test]
fn single_eigenvalue() {
    let sp = SpectrumModel::explicit(vec![(2.0, 1)]).unwrap();
    let r = eta_series(&sp, 1.0, 0, Execution::Sequential).unwrap();
    assert_eq!(r.value, 0.5);
    assert_eq!(eta_invariant(&sp).unwrap().value, 1.0);
}

#[test]
fn series_rejects_divergent_exponent() {
    let sp = SpectrumModel::lattice(0.25, vec![1.0, 0.0, 1.0], vec![]).unwrap();
    assert!(eta_series(&sp, 2.5, 100, Execution::Sequential).is_err());
    assert!(eta_series(&sp, 3.5, 100, Execution::Sequential).is_ok());
}

#[test]
fn lattice_eta_invariants() {
    let r = eta_invariant(&quarter()).unwrap();
    assert!((r.value - 0.5).abs() < 1e-12);
    assert_eq!(r.method, EtaMethod::HurwitzClosedForm);
    let (h, em) = (r.diagnostics.hurwitz.unwrap(), r.diagnostics.euler_maclaurin.unwrap());
    assert!(r.error >= (h - em).abs());
    let half = SpectrumModel::lattice(0.5, vec![1.0], vec![]).unwrap();
    assert!(eta_invariant(&half).unwrap().value.abs() < 1e-12);
    // η = 1 − 2a in general
    for a in [0.1, 0.3, 0.8] {
        let sp = SpectrumModel::lattice(a, vec![1.0], vec![]).unwrap();
        assert!((eta_invariant(&sp).unwrap().value - (1.0 - 2.0 * a)).abs() < 1e-12);
    }
}

#[test]
fn excluded_modes_are_removed() {
    // dropping λ = 1.25 from the a = 1/4 lattice lowers η by one
    let sp = SpectrumModel::lattice(0.25, vec![1.0], vec![1]).unwrap();
    assert!((eta_invariant(&sp).unwrap().value + 0.5).abs() < 1e-12);
    let zero = SpectrumModel::lattice(0.0, vec![1.0], vec![0]).unwrap();
    assert!(eta_invariant(&zero).unwrap().value.abs() < 1e-12);
    assert!(SpectrumModel::lattice(0.0, vec![1.0], vec![]).is_err());
}

#[test]
fn heat_trace_matches_closed_form() {
    let r = heat_trace_eta(&quarter(), HeatConfig::default(), Execution::default()).unwrap();
    assert!((r.value - 0.5).abs() < 1e-4, "{} ± {}", r.value, r.error);
    assert!(r.error < 1e-4, "{r:?}");
    assert_eq!(r.literal_normalization_factor, 2.0);
}

#[test]
fn heat_trace_of_one_eigenvalue() {
    let sp = SpectrumModel::explicit(vec![(1.0, 1)]).unwrap();
    let r = heat_trace_eta(&sp, HeatConfig::default(), Execution::Sequential).unwrap();
    assert!((r.value - 1.0).abs() < 1e-6, "{}", r.value);
    // the Gamma integral gives η(s) = 1 for every s
    for v in &r.eta_at_s {
        assert!((v - 1.0).abs() < 1e-8, "{v}");
    }
}

#[test]
fn heat_trace_with_polynomial_multiplicity() {
    let sp = SpectrumModel::lattice(0.3, vec![1.0, 0.0, 2.0], vec![2]).unwrap().scaled(-3.0);
    let exact = eta_invariant(&sp).unwrap();
    let heat = heat_trace_eta(&sp, HeatConfig::default(), Execution::default()).unwrap();
    assert!((heat.value - exact.value).abs() <= heat.error + exact.error + 1e-6, "{} vs {}", heat.value, exact.value);
}

#[test]
fn heat_trace_detects_short_truncation() {
    let config = HeatConfig { lattice_radius: 10, ..HeatConfig::default() };
    assert!(heat_trace_eta(&quarter(), config, Execution::Sequential).is_err());
}

#[test]
fn reduction_modulo_two() {
    let r = reduce_mod_2(2.0);
    assert_eq!((r.representative, r.integer_part), (0.0, 2));
    assert_eq!(reduce_mod_2(0.5).representative, 0.5);
    let r = reduce_mod_2(-3.5);
    assert_eq!((r.representative, r.integer_part), (0.5, -4));
    assert_eq!(reduce_mod_2(1.0).representative, 1.0);
    assert_eq!(reduce_mod_2(-1.0).representative, 1.0);
    let noisy = EtaResult { error: 0.7, ..eta_invariant(&quarter()).unwrap() };
    assert!(eta_mod_2z(&noisy).is_err());
}

#[test]
fn spectrum_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let sp = SpectrumModel::explicit(vec![(-1.5, 2), (1.0, 1), (3.0, 4)]).unwrap();
    let csv_path = dir.path().join("spec.csv");
    sp.write_csv(&csv_path).unwrap();
    assert_eq!(SpectrumModel::read(&csv_path).unwrap(), sp);
    let json_path = dir.path().join("lattice.json");
    std::fs::write(&json_path, r#"{"type":"lattice","a":0.25,"multiplicity_coeffs":[1],"excluded":[]}"#).unwrap();
    assert_eq!(SpectrumModel::read(&json_path).unwrap(), quarter());
    std::fs::write(&json_path, r#"{"type":"lattice","a":0.0}"#).unwrap();
    assert!(SpectrumModel::read(&json_path).is_err());
}

fn explicit_spectrum() -> impl Strategy<Value = SpectrumModel> {
    prop::collection::vec((-20.0f64..20.0, 1u64..4), 1..12).prop_filter_map("nonzero", |ev| {
        let ev: Vec<(f64, u64)> = ev.into_iter().filter(|e| e.0.abs() > 1e-3).collect();
        (!ev.is_empty()).then(|| SpectrumModel::explicit(ev).unwrap())
    })
}

fn lattice_spectrum() -> impl Strategy<Value = SpectrumModel> {
    (0.01f64..0.99, 0.0f64..3.0, 0.0f64..2.0, prop::collection::vec(-5i64..5, 0..3), prop::bool::ANY).prop_map(|(a, c0, c2, ex, neg)| {
        let sp = SpectrumModel::lattice(a, vec![c0 + 0.1, 0.0, c2], ex).unwrap();
        if neg {
            sp.negated()
        } else {
            sp
        }
    })
}

fn any_spectrum() -> impl Strategy<Value = SpectrumModel> {
    prop_oneof![explicit_spectrum(), lattice_spectrum()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn negation_flips_eta(sp in any_spectrum()) {
        let r = eta_invariant(&sp).unwrap();
        prop_assert_eq!(eta_invariant(&sp.negated()).unwrap().value, -r.value);
        let s = sp.growth_order().max(0.0) + 1.5;
        let a = eta_series(&sp, s, 2000, Execution::Sequential).unwrap();
        let b = eta_series(&sp.negated(), s, 2000, Execution::Sequential).unwrap();
        prop_assert_eq!(a.value, -b.value);
    }

    #[test]
    fn concatenation_adds(x in any_spectrum(), y in any_spectrum()) {
        let (a, b) = (eta_invariant(&x).unwrap(), eta_invariant(&y).unwrap());
        let c = eta_invariant(&x.concat(&y)).unwrap();
        prop_assert!((c.value - a.value - b.value).abs() <= a.error + b.error + c.error + 1e-12);
    }

    #[test]
    fn positive_scaling_keeps_eta(sp in any_spectrum(), k in 0usize..3) {
        let c = [0.5, 2.0, 10.0][k];
        let (a, b) = (eta_invariant(&sp).unwrap(), eta_invariant(&sp.scaled(c)).unwrap());
        prop_assert!((a.value - b.value).abs() <= a.error + b.error + 1e-12);
    }

    #[test]
    fn continuations_agree(sp in lattice_spectrum()) {
        let r = eta_invariant(&sp).unwrap();
        let d = r.diagnostics;
        prop_assert!((d.hurwitz.unwrap() - d.euler_maclaurin.unwrap()).abs() <= 1e-8);
    }

    #[test]
    fn doubling_the_radius_shrinks_the_tail(a in 0.01f64..0.99, s in 1.2f64..4.0) {
        let sp = SpectrumModel::lattice(a, vec![1.0], vec![]).unwrap();
        let mut last = f64::INFINITY;
        for radius in [64u64, 128, 256, 512] {
            let r = eta_series(&sp, s, radius, Execution::Sequential).unwrap();
            prop_assert!(r.diagnostics.tail_bound < last);
            last = r.diagnostics.tail_bound;
        }
    }
}
