//! Acceptance criteria 1 to 13, one line each. Run with
//! `cargo test -p umbilic-core --test acceptance -- --nocapture`.

mod common;

use std::time::Instant;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use umbilic_core::chart::ChartBox;
use umbilic_core::chern_weil::*;
use umbilic_core::cobordism::*;
use umbilic_core::curvature::*;
use umbilic_core::hypersurface::*;
use umbilic_core::par::Execution;
use umbilic_core::quadrature::TruncationSchedule;
use umbilic_core::spectral::*;

const EXEC: Execution = Execution::Parallel;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

fn sff_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for (_, emb, g) in hypersurface_fixtures() {
        let pts = emb.params().halton_points(4).unwrap();
        for _ in 0..10 {
            let phi = random_phi(&mut rng, 3);
            let gbar = Rescaled { metric: &g, phi: &phi };
            for y in &pts {
                let s = second_fundamental_form(&emb, &g, y).unwrap();
                let law = conformal_sff_transform(&s, &phi).unwrap();
                let direct = second_fundamental_form(&emb, &gbar, y).unwrap();
                let scale = direct.h.iter().fold(1.0f64, |m, v| m.max(v.abs()));
                worst = worst.max(max_dev(&law.h, &direct.h) / scale);
            }
        }
    }
    outcome(worst <= 1e-6, format!("max relative residual {worst:.2e} (tolerance 1e-6)"))
}

fn multiplicities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let (mut compared, mut mismatched) = (0, 0);
    for (_, emb, g) in hypersurface_fixtures() {
        let pts = emb.params().halton_points(4).unwrap();
        for _ in 0..10 {
            let phi = random_phi(&mut rng, 3);
            let gbar = Rescaled { metric: &g, phi: &phi };
            for y in &pts {
                let a = second_fundamental_form(&emb, &g, y).unwrap();
                let b = second_fundamental_form(&emb, &gbar, y).unwrap();
                compared += 1;
                if multiplicity_pattern(&a.eigenvalues, 1e-5) != multiplicity_pattern(&b.eigenvalues, 1e-5) {
                    mismatched += 1;
                }
            }
        }
    }
    outcome(mismatched == 0, format!("{mismatched} of {compared} patterns changed (clustering 1e-5)"))
}

fn totally_geodesic() -> Outcome {
    let mut worst = 0.0f64;
    for (emb, g) in [sphere(1.0), horosphere()] {
        let phi = make_totally_geodesic(&emb, &g, CollarConfig::default(), 1e-8, EXEC).unwrap();
        let r = verify_totally_geodesic(&phi, 24, EXEC).unwrap();
        worst = worst.max(r.max_h_bar);
    }
    outcome(worst <= 1e-5, format!("max |h_bar| {worst:.2e} on sphere and horosphere (tolerance 1e-5)"))
}

fn collar_fit() -> Outcome {
    let mut worst = 0.0f64;
    for (emb, g) in [sphere(1.0), horosphere()] {
        let params = emb.params().halton_points(8).unwrap();
        let c = geodesic_collar(&emb, &g, &params, CollarConfig::default(), EXEC).unwrap();
        let sff: Vec<_> = params.iter().map(|y| second_fundamental_form(&emb, &g, y).unwrap()).collect();
        worst = worst.max(collar_expansion_check(&c, &sff).unwrap().max_residual);
    }
    outcome(worst <= 1e-4, format!("max |a'(0) + 2S| {worst:.2e} (tolerance 1e-4)"))
}

fn conformal_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let (mut weyl, mut p1) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let g = random_metric(&mut rng, 4, 0.08);
        let phi = random_phi(&mut rng, 4);
        let gbar = Rescaled { metric: &g, phi: &phi };
        for p in g.chart().halton_points(3).unwrap() {
            let a = curvature_package(&g, &p).unwrap().weyl.unwrap();
            let b = curvature_package(&gbar, &p).unwrap().weyl.unwrap();
            weyl = weyl.max(max_dev(&a, &b));
        }
        p1 = p1.max(pontryagin_conformal_check(&g, &phi, g.chart(), 3, 1e-6, EXEC).unwrap().deviation);
    }
    outcome(
        weyl <= 1e-7 && p1 <= 1e-6,
        format!("max |dW| {weyl:.2e} (tolerance 1e-7), max |dp1| {p1:.2e} (tolerance 1e-6), 20 pairs"),
    )
}

fn flatness_classifier() -> Outcome {
    let cfg = FlatnessConfig::default();
    let classify = |g: &ChartMetric| classify_conformally_flat(g, g.chart(), cfg, EXEC).unwrap();
    let flat = ChartMetric::euclidean(ChartBox::cube(4, -1.0, 1.0).unwrap()).unwrap();
    let mut ok = [poincare_ball(4), stereographic_sphere(4), poincare_ball(3), flat].iter().all(|g| classify(g).verdict.is_flat());
    let bumpy = ChartMetric::diagonal(ChartBox::cube(4, -0.5, 0.5).unwrap(), &["1", "1", "1", "1 + x1*x2"]).unwrap();
    let before = classify(&bumpy);
    ok &= matches!(before.verdict, FlatnessVerdict::NotFlat { .. });
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    for g in [bumpy, poincare_ball(4)] {
        let v = classify(&g).verdict.label();
        for _ in 0..3 {
            let phi = random_phi(&mut rng, 4);
            ok &= classify(&conformal_rescale(&g, &phi).unwrap()).verdict.label() == v;
        }
    }
    outcome(ok, format!("flat fixtures flat, perturbed metric not flat (max |W| {:.2e}), verdicts stable under rescaling", before.max_norm))
}

fn torus_collar(fx: &str) -> AnalyticCollar {
    let slice = torus_collar_slice(fx, 0.3);
    let refs: Vec<&str> = slice.iter().map(String::as_str).collect();
    AnalyticCollar::parse((0.0, 1.0), torus3(), &refs).unwrap()
}

fn transgression() -> Outcome {
    let mut identity = 0.0f64;
    for c in [torus_collar("x1"), torus_collar("x1^2")] {
        let r = transgression_check(c.metric(), c.product_metric(), c.metric().chart(), 8, 1e-4, EXEC).unwrap().0;
        identity = identity.max(r.max_residual);
    }
    let geodesic = torus_collar("x1^2");
    let q0 = boundary_transgression_integral(&geodesic, 0.0, 8, EXEC).unwrap().value.abs();
    let stokes = stokes_balance(&torus_collar("x1"), 12, 12, EXEC).unwrap().balance.abs();
    outcome(
        identity <= 1e-4 && q0 <= 1e-5 && stokes <= 1e-4,
        format!("identity {identity:.2e} (1e-4), |int Q at 0| {q0:.2e} (1e-5), Stokes {stokes:.2e} (1e-4)"),
    )
}

fn calibration() -> Outcome {
    let schedule = TruncationSchedule { initial_radius: 1.0, max_doublings: 10, tolerance: 1e-3 };
    let est = integrate_l_form_improper(&fubini_study(), 8, schedule, EXEC).unwrap();
    let dev = (est.value - 1.0).abs();
    outcome(dev <= 1e-2, format!("integral of L1 over CP2 = {:.6} (|dev| {dev:.2e}, tolerance 1e-2)", est.value))
}

fn eta_closed_forms() -> Outcome {
    let mut worst = 0.0f64;
    let mut agreement = 0.0f64;
    for a in [0.1, 0.25, 0.4] {
        let r = eta_invariant(&SpectrumModel::lattice(a, vec![1.0], vec![]).unwrap()).unwrap();
        worst = worst.max((r.value - (1.0 - 2.0 * a)).abs());
        agreement = agreement.max((r.diagnostics.hurwitz.unwrap() - r.diagnostics.euler_maclaurin.unwrap()).abs());
    }
    let symmetric = eta_invariant(&SpectrumModel::symmetric(100)).unwrap().value.abs();
    let quarter = SpectrumModel::lattice(0.25, vec![1.0], vec![]).unwrap();
    let heat = heat_trace_eta(&quarter, HeatConfig { lattice_radius: 10_000, ..HeatConfig::default() }, EXEC).unwrap();
    let heat_dev = (heat.value - 0.5).abs();
    outcome(
        worst <= 1e-8 && symmetric == 0.0 && agreement <= 1e-8 && heat_dev <= 1e-4,
        format!("|eta - (1-2a)| {worst:.2e}, symmetric {symmetric:.1e}, Hurwitz vs E-M {agreement:.2e}, heat {heat_dev:.2e}"),
    )
}

fn eta_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(110);
    let spectra: Vec<SpectrumModel> = (0..12)
        .map(|i| {
            if i % 2 == 0 {
                let a = rng.gen_range(0.02..0.98);
                let c = vec![rng.gen_range(0.5..2.0), 0.0, rng.gen_range(0.0..1.0)];
                SpectrumModel::lattice(a, c, vec![rng.gen_range(-3..3)]).unwrap()
            } else {
                let ev = (0..6).map(|_| (rng.gen_range(0.1..10.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 }, rng.gen_range(1..4))).collect();
                SpectrumModel::explicit(ev).unwrap()
            }
        })
        .collect();
    let mut violations = 0;
    for (i, sp) in spectra.iter().enumerate() {
        let r = eta_invariant(sp).unwrap();
        let neg = eta_invariant(&sp.negated()).unwrap();
        violations += usize::from((r.value + neg.value).abs() > r.error + neg.error);
        let other = &spectra[(i + 1) % spectra.len()];
        let o = eta_invariant(other).unwrap();
        let sum = eta_invariant(&sp.concat(other)).unwrap();
        violations += usize::from((sum.value - r.value - o.value).abs() > sum.error + r.error + o.error + 1e-12);
        for c in [0.5, 2.0, 10.0] {
            let s = eta_invariant(&sp.scaled(c)).unwrap();
            violations += usize::from((s.value - r.value).abs() > s.error + r.error + 1e-12);
        }
    }
    outcome(violations == 0, format!("{violations} violations over {} spectra", spectra.len()))
}

fn aps_identity() -> Outcome {
    let m = lattice_record("M", 0.25);
    let product = ChartBox::new(vec![(0.0, 1.0), (0.0, 6.283185307179586), (0.0, 6.283185307179586), (0.0, 6.283185307179586)]).unwrap();
    let flat = ChartMetric::euclidean(product.clone()).unwrap();
    let warped = warped_cylinder();
    let mut worst = 0.0f64;
    let mut separate = true;
    for (name, g) in [("product", &flat), ("warped", &warped)] {
        let l = integrate_l_form(g, g.chart(), 1, 4, EXEC).unwrap();
        let c = cobordism(name, &[(&m, 1), (&m, -1)], 0, (l.value, l.error));
        let r = aps_identity_check(&c).unwrap();
        worst = worst.max(r.residual);
        separate &= r.signature == 0 && r.l_integral.abs() <= 1e-12 && r.boundary_eta.abs() <= 1e-12 && r.status == ApsStatus::Pass;
    }
    outcome(worst <= 1e-12 && separate, format!("max residual {worst:.2e}; signature, integral and eta terms vanish separately"))
}

fn obstruction_and_phi() -> Outcome {
    let half = ManifoldRecord::new("half", 3, 0.5, 1e-12).unwrap();
    let even = ManifoldRecord::new("even", 3, -4.0, 1e-12).unwrap();
    let mut ok = obstruction_test(&half, 1e-6).unwrap().obstructed && !obstruction_test(&even, 1e-6).unwrap().obstructed;
    let mut rng = ChaCha8Rng::seed_from_u64(112);
    let (mut hom, mut conj, mut unit) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let a = ManifoldRecord::new("a", 3, rng.gen_range(-6.0..6.0), 0.0).unwrap();
        let b = ManifoldRecord::new("b", 3, rng.gen_range(-6.0..6.0), 0.0).unwrap();
        let (pa, pb) = (phi(&a).unwrap(), phi(&b).unwrap());
        let pu = phi(&disjoint_union(&a, &b).unwrap()).unwrap();
        hom = hom.max((pu.value() - pa.value() * pb.value()).norm());
        conj = conj.max((phi(&reverse_orientation(&a)).unwrap().value() - pa.value().conj()).norm());
        unit = unit.max((pa.value().norm() - 1.0).abs());
    }
    ok &= hom <= 1e-12 && conj <= 1e-12 && unit <= 1e-12;
    outcome(ok, format!("homomorphism {hom:.1e}, conjugation {conj:.1e}, |Phi| - 1 {unit:.1e} over 100 pairs"))
}

#[test]
fn acceptance_criteria() {
    let criteria: [(u8, &str, f64, fn() -> Outcome); 12] = [
        (1, "conformal law for the second fundamental form", 10.0, sff_law),
        (2, "shape operator multiplicities", 5.0, multiplicities),
        (3, "make-geodesic on sphere and horosphere", 30.0, totally_geodesic),
        (4, "collar expansion", 20.0, collar_fit),
        (5, "Weyl and p1 conformal invariance", 60.0, conformal_invariance),
        (6, "conformal flatness classifier", 30.0, flatness_classifier),
        (7, "transgression", 60.0, transgression),
        (8, "CP2 calibration", 120.0, calibration),
        (9, "eta closed forms", 10.0, eta_closed_forms),
        (10, "eta properties", 10.0, eta_properties),
        (11, "APS identity on product and warped cylinders", 5.0, aps_identity),
        (12, "obstruction and Phi", 5.0, obstruction_and_phi),
    ];
    let mut failed = Vec::new();
    for (n, name, budget, run) in criteria {
        let start = Instant::now();
        let o = run();
        let secs = start.elapsed().as_secs_f64();
        let pass = o.pass && secs < budget;
        println!("criterion {n:2} {}: {name}: {} [{secs:.1} s of {budget} s]", if pass { "PASS" } else { "FAIL" }, o.detail);
        if !pass {
            failed.push(n);
        }
    }
    println!(
        "criterion 13 NOT REPRODUCIBLE (documented): eta of closed hyperbolic 3-manifolds, density of the image of Phi, gluing law under connected sum"
    );
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
