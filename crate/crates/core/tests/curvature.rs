mod common;

use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use umbilic_core::chart::ChartBox;
use umbilic_core::curvature::*;
use umbilic_core::expr::Expression;
use umbilic_core::par::Execution;

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

#[test]
fn round_sphere_has_scalar_curvature_two() {
    let g = round_sphere_2d();
    for p in g.chart().halton_points(30).unwrap() {
        let k = curvature_package(&g, &p).unwrap();
        assert!((k.scalar - 2.0).abs() < 1e-10, "{p:?}: {}", k.scalar);
    }
}

#[test]
fn poincare_ball_scalar_curvature() {
    for (n, expected) in [(3, -6.0), (4, -12.0)] {
        let g = poincare_ball(n);
        for p in g.chart().halton_points(20).unwrap() {
            let k = curvature_package(&g, &p).unwrap();
            assert!((k.scalar - expected).abs() < 1e-9, "n={n} {p:?}: {}", k.scalar);
        }
    }
}

#[test]
fn euclidean_curvature_vanishes() {
    let g = ChartMetric::euclidean(ChartBox::cube(4, -1.0, 1.0).unwrap()).unwrap();
    let k = curvature_package(&g, &[0.1, 0.2, 0.3, 0.4]).unwrap();
    assert_eq!(max_abs(&k.riemann), 0.0);
    assert_eq!(max_abs(k.weyl.as_ref().unwrap()), 0.0);
}

#[test]
fn riemann_symmetries_and_bianchi() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [3, 4] {
        for _ in 0..4 {
            let g = random_metric(&mut rng, n, 0.1);
            let p: Vec<f64> = g.chart().halton_points(3).unwrap().pop().unwrap();
            let k = curvature_package(&g, &p).unwrap();
            let scale = 1.0 + max_abs(&k.riemann);
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        for d in 0..n {
                            let r = k.riemann(a, b, c, d);
                            assert!((r + k.riemann(b, a, c, d)).abs() < 1e-8 * scale);
                            assert!((r + k.riemann(a, b, d, c)).abs() < 1e-8 * scale);
                            assert!((r - k.riemann(c, d, a, b)).abs() < 1e-8 * scale);
                            let bianchi = r + k.riemann(a, c, d, b) + k.riemann(a, d, b, c);
                            assert!(bianchi.abs() < 1e-8 * scale);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn weyl_is_traceless() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..4 {
        let g = random_metric(&mut rng, 4, 0.1);
        let k = curvature_package(&g, &[0.1, -0.2, 0.25, 0.3]).unwrap();
        let n = 4;
        for b in 0..n {
            for d in 0..n {
                // W^a_{bad}
                let t: f64 = (0..n).map(|a| k.weyl_up(a, b, a, d).unwrap()).sum();
                assert!(t.abs() < 1e-8, "{t}");
            }
        }
    }
}

#[test]
fn metric_compatibility() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let g = random_metric(&mut rng, 3, 0.1);
    let p = [0.2, -0.1, 0.3];
    let geo = LocalGeometry::new(&g, &p, 1).unwrap();
    let n = 3;
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let dg = geo.g[i * n + j].d(k).value();
                let mut rhs = 0.0;
                for l in 0..n {
                    rhs += geo.gamma(l, k, i).value() * geo.g[l * n + j].value();
                    rhs += geo.gamma(l, k, j).value() * geo.g[i * n + l].value();
                }
                assert!((dg - rhs).abs() < 1e-12);
            }
        }
    }
}

/// Riemann from central differences of the Christoffel symbols, an
/// independent route to the second-derivative terms.
fn riemann_by_differences(g: &ChartMetric, p: &[f64]) -> Vec<f64> {
    let n = p.len();
    let h = 1e-5;
    let gam = christoffel(g, p).unwrap();
    let dgam: Vec<Vec<f64>> = (0..n)
        .map(|c| {
            let mut a = p.to_vec();
            let mut b = p.to_vec();
            a[c] += h;
            b[c] -= h;
            let (ga, gb) = (christoffel(g, &a).unwrap(), christoffel(g, &b).unwrap());
            ga.iter().zip(&gb).map(|(x, y)| (x - y) / (2.0 * h)).collect()
        })
        .collect();
    let gm = |k: usize, i: usize, j: usize| gam[(k * n + i) * n + j];
    let mut up = vec![0.0; n.pow(4)];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut v = dgam[c][(a * n + d) * n + b] - dgam[d][(a * n + c) * n + b];
                    for e in 0..n {
                        v += gm(a, c, e) * gm(e, d, b) - gm(a, d, e) * gm(e, c, b);
                    }
                    up[((a * n + b) * n + c) * n + d] = v;
                }
            }
        }
    }
    let gv = g.metric_values(p).unwrap();
    let mut down = vec![0.0; n.pow(4)];
    let rest = n.pow(3);
    for a in 0..n {
        for r in 0..rest {
            down[a * rest + r] = (0..n).map(|e| gv[a * n + e] * up[e * rest + r]).sum();
        }
    }
    down
}

#[test]
fn perturbed_metric_weyl_matches_difference_oracle() {
    let g = ChartMetric::diagonal(ChartBox::cube(4, -0.5, 0.5).unwrap(), &["1", "1", "1", "1 + x1*x2"]).unwrap();
    let p = [0.3, -0.2, 0.1, 0.4];
    let k = curvature_package(&g, &p).unwrap();
    let oracle = riemann_by_differences(&g, &p);
    for (a, b) in k.riemann.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-7, "{a} vs {b}");
    }
    assert!(k.weyl_norm().unwrap() > 1e-2);
}

#[test]
fn weyl_is_conformally_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..10 {
        let g = random_metric(&mut rng, 4, 0.1);
        let phi = random_phi(&mut rng, 4);
        let gbar = conformal_rescale(&g, &phi).unwrap();
        let p = [0.15, -0.3, 0.2, 0.35];
        let a = curvature_package(&g, &p).unwrap();
        let b = curvature_package(&gbar, &p).unwrap();
        let wa = a.weyl.unwrap();
        let wb = b.weyl.unwrap();
        let dev = wa.iter().zip(&wb).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(dev < 1e-7, "{dev}");
    }
}

#[test]
fn cotton_is_conformally_invariant_in_dimension_three() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..10 {
        let g = random_metric(&mut rng, 3, 0.1);
        let phi = random_phi(&mut rng, 3);
        let gbar = conformal_rescale(&g, &phi).unwrap();
        let p = [0.15, -0.3, 0.2];
        let a = curvature_package(&g, &p).unwrap().cotton.unwrap();
        let b = curvature_package(&gbar, &p).unwrap().cotton.unwrap();
        let dev = a.iter().zip(&b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(dev < 1e-7, "{dev}");
    }
}

#[test]
fn pulled_back_flat_metric_is_flat() {
    // y = (x1 + 0.1 x2^2, x2 + 0.2 x1 x3, x3 - 0.1 x1^2), g = J^T J
    let chart = ChartBox::cube(3, -0.5, 0.5).unwrap();
    let jac = [
        ["1", "0.2*x2", "0"],
        ["0.2*x3", "1", "0.2*x1"],
        ["(-0.2)*x1", "0", "1"],
    ];
    let j: Vec<Vec<Expression>> =
        jac.iter().map(|r| r.iter().map(|s| Expression::parse(s, 3).unwrap()).collect()).collect();
    let rows: Vec<Vec<Expression>> = (0..3)
        .map(|a| {
            (0..3)
                .map(|b| {
                    (0..3).fold(Expression::constant(3, 0.0), |acc, k| acc + &j[k][a] * &j[k][b])
                })
                .collect()
        })
        .collect();
    let g = ChartMetric::new(chart.clone(), rows, 1).unwrap();
    for p in chart.halton_points(10).unwrap() {
        let k = curvature_package(&g, &p).unwrap();
        assert!(max_abs(&k.riemann) < 1e-7);
    }
}

#[test]
fn classifier_verdicts() {
    let cfg = FlatnessConfig::default();
    for g in [poincare_ball(3), poincare_ball(4), stereographic_sphere(3), stereographic_sphere(4)] {
        let r = classify_conformally_flat(&g, g.chart(), cfg, Execution::Parallel).unwrap();
        assert!(r.verdict.is_flat(), "{r:?}");
    }
    let flat = ChartMetric::euclidean(ChartBox::cube(4, -1.0, 1.0).unwrap()).unwrap();
    assert!(classify_conformally_flat(&flat, flat.chart(), cfg, Execution::Sequential).unwrap().verdict.is_flat());

    let bumpy = ChartMetric::diagonal(ChartBox::cube(4, -0.5, 0.5).unwrap(), &["1", "1", "1", "1 + x1*x2"]).unwrap();
    let r = classify_conformally_flat(&bumpy, bumpy.chart(), cfg, Execution::Parallel).unwrap();
    match &r.verdict {
        FlatnessVerdict::NotFlat { witness, norm } => {
            assert_eq!(witness.len(), 4);
            assert!(*norm > 1e-3);
        }
        v => panic!("expected not flat, got {v:?}"),
    }
    let phi = ConformalFactor::parse("0.3*sin(x1)*cos(x4)", 4).unwrap();
    let rescaled = conformal_rescale(&bumpy, &phi).unwrap();
    let r2 = classify_conformally_flat(&rescaled, rescaled.chart(), cfg, Execution::Parallel).unwrap();
    assert_eq!(r.verdict.label(), r2.verdict.label());

    let surface = round_sphere_2d();
    let r = classify_conformally_flat(&surface, surface.chart(), cfg, Execution::Parallel).unwrap();
    assert_eq!(r.criterion, FlatnessCriterion::Trivial);
}

#[test]
fn sequential_and_parallel_classifiers_agree() {
    let g = stereographic_sphere(4);
    let cfg = FlatnessConfig { samples: 40, tolerance: 1e-6 };
    let a = classify_conformally_flat(&g, g.chart(), cfg, Execution::Sequential).unwrap();
    let b = classify_conformally_flat(&g, g.chart(), cfg, Execution::Parallel).unwrap();
    assert_eq!(a, b);
}
