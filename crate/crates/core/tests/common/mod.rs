#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use umbilic_core::chart::ChartBox;
use umbilic_core::cobordism::{BoundaryEntry, CobordismRecord, ManifoldRecord, Provenanced};
use umbilic_core::curvature::{ChartMetric, ConformalFactor};
use umbilic_core::spectral::{eta_invariant, SpectrumModel};

pub fn coeff(rng: &mut ChaCha8Rng, scale: f64) -> String {
    format!("({:.6})", rng.gen_range(-scale..scale))
}

/// `δ + ε q` with `q` symmetric and built from monomials of degree ≤ 4;
/// positive-definite on `[-0.5, 0.5]^n` for `scale ≤ 0.1`.
pub fn random_metric(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> ChartMetric {
    let chart = ChartBox::cube(n, -0.5, 0.5).unwrap();
    let mut rows = vec![vec![String::new(); n]; n];
    for i in 0..n {
        for j in i..n {
            let mut terms = Vec::new();
            if i == j {
                terms.push("1".to_string());
            }
            for _ in 0..2 {
                let deg = rng.gen_range(1..=4);
                let mono: Vec<String> = (0..deg).map(|_| format!("x{}", rng.gen_range(1..=n))).collect();
                terms.push(format!("{}*{}", coeff(rng, scale), mono.join("*")));
            }
            rows[i][j] = terms.join(" + ");
            rows[j][i] = rows[i][j].clone();
        }
    }
    ChartMetric::from_strings(chart, &rows, 1).unwrap()
}

/// A smooth bounded conformal factor mixing trigonometric and polynomial terms.
pub fn random_phi(rng: &mut ChaCha8Rng, n: usize) -> ConformalFactor {
    let a = rng.gen_range(1..=n);
    let b = rng.gen_range(1..=n);
    let c = rng.gen_range(1..=n);
    let text = format!(
        "{}*sin({}*x{a} + {}*x{b}) + {}*x{c}^2 + {}*x{a}*x{b}",
        coeff(rng, 0.4),
        coeff(rng, 2.0),
        coeff(rng, 2.0),
        coeff(rng, 0.3),
        coeff(rng, 0.3)
    );
    ConformalFactor::parse(&text, n).unwrap()
}

pub fn poincare_ball(n: usize) -> ChartMetric {
    let r2: Vec<String> = (1..=n).map(|i| format!("x{i}^2")).collect();
    let chart = ChartBox::cube(n, -0.6, 0.6).unwrap();
    ChartMetric::conformally_euclidean(chart, &format!("4/(1-({}))^2", r2.join("+"))).unwrap()
}

pub fn stereographic_sphere(n: usize) -> ChartMetric {
    let r2: Vec<String> = (1..=n).map(|i| format!("x{i}^2")).collect();
    let chart = ChartBox::cube(n, -2.0, 2.0).unwrap();
    ChartMetric::conformally_euclidean(chart, &format!("4/(1+({}))^2", r2.join("+"))).unwrap()
}

pub fn round_sphere_2d() -> ChartMetric {
    let chart = ChartBox::new(vec![(0.2, 2.9), (0.0, 6.2)]).unwrap();
    ChartMetric::diagonal(chart, &["1", "sin(x1)^2"]).unwrap()
}

use umbilic_core::hypersurface::HypersurfaceEmbedding;

pub fn euclidean3() -> ChartMetric {
    ChartMetric::euclidean(ChartBox::cube(3, -3.0, 3.0).unwrap()).unwrap()
}

pub fn upper_half_space() -> ChartMetric {
    let chart = ChartBox::new(vec![(-2.0, 2.0), (-2.0, 2.0), (0.2, 3.0)]).unwrap();
    ChartMetric::conformally_euclidean(chart, "1/x3^2").unwrap()
}

pub fn plane() -> (HypersurfaceEmbedding, ChartMetric) {
    let params = ChartBox::cube(2, -1.0, 1.0).unwrap();
    (HypersurfaceEmbedding::from_strings(params, &["x1", "x2", "0"], 1).unwrap(), euclidean3())
}

/// Sphere of radius `r` with the inward normal.
pub fn sphere(r: f64) -> (HypersurfaceEmbedding, ChartMetric) {
    let params = ChartBox::new(vec![(0.4, 2.7), (0.0, 6.0)]).unwrap();
    let map = [format!("{r}*sin(x1)*cos(x2)"), format!("{r}*sin(x1)*sin(x2)"), format!("{r}*cos(x1)")];
    let map: Vec<&str> = map.iter().map(String::as_str).collect();
    (HypersurfaceEmbedding::from_strings(params, &map, -1).unwrap(), euclidean3())
}

/// Unit cylinder with the outward normal.
pub fn cylinder() -> (HypersurfaceEmbedding, ChartMetric) {
    let params = ChartBox::new(vec![(0.0, 6.0), (-1.0, 1.0)]).unwrap();
    (HypersurfaceEmbedding::from_strings(params, &["cos(x1)", "sin(x1)", "x2"], 1).unwrap(), euclidean3())
}

/// Horosphere `x3 = 1` in the upper half-space, upward normal.
pub fn horosphere() -> (HypersurfaceEmbedding, ChartMetric) {
    let params = ChartBox::cube(2, -1.0, 1.0).unwrap();
    (HypersurfaceEmbedding::from_strings(params, &["x1", "x2", "1"], 1).unwrap(), upper_half_space())
}

pub fn hypersurface_fixtures() -> Vec<(&'static str, HypersurfaceEmbedding, ChartMetric)> {
    let (a, b) = plane();
    let (c, d) = sphere(1.0);
    let (e, f) = sphere(2.0);
    let (g, h) = cylinder();
    let (i, j) = horosphere();
    vec![("plane", a, b), ("sphere R=1", c, d), ("sphere R=2", e, f), ("cylinder", g, h), ("horosphere", i, j)]
}

/// Fubini–Study metric on the affine chart `C² ≅ R⁴` of ℂP², `z = (x1 + i x2, x3 + i x4)`.
pub fn fubini_study() -> ChartMetric {
    let chart = ChartBox::cube(4, f64::NEG_INFINITY, f64::INFINITY).unwrap();
    let u = ["x1", "x2", "x3", "x4"];
    let v = ["(-x2)", "x1", "(-x4)", "x3"];
    let rho = "(1+x1^2+x2^2+x3^2+x4^2)";
    let mut rows = vec![vec![String::new(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let diag = if i == j { rho } else { "0" };
            rows[i][j] = format!("({diag} - ({}*{} + {}*{}))/{rho}^2", u[i], u[j], v[i], v[j]);
        }
    }
    ChartMetric::from_strings(chart, &rows, 1).unwrap()
}

/// Slice metric `δ + c·f(x)·B(y)` on the flat 3-torus `[0, 2π]³`, with `B`
/// periodic and twisted so that the boundary transgression does not vanish.
pub fn torus_collar_slice(fx: &str, c: f64) -> Vec<String> {
    let b = [
        ["sin(x3)", "cos(x4)", "0.5*sin(x3+x4)"],
        ["cos(x4)", "cos(x2)", "sin(x2)"],
        ["0.5*sin(x3+x4)", "sin(x2)", "sin(x3)*cos(x2)"],
    ];
    let mut out = Vec::with_capacity(9);
    for i in 0..3 {
        for j in 0..3 {
            let delta = if i == j { "1 + " } else { "" };
            out.push(format!("{delta}{c}*({fx})*({})", b[i][j]));
        }
    }
    out
}

pub fn torus3() -> ChartBox {
    ChartBox::cube(3, 0.0, 2.0 * std::f64::consts::PI).unwrap()
}

/// Round `S³` in hyperspherical coordinates `(ψ, θ, φ)`, written in the
/// collar variables `x2, x3, x4`, scaled by `f(x1)`.
pub fn s3_slice(fx: &str) -> Vec<String> {
    vec![
        format!("({fx})"),
        "0".into(),
        "0".into(),
        "0".into(),
        format!("({fx})*sin(x2)^2"),
        "0".into(),
        "0".into(),
        "0".into(),
        format!("({fx})*sin(x2)^2*sin(x3)^2"),
    ]
}

pub fn s3_chart() -> ChartBox {
    ChartBox::new(vec![(0.0, std::f64::consts::PI), (0.0, std::f64::consts::PI), (0.0, 2.0 * std::f64::consts::PI)])
        .unwrap()
}

/// `e^{2a(t)φ}(dt² + flat T³)` on `[0,1] × T³` with `a(t) = t²(3 − 2t)`.
pub fn warped_cylinder() -> ChartMetric {
    let chart = ChartBox::new(vec![(0.0, 1.0), (0.0, 2.0 * PI), (0.0, 2.0 * PI), (0.0, 2.0 * PI)]).unwrap();
    let factor = "exp(2*x1^2*(3-2*x1)*(0.3*sin(x2)*cos(x3) + 0.2*sin(x4)))";
    ChartMetric::conformally_euclidean(chart, factor).unwrap()
}

pub fn lattice_record(name: &str, a: f64) -> ManifoldRecord {
    let eta = eta_invariant(&SpectrumModel::lattice(a, vec![1.0], vec![]).unwrap()).unwrap();
    ManifoldRecord::from_eta(name, 3, &eta, format!("lattice a = {a}")).unwrap()
}

pub fn cobordism(name: &str, boundary: &[(&ManifoldRecord, i8)], signature: i64, l: (f64, f64)) -> CobordismRecord {
    CobordismRecord {
        name: name.into(),
        dim: 4,
        boundary: boundary
            .iter()
            .map(|(m, s)| BoundaryEntry { reference: m.name.clone(), sign: *s, record: Some((*m).clone()) })
            .collect(),
        signature: Provenanced { value: signature, err: 0.0, provenance: "supplied".into() },
        l_integral: Provenanced { value: l.0, err: l.1, provenance: "computed".into() },
        umbilic: vec![true; boundary.len()],
    }
}
