use serde::{Deserialize, Serialize};

use super::cartan::{connection_and_curvature, trace_wedge, CurvatureForms};
use super::forms::{Form, FormField, JetForm};
use crate::chart::ChartBox;
use crate::curvature::{curvature_package, LocalGeometry, MetricField, Rescaled, ScalarField};
use crate::error::{Error, Result};
use crate::expr::Jet;
use crate::par::Execution;
use crate::quadrature::{integrate, integrate_improper, Estimate, ImproperEstimate, TruncationSchedule};

const EIGHT_PI2: f64 = 8.0 * std::f64::consts::PI * std::f64::consts::PI;

fn check_dim(n: usize) -> Result<()> {
    if !(4..=5).contains(&n) {
        return Err(Error::invalid(format!("Pontryagin forms are implemented for dimensions 4 and 5, got {n}")));
    }
    Ok(())
}

/// `p₁ = -(1/8π²) tr(Ω∧Ω)`. The sign makes `∫ p₁ = 3` on ℂP².
pub fn pontryagin_form(omega: &CurvatureForms) -> Result<JetForm> {
    check_dim(omega.n)?;
    Ok(omega.trace_wedge(omega).scale(-1.0 / EIGHT_PI2))
}

/// `L₁ = p₁ / 3`.
pub fn l_form(omega: &CurvatureForms) -> Result<JetForm> {
    Ok(pontryagin_form(omega)?.scale(1.0 / 3.0))
}

/// The polarized `L₁(A, B) = -(1/24π²) tr(A∧B)` on matrices of forms.
pub(crate) fn l_polarized(n: usize, a: &[JetForm], b: &[JetForm]) -> JetForm {
    trace_wedge(n, a, b).scale(-1.0 / (3.0 * EIGHT_PI2))
}

/// The `p₁` coefficient on `dx¹∧…∧dx⁴` computed from coordinate-frame
/// curvature; the fast path used for integration.
pub fn pontryagin_density<M: MetricField + ?Sized>(g: &M, p: &[f64]) -> Result<f64> {
    if g.dim() != 4 {
        return Err(Error::invalid("the p1 density is a top form only in dimension 4"));
    }
    let geom = LocalGeometry::new(g, p, 2)?;
    let up: Vec<f64> = geom.riemann_up().iter().map(Jet::value).collect();
    Ok(-trace_top(&up, 4) / (4.0 * EIGHT_PI2))
}

/// `ε^{ijkl} T^p_{qij} T^q_{pkl}` for a `(1,3)` tensor with the last two slots antisymmetric.
fn trace_top(t: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for (perm, sign) in permutations4() {
        let [i, j, k, l] = perm;
        for p in 0..n {
            for q in 0..n {
                s += sign * t[((p * n + q) * n + i) * n + j] * t[((q * n + p) * n + k) * n + l];
            }
        }
    }
    s
}

fn permutations4() -> Vec<([usize; 4], f64)> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    let mut idx = p;
                    let mut sign = 1.0;
                    let mut ok = true;
                    for x in 0..4 {
                        for y in x + 1..4 {
                            if idx[x] == idx[y] {
                                ok = false;
                            }
                        }
                    }
                    if !ok {
                        continue;
                    }
                    for x in 0..4 {
                        for y in 0..3 - x {
                            if idx[y] > idx[y + 1] {
                                idx.swap(y, y + 1);
                                sign = -sign;
                            }
                        }
                    }
                    out.push((p, sign));
                }
            }
        }
    }
    out
}

/// `p₁` from the Weyl tensor alone: `-(1/32π²) ε^{ijkl} W^p_{qij} W^q_{pkl}`.
pub fn pontryagin_from_weyl<M: MetricField + ?Sized>(g: &M, p: &[f64]) -> Result<f64> {
    if g.dim() != 4 {
        return Err(Error::invalid("the Weyl form of p1 is implemented in dimension 4"));
    }
    let pkg = curvature_package(g, p)?;
    let w = pkg.weyl.as_ref().ok_or_else(|| Error::numerical("Weyl tensor unavailable"))?;
    Ok(-trace_top(w, 4) / (4.0 * EIGHT_PI2))
}

/// Pointwise `p₁` and `L₁` with closedness, from the frame formalism.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PontryaginSample {
    pub point: Vec<f64>,
    pub p1: Vec<f64>,
    pub l1: Vec<f64>,
    /// `max |dp₁|` over components; identically zero in dimension 4.
    pub closedness: f64,
    pub structure_residual: f64,
}

/// Evaluates `p₁` through frame, connection and curvature forms, using
/// metric jets of order 3 so that `dp₁` is exact.
pub fn pontryagin_sample<M: MetricField + ?Sized>(g: &M, p: &[f64], ordering: &[usize]) -> Result<PontryaginSample> {
    check_dim(g.dim())?;
    let cd = connection_and_curvature(g, p, 3, ordering)?;
    let p1 = pontryagin_form(&cd.curvature)?;
    let closedness = p1.d().values().max_abs();
    let v = p1.values();
    Ok(PontryaginSample {
        point: p.to_vec(),
        l1: v.comps.iter().map(|x| x / 3.0).collect(),
        p1: v.comps,
        closedness,
        structure_residual: cd.structure_residual,
    })
}

/// Samples `L₁` on Halton points of the chart for export.
pub fn l_form_field<M: MetricField + ?Sized>(g: &M, chart: &ChartBox, samples: usize, exec: Execution) -> Result<(FormField, Vec<PontryaginSample>)> {
    let n = g.dim();
    check_dim(n)?;
    let pts = chart.halton_points(samples)?;
    let ordering: Vec<usize> = (0..n).collect();
    let rows = exec.try_map(&pts, |p| pontryagin_sample(g, p, &ordering))?;
    let mut field = FormField::new(n, 4);
    for r in &rows {
        field.push(r.point.clone(), &Form { n, degree: 4, comps: r.l1.clone() });
    }
    Ok((field, rows))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalPontryaginReport {
    /// `max |p₁(e^{2φ}g) − p₁(g)|` from the frame route.
    pub deviation: f64,
    /// `max |p₁(g) − p₁^{Weyl}(g)|`.
    pub weyl_deviation: f64,
    pub max_p1: f64,
    pub samples: usize,
    pub tolerance: f64,
    pub pass: bool,
}

/// Compares `p₁` of `g` and `e^{2φ} g` at Halton points of `chart`.
pub fn pontryagin_conformal_check<M, S>(
    g: &M,
    phi: &S,
    chart: &ChartBox,
    samples: usize,
    tolerance: f64,
    exec: Execution,
) -> Result<ConformalPontryaginReport>
where
    M: MetricField + ?Sized,
    S: ScalarField + ?Sized,
{
    if g.dim() != 4 {
        return Err(Error::invalid("the conformal Pontryagin check runs in dimension 4"));
    }
    let gbar = Rescaled { metric: g, phi };
    let pts = chart.halton_points(samples)?;
    let ordering = [0, 1, 2, 3];
    let rows = exec.try_map(&pts, |p| -> Result<(f64, f64, f64)> {
        let a = connection_and_curvature(g, p, 2, &ordering)?;
        let b = connection_and_curvature(&gbar, p, 2, &ordering)?;
        let pa = pontryagin_form(&a.curvature)?.values().comps[0];
        let pb = pontryagin_form(&b.curvature)?.values().comps[0];
        let pw = pontryagin_from_weyl(g, p)?;
        Ok(((pa - pb).abs(), (pa - pw).abs(), pa.abs()))
    })?;
    let deviation = rows.iter().fold(0.0f64, |m, r| m.max(r.0));
    Ok(ConformalPontryaginReport {
        deviation,
        weyl_deviation: rows.iter().fold(0.0f64, |m, r| m.max(r.1)),
        max_p1: rows.iter().fold(0.0f64, |m, r| m.max(r.2)),
        samples: pts.len(),
        tolerance,
        pass: deviation <= tolerance,
    })
}

/// `∫ L₁` over a bounded 4-dimensional chart, respecting its orientation.
pub fn integrate_l_form<M: MetricField>(g: &M, chart: &ChartBox, orientation: i8, order: usize, exec: Execution) -> Result<Estimate> {
    let f = |p: &[f64]| -> Result<f64> { Ok(pontryagin_density(g, p)? / 3.0 * orientation as f64) };
    integrate(&f, chart, order, exec)
}

/// `∫ L₁` over all of `R⁴` by radius doubling.
pub fn integrate_l_form_improper<M: MetricField>(g: &M, order: usize, schedule: TruncationSchedule, exec: Execution) -> Result<ImproperEstimate> {
    let f = |p: &[f64]| -> Result<f64> { pontryagin_density(g, p).map(|v| v / 3.0) };
    integrate_improper(&f, 4, order, schedule, exec)
}
