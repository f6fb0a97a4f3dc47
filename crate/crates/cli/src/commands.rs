use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use umbilic_core::chart::ChartBox;
use umbilic_core::chern_weil::{
    boundary_transgression_integral, integrate_l_form, integrate_l_form_improper, l_form_field, pontryagin_conformal_check,
    stokes_balance, transgression_check,
};
use umbilic_core::cobordism::{
    aps_identity_check, disjoint_union, neck_conformal_map, obstruction_test, phi, ApsStatus, CobordismRecord, ManifoldRecord,
    APS_SLACK,
};
use umbilic_core::curvature::{
    classify_conformally_flat, curvature_package, norm_all_lower, ConformalFactor, FlatnessConfig, FlatnessCriterion,
    MetricField, Rescaled,
};
use umbilic_core::hypersurface::{
    collar_expansion_check, conformal_sff_transform, geodesic_collar, make_totally_geodesic, multiplicity_pattern,
    second_fundamental_form, umbilicity_scan, verify_totally_geodesic, CollarConfig,
};
use umbilic_core::io::{load_embedding, load_metric, CollarFile, EmbeddingFile};
use umbilic_core::par::Execution;
use umbilic_core::quadrature::TruncationSchedule;
use umbilic_core::spectral::{
    eta_invariant, eta_mod_2z, eta_series, heat_trace_eta, HeatConfig, SpectrumModel, DEFAULT_LATTICE_RADIUS,
};
use umbilic_core::{Error, Result};

use crate::args::{Command, Common};
use crate::report::{Check, Input, NOT_AT_DESK_SCALE};

/// Samples used when validating metric and embedding files.
const VALIDATION_SAMPLES: usize = 64;

#[derive(Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub summary: Vec<String>,
    pub notes: Vec<String>,
    pub details: Value,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("core types serialize")
}

fn required<'a>(p: &'a Option<std::path::PathBuf>, flag: &str) -> Result<&'a Path> {
    p.as_deref().ok_or_else(|| Error::invalid(format!("{flag} FILE is required")))
}

/// Digests of every file the command reads, including files referenced
/// from embeddings and cobordism records.
pub fn collect_inputs(cmd: &Command, c: &Common) -> Result<Vec<Input>> {
    let mut out = Vec::new();
    if let Some(p) = &c.metric {
        out.push(Input::digest("metric", p)?);
    }
    if let Some(p) = &c.embedding {
        out.push(Input::digest("embedding", p)?);
        let file = EmbeddingFile::read(p)?;
        out.push(Input::digest("embedding metric", &file.metric_path(p))?);
    }
    if let Some(p) = &c.spectrum {
        out.push(Input::digest("spectrum", p)?);
        let sidecar = std::path::PathBuf::from(format!("{}.meta.json", p.display()));
        if sidecar.exists() {
            out.push(Input::digest("spectrum metadata", &sidecar)?);
        }
    }
    for p in &c.record {
        out.push(Input::digest("record", p)?);
        let v: Value = serde_json::from_str(&std::fs::read_to_string(p)?)?;
        if let Some(bs) = v.get("boundary").and_then(Value::as_array) {
            let dir = p.parent().unwrap_or(Path::new("."));
            for b in bs {
                if b.get("record").is_none() {
                    if let Some(r) = b.get("ref").and_then(Value::as_str) {
                        out.push(Input::digest("boundary record", &dir.join(r))?);
                    }
                }
            }
        }
    }
    if let Command::Transgress { collar, .. } = cmd {
        out.push(Input::digest("collar", collar)?);
    }
    Ok(out)
}

pub fn run(cmd: &Command, c: &Common, exec: Execution) -> Result<Outcome> {
    match cmd {
        Command::Validate => validate(c),
        Command::Curvature { point } => curvature(c, point.as_deref()),
        Command::Flatness { samples } => flatness(c, *samples, exec),
        Command::Sff { phi, samples } => sff(c, phi.as_deref(), *samples, exec),
        Command::Umbilic { samples } => umbilic(c, *samples, exec),
        Command::MakeGeodesic { half_width, samples } => make_geodesic(c, *half_width, *samples, exec),
        Command::CollarFit { half_width, samples } => collar_fit(c, *half_width, *samples, exec),
        Command::Forms { samples, expect } => forms(c, *samples, *expect, exec),
        Command::Transgress { collar, samples } => transgress(c, collar, *samples, exec),
        Command::PontryaginCheck { phi, samples } => pontryagin(c, phi, *samples, exec),
        Command::Eta { s } => eta(c, *s, exec),
        Command::EtaHeat { radius } => eta_heat(c, *radius, exec),
        Command::ApsCheck => aps(c),
        Command::Obstruct => obstruct(c),
        Command::Phi => phi_cmd(c),
        Command::Neck { inner, outer, dim, samples } => neck(c, *inner, *outer, *dim, *samples, exec),
    }
}

fn validate(c: &Common) -> Result<Outcome> {
    let mut out = Outcome::default();
    if let Some(p) = &c.metric {
        let g = load_metric(p, VALIDATION_SAMPLES)?;
        out.summary.push(format!("metric {}: dimension {}, positive definite at samples", p.display(), g.dim()));
    }
    if let Some(p) = &c.embedding {
        let (emb, _) = load_embedding(p, VALIDATION_SAMPLES)?;
        out.summary.push(format!("embedding {}: hypersurface in dimension {}", p.display(), emb.ambient_dim()));
    }
    if let Some(p) = &c.spectrum {
        let sp = SpectrumModel::read(p)?;
        out.summary.push(format!("spectrum {}: growth order {}", p.display(), sp.growth_order()));
    }
    for p in &c.record {
        let v: Value = serde_json::from_str(&std::fs::read_to_string(p)?)?;
        if v.get("boundary").is_some() {
            let r = CobordismRecord::read(p)?;
            out.summary.push(format!("cobordism record {}: {} boundary components", r.name, r.boundary.len()));
        } else {
            let r = ManifoldRecord::read(p)?;
            out.summary.push(format!("manifold record {}: dimension {}", r.name, r.dim));
        }
    }
    if out.summary.is_empty() {
        return Err(Error::invalid("nothing to validate: pass --metric, --embedding, --spectrum or --record"));
    }
    out.checks.push(Check::info("files validated", out.summary.len() as f64, 0.0, "input validation"));
    Ok(out)
}

/// A representative point: the center of bounded axes, 0 or an offset from
/// the finite end on unbounded ones.
fn chart_center(chart: &ChartBox) -> Vec<f64> {
    chart
        .intervals()
        .iter()
        .map(|&(a, b)| match (a.is_finite(), b.is_finite()) {
            (true, true) => 0.5 * (a + b),
            (true, false) => a + 1.0,
            (false, true) => b - 1.0,
            (false, false) => 0.0,
        })
        .collect()
}

fn curvature(c: &Common, point: Option<&str>) -> Result<Outcome> {
    let g = load_metric(required(&c.metric, "--metric")?, VALIDATION_SAMPLES)?;
    let p = match point {
        Some(text) => text
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| Error::invalid(format!("bad coordinate `{s}`"))))
            .collect::<Result<Vec<_>>>()?,
        None => chart_center(g.chart()),
    };
    if p.len() != g.dim() {
        return Err(Error::invalid(format!("point has {} coordinates, metric has dimension {}", p.len(), g.dim())));
    }
    let pkg = curvature_package(&g, &p)?;
    let n = pkg.dim;
    let ric = norm_all_lower(&pkg.ricci, &pkg.inverse_metric, n, 2);
    let mut out = Outcome::default();
    out.summary.push(format!("point {p:?}"));
    out.checks.push(Check::info("scalar curvature", pkg.scalar, 0.0, "curvature package"));
    out.checks.push(Check::info("|Ric|", ric, 0.0, "curvature package"));
    out.checks.push(Check::info("|Rm|", pkg.riemann_norm(), 0.0, "curvature package"));
    if let Some(w) = pkg.weyl_norm() {
        out.checks.push(Check::info("|W|", w, 0.0, "curvature package"));
    }
    if let Some(cn) = pkg.cotton_norm() {
        out.checks.push(Check::info("|C|", cn, 0.0, "curvature package"));
    }
    out.details = to_value(&pkg);
    Ok(out)
}

fn flatness(c: &Common, samples: usize, exec: Execution) -> Result<Outcome> {
    let g = load_metric(required(&c.metric, "--metric")?, VALIDATION_SAMPLES)?;
    let tol = c.tolerance.unwrap_or(FlatnessConfig::default().tolerance);
    let chart = g.chart().sampling_window();
    let r = classify_conformally_flat(&g, &chart, FlatnessConfig { samples, tolerance: tol }, exec)?;
    let name = match r.criterion {
        FlatnessCriterion::Trivial => "dimension at most 2",
        FlatnessCriterion::Cotton => "max |C|",
        FlatnessCriterion::Weyl => "max |W|",
    };
    let mut out = Outcome::default();
    out.summary.push(format!("verdict: {}", r.verdict.label()));
    out.checks.push(Check::verdict(name, r.max_norm, 0.0, tol, r.verdict.is_flat(), "conformal flatness"));
    out.details = to_value(&r);
    Ok(out)
}

fn sff(c: &Common, phi_text: Option<&str>, samples: usize, exec: Execution) -> Result<Outcome> {
    let (emb, g) = load_embedding(required(&c.embedding, "--embedding")?, VALIDATION_SAMPLES)?;
    let pts = emb.params().halton_points(samples)?;
    let forms = exec.try_map(&pts, |y| second_fundamental_form(&emb, &g, y))?;
    let mut out = Outcome::default();
    let max_h = forms.iter().flat_map(|f| f.h.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    out.checks.push(Check::info("max |h|", max_h, 0.0, "second fundamental form"));
    let Some(text) = phi_text else {
        out.summary.push(format!("{} samples", forms.len()));
        out.details = to_value(&forms);
        return Ok(out);
    };
    let tol = c.tolerance.unwrap_or(1e-6);
    let phi = ConformalFactor::parse(text, g.dim())?;
    let gbar = Rescaled { metric: &g, phi: &phi };
    let rows = exec.try_map(&forms, |f| -> Result<(f64, bool, Value)> {
        let law = conformal_sff_transform(f, &phi)?;
        let direct = second_fundamental_form(&emb, &gbar, &f.parameter)?;
        let scale = direct.h.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let rel = law.h.iter().zip(&direct.h).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / scale;
        let before = multiplicity_pattern(&f.eigenvalues, 1e-5);
        let after = multiplicity_pattern(&direct.eigenvalues, 1e-5);
        let same = before == after;
        Ok((rel, same, json!({ "parameter": f.parameter, "pattern": before, "pattern_bar": after, "h_bar": direct.h })))
    })?;
    let worst = rows.iter().fold(0.0f64, |m, r| m.max(r.0));
    let mismatches = rows.iter().filter(|r| !r.1).count();
    out.checks.push(Check::below("transformation law relative residual", worst, 0.0, tol, "conformal sff law vs direct recomputation"));
    out.checks.push(Check::verdict(
        "multiplicity pattern mismatches",
        mismatches as f64,
        0.0,
        0.0,
        mismatches == 0,
        "shape operator eigenvalue clusters",
    ));
    out.summary.push(format!("{} samples, phi = {text}", rows.len()));
    out.details = Value::Array(rows.into_iter().map(|r| r.2).collect());
    Ok(out)
}

fn umbilic(c: &Common, samples: usize, exec: Execution) -> Result<Outcome> {
    let (emb, g) = load_embedding(required(&c.embedding, "--embedding")?, VALIDATION_SAMPLES)?;
    let tol = c.tolerance.unwrap_or(1e-6);
    let scan = umbilicity_scan(&emb, &g, samples, tol, exec)?;
    let mut out = Outcome::default();
    out.summary.push(if scan.umbilic { "totally umbilic".into() } else { "not umbilic".into() });
    out.checks.push(Check::verdict("max umbilic deviation", scan.max_deviation, 0.0, tol, scan.umbilic, "shape operator spread"));
    out.details = to_value(&scan);
    Ok(out)
}

fn make_geodesic(c: &Common, half_width: f64, samples: usize, exec: Execution) -> Result<Outcome> {
    let (emb, g) = load_embedding(required(&c.embedding, "--embedding")?, VALIDATION_SAMPLES)?;
    let tol = c.tolerance.unwrap_or(1e-5);
    let config = CollarConfig { half_width, ..CollarConfig::default() };
    let factor = make_totally_geodesic(&emb, &g, config, 1e-6, exec)?;
    let r = verify_totally_geodesic(&factor, samples, exec)?;
    let mut out = Outcome::default();
    out.summary.push(format!("phi = lambda(y) r chi(r/w), w = {half_width}; max |lambda| = {:.6e}", r.max_lambda));
    out.checks.push(Check::below("max |h_bar|", r.max_h_bar, 0.0, tol, "recomputed from exp(2 phi) g"));
    out.details = to_value(&r);
    Ok(out)
}

fn collar_fit(c: &Common, half_width: f64, samples: usize, exec: Execution) -> Result<Outcome> {
    let (emb, g) = load_embedding(required(&c.embedding, "--embedding")?, VALIDATION_SAMPLES)?;
    let tol = c.tolerance.unwrap_or(1e-4);
    let params = emb.params().halton_points(samples)?;
    let collar = geodesic_collar(&emb, &g, &params, CollarConfig { half_width, ..CollarConfig::default() }, exec)?;
    let forms = exec.try_map(&params, |y| second_fundamental_form(&emb, &g, y))?;
    let fit = collar_expansion_check(&collar, &forms)?;
    let mut out = Outcome::default();
    out.summary.push(format!("{} normal geodesics, half-width {half_width}", params.len()));
    out.checks.push(Check::below("max |a'(0) + 2 S|", fit.max_residual, 0.0, tol, "cubic fit of the collar metric"));
    out.checks.push(Check::info("radial orthogonality defect", collar.gauss_defect(), 0.0, "geodesic collar"));
    out.checks.push(Check::info("zero slice defect", fit.zero_slice_defect, 0.0, "geodesic collar"));
    out.details = to_value(&fit);
    Ok(out)
}

fn forms(c: &Common, samples: usize, expect: Option<f64>, exec: Execution) -> Result<Outcome> {
    let g = load_metric(required(&c.metric, "--metric")?, VALIDATION_SAMPLES)?;
    let chart = g.chart().sampling_window();
    let (field, rows) = l_form_field(&g, &chart, samples, exec)?;
    let closed = rows.iter().fold(0.0f64, |m, r| m.max(r.closedness));
    let structure = rows.iter().fold(0.0f64, |m, r| m.max(r.structure_residual));
    let mut out = Outcome::default();
    out.checks.push(Check::info("max |d p1|", closed, 0.0, "Chern-Weil forms"));
    out.checks.push(Check::info("structure equation residual", structure, 0.0, "Cartan structure equation"));
    let mut details = json!({ "l_form": field });
    if g.dim() == 4 {
        let order = c.order.unwrap_or(8);
        let (value, error, extra) = if g.chart().is_bounded() {
            let est = integrate_l_form(&g, g.chart(), g.orientation(), order, exec)?;
            (est.value, est.error, to_value(&est))
        } else {
            let schedule = TruncationSchedule { initial_radius: 1.0, max_doublings: 10, tolerance: 1e-3 };
            let est = integrate_l_form_improper(&g, order, schedule, exec)?;
            (est.value, est.error, to_value(&est))
        };
        details["integral"] = extra;
        out.summary.push(format!("integral of L1 = {value:.9} ± {error:.1e} (order {order})"));
        match expect {
            Some(x) => {
                let tol = c.tolerance.unwrap_or(1e-2);
                out.checks.push(Check::below("|integral of L1 - expected|", (value - x).abs(), error, tol, "Gauss-Legendre quadrature"));
            }
            None => out.checks.push(Check::info("integral of L1", value, error, "Gauss-Legendre quadrature")),
        }
    } else if expect.is_some() {
        return Err(Error::invalid("--expect needs a 4-dimensional metric"));
    }
    out.details = details;
    Ok(out)
}

fn transgress(c: &Common, collar_path: &Path, samples: usize, exec: Execution) -> Result<Outcome> {
    let collar = CollarFile::read(collar_path)?.to_collar()?;
    let tol = c.tolerance.unwrap_or(1e-4);
    let order = c.order.unwrap_or(12);
    let h = collar.metric();
    let (report, field) = transgression_check(h, collar.product_metric(), h.chart(), samples, tol, exec)?;
    let x0 = collar.x_range().0;
    let q0 = boundary_transgression_integral(&collar, x0, order, exec)?;
    let stokes = stokes_balance(&collar, order, order, exec)?;
    let sff = collar.max_second_fundamental_form(samples)?;
    let mut out = Outcome::default();
    out.summary.push(format!("max |S| on x = {x0}: {sff:.3e}"));
    out.checks.push(Check::below("max |dQ - L1(Omega) + L1(Omega0)|", report.max_residual, 0.0, tol, "pointwise transgression identity"));
    if sff <= 1e-12 {
        out.checks.push(Check::below("|integral of Q at x0|", q0.value.abs(), q0.error, 1e-5, "totally geodesic boundary"));
    } else {
        out.checks.push(Check::info("integral of Q at x0", q0.value, q0.error, "boundary transgression"));
    }
    out.checks.push(Check::below("|Stokes balance|", stokes.balance.abs(), stokes.quadrature_error, tol, "interior vs boundary integrals"));
    out.details = json!({ "identity": report, "q_form": field, "q_start": q0, "stokes": stokes });
    Ok(out)
}

fn pontryagin(c: &Common, phi_text: &str, samples: usize, exec: Execution) -> Result<Outcome> {
    let g = load_metric(required(&c.metric, "--metric")?, VALIDATION_SAMPLES)?;
    let tol = c.tolerance.unwrap_or(1e-6);
    let phi = ConformalFactor::parse(phi_text, g.dim())?;
    let chart = g.chart().sampling_window();
    let r = pontryagin_conformal_check(&g, &phi, &chart, samples, tol, exec)?;
    let mut out = Outcome::default();
    out.summary.push(format!("{} samples, max |p1| = {:.3e}", r.samples, r.max_p1));
    out.checks.push(Check::below("max |p1(exp(2 phi) g) - p1(g)|", r.deviation, 0.0, tol, "frame-based Chern-Weil forms"));
    out.checks.push(Check::info("max |p1 - p1(W)|", r.weyl_deviation, 0.0, "Weyl tensor route"));
    out.details = to_value(&r);
    Ok(out)
}

fn eta(c: &Common, s: Option<f64>, exec: Execution) -> Result<Outcome> {
    let sp = SpectrumModel::read(required(&c.spectrum, "--spectrum")?)?;
    let mut out = Outcome::default();
    out.notes = NOT_AT_DESK_SCALE.iter().map(|s| format!("not reproducible at desk scale: {s}")).collect();
    if let Some(s) = s {
        let r = eta_series(&sp, s, DEFAULT_LATTICE_RADIUS, exec)?;
        out.summary.push(format!("eta({s}) = {:.15} ± {:.1e}", r.value, r.error));
        out.checks.push(Check::info(&format!("eta({s})"), r.value, r.error, "partial sums with Euler-Maclaurin tail"));
        out.details = to_value(&r);
        return Ok(out);
    }
    let r = eta_invariant(&sp)?;
    out.summary.push(format!("eta = {:.15} ± {:.1e} ({:?})", r.value, r.error, r.method));
    out.checks.push(Check::info("eta", r.value, r.error, "spectral series continued to s = 0"));
    if let (Some(h), Some(em)) = (r.diagnostics.hurwitz, r.diagnostics.euler_maclaurin) {
        let tol = c.tolerance.unwrap_or(1e-8);
        out.checks.push(Check::below("|Hurwitz - Euler-Maclaurin|", (h - em).abs(), 0.0, tol, "two continuations"));
    }
    if let Ok(m) = eta_mod_2z(&r) {
        out.summary.push(format!("eta mod 2Z = {} (integer part {})", m.representative, m.integer_part));
    }
    out.details = to_value(&r);
    Ok(out)
}

fn eta_heat(c: &Common, radius: u64, exec: Execution) -> Result<Outcome> {
    let sp = SpectrumModel::read(required(&c.spectrum, "--spectrum")?)?;
    let tol = c.tolerance.unwrap_or(1e-4);
    let heat = heat_trace_eta(&sp, HeatConfig { lattice_radius: radius, ..HeatConfig::default() }, exec)?;
    let series = eta_invariant(&sp)?;
    let diff = (heat.value - series.value).abs();
    let mut out = Outcome::default();
    out.summary.push(format!("heat trace eta = {:.10} ± {:.1e}; series eta = {:.10}", heat.value, heat.error, series.value));
    out.summary.push(format!(
        "literal Mellin form in t^s exp(-t A^2) at s = -1/2: {:.10} (factor {})",
        heat.literal_normalization_factor * heat.value,
        heat.literal_normalization_factor
    ));
    out.notes = NOT_AT_DESK_SCALE.iter().map(|s| format!("not reproducible at desk scale: {s}")).collect();
    out.checks.push(Check::below("|heat - series|", diff, heat.error + series.error, tol, "heat trace vs Hurwitz closed form"));
    out.details = json!({ "heat": heat, "series": series });
    Ok(out)
}

fn single_record(c: &Common) -> Result<&Path> {
    match c.record.as_slice() {
        [p] => Ok(p),
        [] => Err(Error::invalid("--record FILE is required")),
        _ => Err(Error::invalid("exactly one --record is expected")),
    }
}

fn aps(c: &Common) -> Result<Outcome> {
    let rec = CobordismRecord::read(single_record(c)?)?;
    let r = aps_identity_check(&rec)?;
    let mut out = Outcome::default();
    out.summary.push(format!(
        "sign = {}, integral of L = {}, boundary eta = {}",
        r.signature, r.l_integral, r.boundary_eta
    ));
    out.checks.push(Check::verdict(
        "|sign - int L + eta/2|",
        r.residual,
        r.combined_error,
        r.combined_error + APS_SLACK,
        r.status != ApsStatus::Fail,
        &format!("signature: {}; L integral: {}", rec.signature.provenance, rec.l_integral.provenance),
    ));
    out.notes.extend(r.notice.clone());
    out.notes.extend(NOT_AT_DESK_SCALE.iter().map(|s| format!("not reproducible at desk scale: {s}")));
    out.details = to_value(&r);
    Ok(out)
}

fn obstruct(c: &Common) -> Result<Outcome> {
    let m = ManifoldRecord::read(single_record(c)?)?;
    let tol = c.tolerance.unwrap_or(1e-6);
    let v = obstruction_test(&m, tol)?;
    let mut out = Outcome::default();
    out.summary.push(if v.obstructed {
        format!("{}: obstructed, eta is {:.6} away from 2Z", m.name, v.distance)
    } else {
        format!("{}: consistent with null-cobordant (nearest even integer {})", m.name, v.nearest_even)
    });
    out.checks.push(Check::verdict("distance of eta to 2Z", v.distance, v.error, tol + v.error, !v.obstructed, "eta record"));
    out.notes = NOT_AT_DESK_SCALE.iter().map(|s| format!("not reproducible at desk scale: {s}")).collect();
    out.details = to_value(&v);
    Ok(out)
}

fn phi_cmd(c: &Common) -> Result<Outcome> {
    if c.record.is_empty() {
        return Err(Error::invalid("--record FILE is required"));
    }
    let records = c.record.iter().map(|p| ManifoldRecord::read(p)).collect::<Result<Vec<_>>>()?;
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    for m in &records {
        let p = phi(m)?;
        let z = p.value();
        out.summary.push(format!("Phi({}) = {:.12} {:+.12} i (angle {:.12})", m.name, z.re, z.im, p.angle));
        rows.push(json!({ "name": m.name, "phi": p, "re": z.re, "im": z.im }));
    }
    let mut union = records[0].clone();
    let mut product = phi(&union)?;
    for m in &records[1..] {
        union = disjoint_union(&union, m)?;
        product = product.mul(&phi(m)?);
    }
    let pu = phi(&union)?;
    if records.len() > 1 {
        let z = pu.value();
        out.summary.push(format!("Phi(union) = {:.12} {:+.12} i", z.re, z.im));
        out.checks.push(Check::below("|Phi(union) - product of Phi|", pu.distance(&product), pu.error, 1e-12, "angle arithmetic"));
    }
    out.checks.push(Check::info("angle of Phi(union)", pu.angle, pu.error, "exp(i pi eta)"));
    out.notes = NOT_AT_DESK_SCALE.iter().map(|s| format!("not reproducible at desk scale: {s}")).collect();
    out.details = json!({ "records": rows, "union": pu });
    Ok(out)
}

fn neck(c: &Common, inner: f64, outer: f64, dim: usize, samples: usize, exec: Execution) -> Result<Outcome> {
    let tol = c.tolerance.unwrap_or(1e-9);
    let r = neck_conformal_map(inner, outer, dim, samples, tol, exec)?;
    let mut out = Outcome::default();
    out.summary.push(format!(
        "annulus {inner} < |x| < {outer} in R^{dim} ~ cylinder of length {:.12} times S^{}",
        r.cylinder_length,
        dim - 1
    ));
    out.checks.push(Check::below("cylinder pullback residual", r.pullback_residual, 0.0, tol, "x -> (log|x|, x/|x|)"));
    out.checks.push(Check::below("inversion pullback residual", r.inversion_residual, 0.0, tol, "x -> r R x/|x|^2"));
    out.checks.push(Check::below("curvature profile residual", r.curvature_residual, 0.0, tol, "curvature of |x|^-2 delta"));
    out.details = to_value(&r);
    Ok(out)
}
