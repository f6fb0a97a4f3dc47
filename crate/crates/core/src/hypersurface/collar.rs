use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{inner, second_fundamental_form, HypersurfaceEmbedding, SecondFundamentalForm};
use crate::curvature::{LocalGeometry, MetricField};
use crate::error::{Error, Result};
use crate::expr::Jet;
use crate::par::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollarConfig {
    pub half_width: f64,
    /// Slices on each side of `r = 0`.
    pub slices_per_side: usize,
    /// Initial integration steps per unit geodesic length.
    pub steps_per_unit: usize,
    /// Step halving stops once two successive resolutions agree to this.
    pub tolerance: f64,
}

impl Default for CollarConfig {
    fn default() -> Self {
        CollarConfig { half_width: 0.2, slices_per_side: 4, steps_per_unit: 64, tolerance: 1e-11 }
    }
}

/// Collar data along the normal geodesic through one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollarSample {
    pub parameter: Vec<f64>,
    /// Ambient points `exp(r ν)` on each slice.
    pub points: Vec<Vec<f64>>,
    /// `a_ij(r, y)` on each slice, row-major.
    pub metric: Vec<Vec<f64>>,
    /// `g(∂_r, ∂_r)` on each slice.
    pub radial_norm: Vec<f64>,
    /// `max_i |g(∂_r, ∂_{y_i})|` on each slice.
    pub cross_term: Vec<f64>,
    /// Step-halving error estimate of the integrated state.
    pub integration_error: f64,
}

/// Coordinates `(r, y)` near a hypersurface built from its normal geodesics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollarChart {
    pub half_width: f64,
    /// Slice radii, ascending and containing 0.
    pub radii: Vec<f64>,
    pub samples: Vec<CollarSample>,
}

impl CollarChart {
    /// Largest defect of `g(∂_r, ∂_r) = 1`, `g(∂_r, ∂_y) = 0` over all samples and slices.
    pub fn gauss_defect(&self) -> f64 {
        self.samples
            .iter()
            .flat_map(|s| s.radial_norm.iter().map(|v| (v - 1.0).abs()).chain(s.cross_term.iter().copied()))
            .fold(0.0, f64::max)
    }

    pub fn zero_slice(&self) -> usize {
        self.radii.iter().position(|r| *r == 0.0).expect("radii contain 0")
    }
}

/// Geodesic position, velocity and the Jacobi fields `J_i = ∂x/∂y_i` with
/// their derivatives, packed as `[x, v, J_0, W_0, J_1, W_1, …]`.
#[derive(Debug, Clone)]
pub(crate) struct FlowState {
    pub n: usize,
    pub s: Vec<f64>,
}

impl FlowState {
    pub fn x(&self) -> &[f64] {
        &self.s[..self.n]
    }

    pub fn v(&self) -> &[f64] {
        &self.s[self.n..2 * self.n]
    }

    pub fn jacobi(&self, i: usize) -> &[f64] {
        let o = 2 * self.n + 2 * i * self.n;
        &self.s[o..o + self.n]
    }

    pub fn fields(&self) -> usize {
        (self.s.len() / self.n - 2) / 2
    }
}

fn rhs<M: MetricField + ?Sized>(g: &M, st: &[f64], n: usize) -> Result<Vec<f64>> {
    let x = &st[..n];
    let v = &st[n..2 * n];
    let geo = LocalGeometry::new(g, x, 2)?;
    let gam = |k: usize, a: usize, b: usize| geo.gamma(k, a, b);
    let mut out = vec![0.0; st.len()];
    out[..n].copy_from_slice(v);
    for k in 0..n {
        let mut acc = 0.0;
        for a in 0..n {
            for b in 0..n {
                acc += gam(k, a, b).value() * v[a] * v[b];
            }
        }
        out[n + k] = -acc;
    }
    let m = (st.len() / n - 2) / 2;
    for i in 0..m {
        let o = 2 * n + 2 * i * n;
        let j = &st[o..o + n];
        let w = &st[o + n..o + 2 * n];
        out[o..o + n].copy_from_slice(w);
        for k in 0..n {
            let mut acc = 0.0;
            for a in 0..n {
                for b in 0..n {
                    let gk: &Jet = gam(k, a, b);
                    let dgam: f64 = (0..n).map(|l| gk.partial(&[l]).unwrap_or(0.0) * j[l]).sum();
                    acc += dgam * v[a] * v[b] + 2.0 * gk.value() * v[a] * w[b];
                }
            }
            out[o + n + k] = -acc;
        }
    }
    Ok(out)
}

fn rk4_step<M: MetricField + ?Sized>(g: &M, st: &[f64], n: usize, h: f64) -> Result<Vec<f64>> {
    let axpy = |a: &[f64], k: &[f64], c: f64| -> Vec<f64> { a.iter().zip(k).map(|(x, y)| x + c * y).collect() };
    let k1 = rhs(g, st, n)?;
    let k2 = rhs(g, &axpy(st, &k1, h / 2.0), n)?;
    let k3 = rhs(g, &axpy(st, &k2, h / 2.0), n)?;
    let k4 = rhs(g, &axpy(st, &k3, h), n)?;
    Ok((0..st.len()).map(|i| st[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect())
}

/// Integrates over `[0, length]` with `steps` equal steps, recording the state
/// after every `record_every` steps.
fn integrate<M: MetricField + ?Sized>(
    g: &M,
    start: &FlowState,
    length: f64,
    steps: usize,
    record_every: usize,
) -> Result<Vec<FlowState>> {
    let n = start.n;
    let h = length / steps as f64;
    let mut st = start.s.clone();
    let mut out = Vec::new();
    for k in 1..=steps {
        st = rk4_step(g, &st, n, h)?;
        if st.iter().any(|v| !v.is_finite()) {
            return Err(Error::numerical("geodesic integration produced non-finite values"));
        }
        if k % record_every == 0 {
            out.push(FlowState { n, s: st.clone() });
        }
    }
    Ok(out)
}

/// Integrates with step halving until two resolutions agree; returns the
/// finer states and the final discrepancy.
fn integrate_controlled<M: MetricField + ?Sized>(
    g: &M,
    start: &FlowState,
    length: f64,
    slices: usize,
    config: &CollarConfig,
) -> Result<(Vec<FlowState>, f64)> {
    let per_slice = ((config.steps_per_unit as f64 * length.abs() / slices as f64).ceil() as usize).max(1);
    let mut coarse = integrate(g, start, length, per_slice * slices, per_slice)?;
    let mut per = per_slice;
    for _ in 0..8 {
        per *= 2;
        let fine = integrate(g, start, length, per * slices, per)?;
        let err = coarse
            .iter()
            .zip(&fine)
            .flat_map(|(a, b)| a.s.iter().zip(&b.s).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max);
        if err <= config.tolerance {
            return Ok((fine, err));
        }
        coarse = fine;
    }
    Err(Error::numerical("geodesic integration did not reach the requested tolerance"))
}

/// Initial geodesic data `(F(y), ν, ∂_iF, ∂_iν)` at a parameter point.
pub(crate) fn initial_state<M: MetricField + ?Sized>(emb: &HypersurfaceEmbedding, g: &M, y: &[f64]) -> Result<FlowState> {
    let fr = emb.frame(g, y)?;
    let n = fr.x.len();
    let m = n - 1;
    let h = fr.sff();
    let ghat = DMatrix::from_row_slice(m, m, &fr.induced);
    let ghat_inv = ghat
        .try_inverse()
        .ok_or_else(|| Error::SingularMetric { point: fr.x.clone(), reason: "induced metric is singular".into() })?;
    let mut s = Vec::with_capacity(2 * n * (m + 1));
    s.extend_from_slice(&fr.x);
    s.extend_from_slice(&fr.normal);
    for i in 0..m {
        s.extend_from_slice(&fr.tangents[i]);
        // Weingarten: ∇_i ν = -h_il ĝ^{lj} ∂_jF, then ∂_i ν^k = (∇_i ν)^k - Γ^k_ab ∂_iF^a ν^b
        for k in 0..n {
            let mut w = 0.0;
            for j in 0..m {
                let c: f64 = (0..m).map(|l| h[i * m + l] * ghat_inv[(l, j)]).sum();
                w -= c * fr.tangents[j][k];
            }
            for a in 0..n {
                for b in 0..n {
                    w -= fr.gamma[(k * n + a) * n + b] * fr.tangents[i][a] * fr.normal[b];
                }
            }
            s.push(w);
        }
    }
    Ok(FlowState { n, s })
}

/// The collar map `Ψ(y, r) = exp_{F(y)}(r ν)` with its differential columns
/// `(∂_{y_1}Ψ, …, ∂_rΨ)`.
pub(crate) fn collar_map<M: MetricField + ?Sized>(
    emb: &HypersurfaceEmbedding,
    g: &M,
    y: &[f64],
    r: f64,
    config: &CollarConfig,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let start = initial_state(emb, g, y)?;
    let st = if r == 0.0 { start } else { integrate_controlled(g, &start, r, 1, config)?.0.pop().expect("one slice") };
    let mut cols: Vec<Vec<f64>> = (0..st.fields()).map(|i| st.jacobi(i).to_vec()).collect();
    cols.truncate(emb.params().dim());
    cols.push(st.v().to_vec());
    Ok((st.x().to_vec(), cols))
}

fn slice_data<M: MetricField + ?Sized>(g: &M, st: &FlowState) -> Result<(Vec<f64>, f64, f64)> {
    let n = st.n;
    let gv = g.metric_values(st.x())?;
    let m = st.fields();
    let mut a = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            a[i * m + j] = inner(st.jacobi(i), st.jacobi(j), &gv, n);
        }
    }
    let rr = inner(st.v(), st.v(), &gv, n);
    let ry = (0..m).map(|i| inner(st.v(), st.jacobi(i), &gv, n).abs()).fold(0.0, f64::max);
    Ok((a, rr, ry))
}

/// Builds the geodesic collar of half-width `config.half_width` through each
/// parameter point in `parameters`.
pub fn geodesic_collar<M: MetricField + ?Sized>(
    emb: &HypersurfaceEmbedding,
    g: &M,
    parameters: &[Vec<f64>],
    config: CollarConfig,
    exec: Execution,
) -> Result<CollarChart> {
    let w = config.half_width;
    let s = config.slices_per_side;
    if !(w > 0.0) || s == 0 {
        return Err(Error::invalid("collar needs a positive half-width and at least one slice per side"));
    }
    let sffs = exec.try_map(parameters, |y| second_fundamental_form(emb, g, y))?;
    let kmax = sffs.iter().flat_map(|f| f.eigenvalues.iter()).fold(0.0f64, |m, e| m.max(e.abs()));
    if kmax > 0.0 && w > 0.5 / kmax {
        return Err(Error::invalid(format!(
            "half-width {w} exceeds the focal-distance estimate {:.4}",
            0.5 / kmax
        )));
    }
    let radii: Vec<f64> = (-(s as i64)..=s as i64).map(|k| w * k as f64 / s as f64).collect();
    let samples = exec.try_map(parameters, |y| -> Result<CollarSample> {
        let start = initial_state(emb, g, y)?;
        let (fwd, e1) = integrate_controlled(g, &start, w, s, &config)?;
        let (bwd, e2) = integrate_controlled(g, &start, -w, s, &config)?;
        let mut states: Vec<FlowState> = bwd.into_iter().rev().collect();
        states.push(start);
        states.extend(fwd);
        let mut sample = CollarSample {
            parameter: y.clone(),
            points: Vec::new(),
            metric: Vec::new(),
            radial_norm: Vec::new(),
            cross_term: Vec::new(),
            integration_error: e1.max(e2),
        };
        for st in &states {
            let (a, rr, ry) = slice_data(g, st)?;
            let m = st.fields();
            let det = DMatrix::from_row_slice(m, m, &a).determinant();
            if !(det > 1e-12) {
                return Err(Error::numerical(format!("collar metric degenerates near {:?} (focal point)", st.x())));
            }
            sample.points.push(st.x().to_vec());
            sample.metric.push(a);
            sample.radial_norm.push(rr);
            sample.cross_term.push(ry);
        }
        Ok(sample)
    })?;
    Ok(CollarChart { half_width: w, radii, samples })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollarFit {
    /// Fitted `∂_x a_ij` at `x = 0`, per sample.
    pub linear: Vec<Vec<f64>>,
    /// `max_ij |∂_x a_ij + 2 S_ij|` per sample.
    pub residual: Vec<f64>,
    pub max_residual: f64,
    /// Largest `|a_ij(0) - ĝ_ij|`.
    pub zero_slice_defect: f64,
}

/// Least-squares cubic fit of `a_ij(x)` on the five slices nearest `x = 0`;
/// compares the linear coefficient with `-2 S_ij`.
pub fn collar_expansion_check(collar: &CollarChart, sff: &[SecondFundamentalForm]) -> Result<CollarFit> {
    if collar.radii.len() < 5 {
        return Err(Error::invalid("collar fit needs at least five slices"));
    }
    if sff.len() != collar.samples.len() {
        return Err(Error::invalid("one second fundamental form per collar sample is required"));
    }
    let z = collar.zero_slice();
    let mut idx: Vec<usize> = (0..collar.radii.len()).collect();
    idx.sort_by(|&a, &b| (a as i64 - z as i64).abs().cmp(&(b as i64 - z as i64).abs()).then(a.cmp(&b)));
    idx.truncate(5);
    idx.sort();
    let design = DMatrix::from_fn(5, 4, |row, col| collar.radii[idx[row]].powi(col as i32));
    let svd = design.svd(true, true);
    let mut fit = CollarFit { linear: Vec::new(), residual: Vec::new(), max_residual: 0.0, zero_slice_defect: 0.0 };
    for (sample, form) in collar.samples.iter().zip(sff) {
        if sample.parameter != form.parameter {
            return Err(Error::invalid("second fundamental forms are not aligned with collar samples"));
        }
        let mm = form.h.len();
        let mut linear = vec![0.0; mm];
        let mut res = 0.0f64;
        for k in 0..mm {
            let rhs = DVector::from_iterator(5, idx.iter().map(|&i| sample.metric[i][k]));
            let coef = svd.solve(&rhs, 1e-14).map_err(|e| Error::numerical(e.to_string()))?;
            linear[k] = coef[1];
            res = res.max((coef[1] + 2.0 * form.h[k]).abs());
            fit.zero_slice_defect = fit.zero_slice_defect.max((sample.metric[z][k] - form.induced_metric[k]).abs());
        }
        fit.max_residual = fit.max_residual.max(res);
        fit.linear.push(linear);
        fit.residual.push(res);
    }
    Ok(fit)
}
