use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::model::{lattice_parts, poly, SpectrumModel};
use crate::error::{Error, Result};
use crate::par::{pairwise_sum, Execution};
use crate::quadrature::gauss_legendre;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatConfig {
    /// Lattice spectra are truncated to `|n| ≤ lattice_radius`.
    pub lattice_radius: u64,
    /// Step `h` of the evaluation points `s = h, 2h, 3h, 4h`.
    pub s_step: f64,
    pub panel_order: usize,
    /// Threshold for the neglected small-`u` piece.
    pub tolerance: f64,
}

impl Default for HeatConfig {
    fn default() -> Self {
        HeatConfig { lattice_radius: 10_000, s_step: 0.01, panel_order: 16, tolerance: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatEtaResult {
    /// `η(0)` in the spectral normalization.
    pub value: f64,
    pub error: f64,
    pub s_values: Vec<f64>,
    pub eta_at_s: Vec<f64>,
    /// Size of the neglected `∫₀^{u₀}` piece.
    pub small_u_remainder: f64,
    /// The Mellin expression with `e^{−tA²}` and `t^{s'}` taken literally
    /// equals this factor times `η(0)` at `s' = −1/2`.
    pub literal_normalization_factor: f64,
    pub normalization: String,
}

const NORMALIZATION: &str = "eta(s) = 2/Gamma((s+1)/2) * int_0^inf u^s Tr(A exp(-u^2 A^2)) du";

/// Smallest `u` used for lattice spectra; below it the unit-spaced lattice
/// sum equals its asymptotic expansion up to `exp(−π²/u²)`.
const LATTICE_U0: f64 = 0.25;

/// `η(0)` from the heat trace, evaluated at `s = h, …, 4h` and extrapolated
/// by the cubic through those points.
pub fn heat_trace_eta(sp: &SpectrumModel, config: HeatConfig, exec: Execution) -> Result<HeatEtaResult> {
    sp.validate()?;
    let h = config.s_step;
    let s_values = vec![h, 2.0 * h, 3.0 * h, 4.0 * h];
    let (integrals, quad_err, small_u) = mellin_integrals(sp, &s_values, &config, exec)?;
    let eta_at_s: Vec<f64> =
        s_values.iter().zip(&integrals).map(|(s, v)| 2.0 / gamma((s + 1.0) / 2.0) * v).collect();
    let e = &eta_at_s;
    let cubic = 4.0 * e[0] - 6.0 * e[1] + 4.0 * e[2] - e[3];
    let quadratic = 3.0 * e[0] - 3.0 * e[1] + e[2];
    let err_scale = 2.0 / gamma(0.5);
    Ok(HeatEtaResult {
        value: cubic,
        error: (cubic - quadratic).abs() + err_scale * (quad_err + small_u),
        s_values,
        eta_at_s,
        small_u_remainder: small_u,
        literal_normalization_factor: 2.0,
        normalization: NORMALIZATION.to_string(),
    })
}

/// `∫₀^∞ u^s Tr(A e^{−u²A²}) du` for each `s`, plus quadrature and small-`u` error.
fn mellin_integrals(sp: &SpectrumModel, s: &[f64], config: &HeatConfig, exec: Execution) -> Result<(Vec<f64>, f64, f64)> {
    match sp {
        SpectrumModel::Explicit { eigenvalues, .. } => {
            if eigenvalues.is_empty() {
                return Ok((vec![0.0; s.len()], 0.0, 0.0));
            }
            let lmin = eigenvalues.first().map(|e| e.0.abs()).unwrap();
            let lmax = eigenvalues.last().map(|e| e.0.abs()).unwrap();
            let trace = |u: f64| -> f64 {
                let terms: Vec<f64> = eigenvalues.iter().map(|&(l, m)| m as f64 * l * (-(u * l).powi(2)).exp()).collect();
                pairwise_sum(&terms)
            };
            let u_start = 1e-3 / lmax;
            let u_end = 6.5 / lmin;
            let (vals, err) = panel_integrals(&trace, s, u_start, u_end, config.panel_order, exec);
            // the first piece [0, u_start] with the trace frozen at its value there
            let f0 = trace(0.0);
            let head: Vec<f64> = s.iter().map(|si| f0 * u_start.powf(si + 1.0) / (si + 1.0)).collect();
            let head_err = (f0 - trace(u_start)).abs() * u_start;
            Ok((vals.iter().zip(&head).map(|(a, b)| a + b).collect(), err + head_err, 0.0))
        }
        SpectrumModel::Lattice { a, multiplicity_coeffs, excluded, scale } => {
            let a = *a;
            let n = config.lattice_radius as i64;
            if (n as f64) * LATTICE_U0 < 6.0 {
                return Err(Error::invalid(format!(
                    "lattice radius {n} is too small: the heat trace needs |n| up to at least {}",
                    (6.0 / LATTICE_U0).ceil()
                )));
            }
            let parts = lattice_parts(a, multiplicity_coeffs, excluded, 1.0);
            // P(x) x in powers of x = n + a; its even part drives the small-u asymptotics
            let px = &parts.sides[0].coeffs;
            let asym: Vec<(f64, f64)> = (0..px.len())
                .filter_map(|k| {
                    let j = k + 1;
                    (j % 2 == 0 && px[k] != 0.0).then(|| (j as f64, px[k] * gamma((j as f64 + 1.0) / 2.0)))
                })
                .collect();
            let block = 2048i64;
            let count = (2 * n + 1 + block - 1) / block;
            let trace = |u: f64| -> f64 {
                let sums = exec.map_range(count as usize, |b| {
                    let lo = -n + b as i64 * block;
                    let hi = (lo + block - 1).min(n);
                    let terms: Vec<f64> = (lo..=hi)
                        .map(|k| {
                            let x = k as f64 + a;
                            poly(multiplicity_coeffs, k as f64) * x * (-(u * x).powi(2)).exp()
                        })
                        .collect();
                    pairwise_sum(&terms)
                });
                pairwise_sum(&sums)
            };
            let f_asym = |u: f64| -> f64 { asym.iter().map(|(j, c)| c * u.powf(-(j + 1.0))).sum() };
            let subtracted = |u: f64| -> f64 {
                let t = trace(u);
                if u < 1.0 {
                    t - f_asym(u)
                } else {
                    t
                }
            };
            let lmin = if a == 0.0 { 1.0 } else { a.min(1.0 - a) };
            let u_end = (6.5 / lmin).max(2.0);
            let (mut vals, mut err) = panel_integrals(&subtracted, s, LATTICE_U0, 1.0, 24, Execution::Sequential);
            let (tail, tail_err) = panel_integrals(&trace, s, 1.0, u_end, config.panel_order, Execution::Sequential);
            err += tail_err;
            let small = subtracted(LATTICE_U0).abs() * LATTICE_U0;
            if small > config.tolerance {
                return Err(Error::numerical(format!(
                    "heat trace does not settle at small u (remainder {small:.3e}); increase the lattice radius"
                )));
            }
            for (i, si) in s.iter().enumerate() {
                vals[i] += tail[i];
                // ∫₀¹ u^s · c u^{−j−1} du continued from s > j
                vals[i] += asym.iter().map(|(j, c)| c / (si - j)).sum::<f64>();
                // excluded modes, in the spectral normalization scaled back to this integral
                let g = gamma((si + 1.0) / 2.0) / 2.0;
                for &(x, m) in &parts.removed {
                    vals[i] -= m * x.signum() * x.abs().powf(-si) * g;
                }
                vals[i] *= scale.signum() * scale.abs().powf(-si);
            }
            Ok((vals, err, small))
        }
        SpectrumModel::Composite { parts } => {
            let mut vals = vec![0.0; s.len()];
            let (mut err, mut small) = (0.0, 0.0);
            for p in parts {
                let (v, e, sm) = mellin_integrals(p, s, config, exec)?;
                for (a, b) in vals.iter_mut().zip(&v) {
                    *a += b;
                }
                err += e;
                small += sm;
            }
            Ok((vals, err, small))
        }
    }
}

/// `∫_{lo}^{hi} u^s f(u) du` for every `s` on geometric panels (`lo > 0`), with the
/// difference to a half-order rule as the error estimate.
fn panel_integrals<F>(f: &F, s: &[f64], lo: f64, hi: f64, order: usize, exec: Execution) -> (Vec<f64>, f64)
where
    F: Fn(f64) -> f64 + Sync,
{
    let mut edges = vec![lo];
    let ratio: f64 = 1.25;
    while *edges.last().unwrap() < hi {
        let e = *edges.last().unwrap();
        let next = (e * ratio).min(hi);
        edges.push(next);
    }
    let rules = [gauss_legendre(order), gauss_legendre(order.div_ceil(2))];
    let panels: Vec<(f64, f64)> = edges.windows(2).map(|w| (w[0], w[1])).collect();
    let per_panel = exec.map(&panels, |&(a, b)| {
        let mut out = [vec![0.0; s.len()], vec![0.0; s.len()]];
        for (r, (nodes, weights)) in rules.iter().enumerate() {
            for (x, w) in nodes.iter().zip(weights) {
                let u = 0.5 * (b - a) * x + 0.5 * (a + b);
                let fu = f(u) * 0.5 * (b - a) * w;
                for (k, sk) in s.iter().enumerate() {
                    out[r][k] += u.powf(*sk) * fu;
                }
            }
        }
        out
    });
    let mut vals = vec![0.0; s.len()];
    let mut err = 0.0f64;
    for k in 0..s.len() {
        let hi_terms: Vec<f64> = per_panel.iter().map(|p| p[0][k]).collect();
        let lo_terms: Vec<f64> = per_panel.iter().map(|p| p[1][k]).collect();
        vals[k] = pairwise_sum(&hi_terms);
        err = err.max((vals[k] - pairwise_sum(&lo_terms)).abs());
    }
    (vals, err)
}
