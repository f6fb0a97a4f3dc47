use serde::{Deserialize, Serialize};

use crate::chart::{ChartBox, ExcludedSet};
use crate::curvature::{curvature_package, norm_all_lower, ChartMetric};
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::par::Execution;

/// The annulus `r < |x| < R` in `ℝⁿ` and its conformal maps.
#[derive(Debug, Clone, PartialEq)]
pub struct NeckMap {
    pub inner: f64,
    pub outer: f64,
    pub dim: usize,
    radius: Expression,
    cylinder: Vec<Expression>,
    inversion: Vec<Expression>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeckReport {
    pub inner: f64,
    pub outer: f64,
    pub dim: usize,
    /// Length `log(R/r)` of the cylinder `[log r, log R] × S^{n−1}`.
    pub cylinder_length: f64,
    /// `max |Ψ*(dt² + g_S) − |x|^{−2} δ|` relative to `|x|^{−2}`, `Ψ(x) = (log|x|, x/|x|)`.
    pub pullback_residual: f64,
    /// `max |ι*δ − ρ⁴|x|^{−4} δ|` relative, for `ι(x) = ρ² x/|x|²` with `ρ² = rR`.
    pub inversion_residual: f64,
    /// Largest deviation of scalar curvature, `|Ric|` and `|Rm|` of `|x|^{−2} δ`
    /// from the product `ℝ × S^{n−1}`.
    pub curvature_residual: f64,
    pub samples: usize,
    pub tolerance: f64,
    pub pass: bool,
}

impl NeckMap {
    pub fn new(inner: f64, outer: f64, dim: usize) -> Result<Self> {
        if !(inner > 0.0 && inner < outer && outer.is_finite()) {
            return Err(Error::invalid(format!("annulus radii must satisfy 0 < r < R, got r = {inner}, R = {outer}")));
        }
        if !(2..=crate::expr::MAX_VARS).contains(&dim) {
            return Err(Error::invalid(format!("neck dimension {dim} is not supported")));
        }
        let sq: Vec<String> = (1..=dim).map(|i| format!("x{i}^2")).collect();
        let r2 = format!("({})", sq.join(" + "));
        let radius = Expression::parse(&format!("sqrt{r2}"), dim)?;
        let mut cylinder = vec![Expression::parse(&format!("0.5*log{r2}"), dim)?];
        let mut inversion = Vec::with_capacity(dim);
        for i in 1..=dim {
            cylinder.push(Expression::parse(&format!("x{i}/sqrt{r2}"), dim)?);
            inversion.push(Expression::parse(&format!("{}*x{i}/{r2}", inner * outer), dim)?);
        }
        Ok(NeckMap { inner, outer, dim, radius, cylinder, inversion })
    }

    /// `(t, ω) = (log|x|, x/|x|)`.
    pub fn to_cylinder(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let v = self.cylinder.iter().map(|e| e.eval(x)).collect::<std::result::Result<Vec<_>, _>>()?;
        Ok((v[0], v[1..].to_vec()))
    }

    /// The inversion in the sphere of radius `√(rR)`, which swaps the boundary spheres.
    pub fn invert(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.inversion.iter().map(|e| e.eval(x)).collect::<std::result::Result<Vec<_>, _>>()?)
    }

    /// The conformal factor `e^{2φ} = |x|^{−2}` turning the flat annulus into the cylinder.
    pub fn factor(&self, x: &[f64]) -> Result<f64> {
        Ok(self.radius.eval(x)?.powi(-2))
    }

    /// `(J^T J)_ij` for a map given by component expressions; the target
    /// metric is Euclidean in all components.
    fn pullback(map: &[Expression], x: &[f64], n: usize) -> Result<Vec<f64>> {
        let grads = map.iter().map(|e| e.eval_jet(x, 1).map(|j| j.gradient())).collect::<std::result::Result<Vec<_>, _>>()?;
        let mut g = vec![0.0; n * n];
        for grad in &grads {
            for i in 0..n {
                for j in 0..n {
                    g[i * n + j] += grad[i] * grad[j];
                }
            }
        }
        Ok(g)
    }

    /// Sample points spread over the annulus.
    pub fn samples(&self, count: usize) -> Result<Vec<Vec<f64>>> {
        let n = self.dim;
        let dirs = ChartBox::cube(n + 1, 0.0, 1.0)?.halton_points(count)?;
        Ok(dirs
            .iter()
            .map(|h| {
                // radial fraction from the last coordinate, direction from the rest
                let mut v: Vec<f64> = h[..n].iter().map(|u| 2.0 * u - 1.0 + 1e-3).collect();
                let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                let r = self.inner * (self.outer / self.inner).powf(0.02 + 0.96 * h[n]);
                v.iter_mut().for_each(|c| *c *= r / norm);
                v
            })
            .collect())
    }

    pub fn check(&self, samples: usize, tolerance: f64, exec: Execution) -> Result<NeckReport> {
        let n = self.dim;
        let chart = ChartBox::with_excluded(
            vec![(-self.outer, self.outer); n],
            vec![ExcludedSet::Ball { center: vec![0.0; n], radius: 0.5 * self.inner }],
        )?;
        let r2: Vec<String> = (1..=n).map(|i| format!("x{i}^2")).collect();
        let cyl_metric = ChartMetric::conformally_euclidean(chart, &format!("1/({})", r2.join(" + ")))?;
        let k = (n - 1) as f64;
        // ℝ × S^{n−1}(1): scalar k(k−1), |Ric|² = k(k−1)², |Rm|² = 2k(k−1)
        let expected = [k * (k - 1.0), (k * (k - 1.0) * (k - 1.0)).sqrt(), (2.0 * k * (k - 1.0)).sqrt()];
        let pts = self.samples(samples)?;
        let rows = exec.try_map(&pts, |x| -> Result<[f64; 3]> {
            let rho2 = x.iter().map(|c| c * c).sum::<f64>();
            let g = Self::pullback(&self.cylinder, x, n)?;
            let mut pull = 0.0f64;
            let gi = Self::pullback(&self.inversion, x, n)?;
            let mut inv = 0.0f64;
            let inv_scale = (self.inner * self.outer).powi(2) / (rho2 * rho2);
            for i in 0..n {
                for j in 0..n {
                    let d = if i == j { 1.0 } else { 0.0 };
                    pull = pull.max((g[i * n + j] * rho2 - d).abs());
                    inv = inv.max((gi[i * n + j] / inv_scale - d).abs());
                }
            }
            let pkg = curvature_package(&cyl_metric, x)?;
            let ric = norm_all_lower(&pkg.ricci, &pkg.inverse_metric, n, 2);
            let got = [pkg.scalar, ric, pkg.riemann_norm()];
            let curv = got.iter().zip(&expected).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            Ok([pull, inv, curv])
        })?;
        let max = |k: usize| rows.iter().fold(0.0f64, |m, r| m.max(r[k]));
        let (pullback_residual, inversion_residual, curvature_residual) = (max(0), max(1), max(2));
        Ok(NeckReport {
            inner: self.inner,
            outer: self.outer,
            dim: n,
            cylinder_length: (self.outer / self.inner).ln(),
            pullback_residual,
            inversion_residual,
            curvature_residual,
            samples: pts.len(),
            tolerance,
            pass: pullback_residual.max(inversion_residual).max(curvature_residual) <= tolerance,
        })
    }
}

/// Builds the neck map and checks it at `samples` points.
pub fn neck_conformal_map(inner: f64, outer: f64, dim: usize, samples: usize, tolerance: f64, exec: Execution) -> Result<NeckReport> {
    NeckMap::new(inner, outer, dim)?.check(samples, tolerance, exec)
}
