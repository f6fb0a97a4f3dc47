use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::collar::collar_map;
use super::{second_fundamental_form, umbilicity_scan, CollarConfig, HypersurfaceEmbedding};
use crate::curvature::{MetricField, Rescaled, ScalarField};
use crate::error::{Error, Result};
use crate::expr::cutoff_value;
use crate::expr::Jet;
use crate::par::Execution;

/// `φ = λ(y) r χ(r / w)` in geodesic collar coordinates `(y, r)` around an
/// umbilic hypersurface, and `0` outside the collar.
///
/// `λ(y)` is the umbilic factor evaluated pointwise from the second
/// fundamental form. Points are located in the collar by Newton iteration on
/// the collar map. Only jets of order 0 and 1 are available.
#[derive(Debug, Clone)]
pub struct CollarConformalFactor<M> {
    emb: HypersurfaceEmbedding,
    metric: M,
    config: CollarConfig,
    guesses: Vec<(Vec<f64>, Vec<f64>)>,
}

impl<M: MetricField> CollarConformalFactor<M> {
    pub fn embedding(&self) -> &HypersurfaceEmbedding {
        &self.emb
    }

    pub fn half_width(&self) -> f64 {
        self.config.half_width
    }

    /// The umbilic factor `λ(y)`.
    pub fn lambda(&self, y: &[f64]) -> Result<f64> {
        let s = second_fundamental_form(&self.emb, &self.metric, y)?;
        Ok(s.eigenvalues.iter().sum::<f64>() / s.eigenvalues.len() as f64)
    }

    /// `φ` as a function of collar coordinates.
    pub fn in_collar(&self, y: &[f64], r: f64) -> Result<f64> {
        let u = r / self.config.half_width;
        let chi = cutoff_value(u);
        if chi == 0.0 {
            return Ok(0.0);
        }
        Ok(self.lambda(y)? * r * chi)
    }

    /// Collar coordinates `(y, r)` of an ambient point, or `None` when the
    /// point lies outside `|r| < w`.
    pub fn locate(&self, p: &[f64]) -> Result<Option<(Vec<f64>, f64)>> {
        let m = self.emb.params().dim();
        let w = self.config.half_width;
        let (y0, _) = self
            .guesses
            .iter()
            .min_by(|a, b| dist2(&a.1, p).total_cmp(&dist2(&b.1, p)))
            .ok_or_else(|| Error::invalid("empty parameter grid"))?;
        let mut y = y0.clone();
        let mut r = 0.0;
        for _ in 0..50 {
            let (x, cols) = collar_map(&self.emb, &self.metric, &y, r, &self.config)?;
            let res: Vec<f64> = x.iter().zip(p).map(|(a, b)| a - b).collect();
            let jac = DMatrix::from_fn(m + 1, m + 1, |row, col| cols[col][row]);
            let step = jac
                .lu()
                .solve(&DVector::from_vec(res.clone()))
                .ok_or_else(|| Error::numerical("collar map is singular during inversion"))?;
            for i in 0..m {
                y[i] -= step[i];
            }
            r -= step[m];
            if r.abs() > w {
                return Ok(None);
            }
            if !self.emb.params().contains(&y) {
                return Err(Error::numerical(format!("{p:?} projects outside the parametrized patch")));
            }
            let size = step.iter().fold(0.0f64, |s, v| s.max(v.abs()));
            if size <= 1e-14 * (1.0 + y.iter().fold(0.0f64, |s, v| s.max(v.abs()))) {
                let resid = res.iter().fold(0.0f64, |s, v| s.max(v.abs()));
                if resid <= 1e-10 {
                    return Ok(Some((y, r)));
                }
            }
        }
        Err(Error::numerical(format!("collar inversion did not converge at {p:?}")))
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

impl<M: MetricField> ScalarField for CollarConformalFactor<M> {
    fn jet(&self, p: &[f64], order: usize) -> Result<Jet> {
        if order > 1 {
            return Err(Error::invalid("the collar conformal factor provides jets up to order 1"));
        }
        let n = p.len();
        let Some((y, r)) = self.locate(p)? else {
            return Ok(Jet::constant(n, order, 0.0));
        };
        let w = self.config.half_width;
        let u = Jet::variable(1, 1, 0, r / w).cutoff();
        let (chi, dchi) = (u.value(), u.partial(&[0]).unwrap_or(0.0) / w);
        if chi == 0.0 && dchi == 0.0 {
            return Ok(Jet::constant(n, order, 0.0));
        }
        let lambda = self.lambda(&y)?;
        let value = lambda * r * chi;
        if order == 0 {
            return Ok(Jet::constant(n, 0, value));
        }
        let m = y.len();
        // derivatives in collar coordinates (y, r), then pulled through the collar map
        let mut dq = vec![0.0; m + 1];
        if r != 0.0 && chi != 0.0 {
            let h = 1e-5;
            for i in 0..m {
                let (mut a, mut b) = (y.clone(), y.clone());
                a[i] += h;
                b[i] -= h;
                dq[i] = (self.lambda(&a)? - self.lambda(&b)?) / (2.0 * h) * r * chi;
            }
        }
        dq[m] = lambda * (chi + r * dchi);
        let (_, cols) = collar_map(&self.emb, &self.metric, &y, r, &self.config)?;
        let jac = DMatrix::from_fn(m + 1, m + 1, |row, col| cols[col][row]);
        let inv = jac.try_inverse().ok_or_else(|| Error::numerical("collar map is singular"))?;
        let grad: Vec<f64> = (0..n).map(|k| (0..=m).map(|a| dq[a] * inv[(a, k)]).sum()).collect();
        Ok(Jet::linear(value, &grad, 1))
    }
}

/// Builds `φ` with `e^{2φ} g` making the umbilic hypersurface `N` totally geodesic.
pub fn make_totally_geodesic<M: MetricField + Clone>(
    emb: &HypersurfaceEmbedding,
    g: &M,
    config: CollarConfig,
    umbilic_tolerance: f64,
    exec: Execution,
) -> Result<CollarConformalFactor<M>> {
    let scan = umbilicity_scan(emb, g, 64, umbilic_tolerance, exec)?;
    if !scan.umbilic {
        return Err(Error::Hypothesis(format!(
            "hypersurface is not umbilic: deviation {:.3e} exceeds {umbilic_tolerance:.1e}",
            scan.max_deviation
        )));
    }
    let kmax = scan.lambda.iter().fold(0.0f64, |m, (_, l)| m.max(l.abs()));
    if kmax > 0.0 && config.half_width > 0.5 / kmax {
        return Err(Error::invalid(format!(
            "half-width {} exceeds the focal-distance estimate {:.4}",
            config.half_width,
            0.5 / kmax
        )));
    }
    let per_axis = match emb.params().dim() {
        1 => 64,
        2 => 16,
        3 => 8,
        _ => 5,
    };
    let guesses = emb
        .params()
        .grid_points(per_axis)
        .into_iter()
        .map(|y| emb.point(&y).map(|x| (y, x)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CollarConformalFactor { emb: emb.clone(), metric: g.clone(), config, guesses })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicReport {
    /// `max |h̄_ij|` over the samples, recomputed from `e^{2φ} g`.
    pub max_h_bar: f64,
    pub max_lambda_bar: f64,
    pub max_lambda: f64,
    pub samples: usize,
}

/// Recomputes the second fundamental form of `N` from the rescaled metric.
pub fn verify_totally_geodesic<M: MetricField>(
    phi: &CollarConformalFactor<M>,
    samples: usize,
    exec: Execution,
) -> Result<GeodesicReport> {
    let emb = phi.embedding();
    let gbar = Rescaled { metric: &phi.metric, phi };
    let pts = emb.params().halton_points(samples)?;
    let rows = exec.try_map(&pts, |y| -> Result<(f64, f64, f64)> {
        let s = second_fundamental_form(emb, &gbar, y)?;
        let h = s.h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let lb = s.eigenvalues.iter().sum::<f64>() / s.eigenvalues.len() as f64;
        Ok((h, lb.abs(), phi.lambda(y)?.abs()))
    })?;
    Ok(GeodesicReport {
        max_h_bar: rows.iter().fold(0.0, |m, r| m.max(r.0)),
        max_lambda_bar: rows.iter().fold(0.0, |m, r| m.max(r.1)),
        max_lambda: rows.iter().fold(0.0, |m, r| m.max(r.2)),
        samples: pts.len(),
    })
}
