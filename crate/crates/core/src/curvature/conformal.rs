use super::metric::{ChartMetric, MetricField, ScalarField};
use super::tensors::LocalGeometry;
use crate::error::{Error, Result};
use crate::expr::{Expression, Jet};

/// A conformal factor `φ`, defining `ḡ = e^{2φ} g`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalFactor {
    pub phi: Expression,
}

impl ConformalFactor {
    pub fn new(phi: Expression) -> Self {
        ConformalFactor { phi }
    }

    pub fn parse(text: &str, dim: usize) -> Result<Self> {
        Ok(ConformalFactor { phi: Expression::parse(text, dim)? })
    }

    pub fn zero(dim: usize) -> Self {
        ConformalFactor { phi: Expression::constant(dim, 0.0) }
    }
}

impl ScalarField for ConformalFactor {
    fn jet(&self, p: &[f64], order: usize) -> Result<Jet> {
        Ok(self.phi.eval_jet(p, order)?)
    }
}

/// `ḡ_ij = e^{2φ} g_ij` as expressions.
pub fn conformal_rescale(g: &ChartMetric, phi: &ConformalFactor) -> Result<ChartMetric> {
    let n = g.dim();
    if phi.phi.dim() > n {
        return Err(Error::invalid(format!(
            "conformal factor uses {} coordinates, metric has {n}",
            phi.phi.dim()
        )));
    }
    if phi.phi.is_zero() {
        return Ok(g.clone());
    }
    let factor = (&phi.phi.with_dim(n) * 2.0).exp();
    Ok(g.map_components(|c| &factor * c))
}

/// `S(X, Y) = (Xφ) Y + (Yφ) X - g(X, Y) ∇φ`, the difference of the
/// Levi-Civita connections of `e^{2φ} g` and `g`.
pub fn connection_difference<M, S>(g: &M, phi: &S, x: &[f64], y: &[f64], p: &[f64]) -> Result<Vec<f64>>
where
    M: MetricField + ?Sized,
    S: ScalarField + ?Sized,
{
    let n = g.dim();
    let gv = g.metric_values(p)?;
    let dphi = phi.jet(p, 1)?.gradient();
    let geo_inv = super::metric::invert_jets(
        &gv.iter().map(|&v| Jet::constant(n, 0, v)).collect::<Vec<_>>(),
        n,
    )
    .ok_or_else(|| Error::SingularMetric { point: p.to_vec(), reason: "metric is not invertible".into() })?;
    let ginv: Vec<f64> = geo_inv.iter().map(Jet::value).collect();
    let xphi: f64 = (0..n).map(|i| x[i] * dphi[i]).sum();
    let yphi: f64 = (0..n).map(|i| y[i] * dphi[i]).sum();
    let gxy: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| gv[i * n + j] * x[i] * y[j]).sum();
    Ok((0..n)
        .map(|k| {
            let grad_k: f64 = (0..n).map(|l| ginv[k * n + l] * dphi[l]).sum();
            xphi * y[k] + yphi * x[k] - gxy * grad_k
        })
        .collect())
}

/// `∇̄_X Y - ∇_X Y` for constant-coefficient fields, from the two Christoffel systems.
pub fn connection_difference_direct<M, N>(g: &M, gbar: &N, x: &[f64], y: &[f64], p: &[f64]) -> Result<Vec<f64>>
where
    M: MetricField + ?Sized,
    N: MetricField + ?Sized,
{
    let n = g.dim();
    let a = LocalGeometry::new(g, p, 1)?;
    let b = LocalGeometry::new(gbar, p, 1)?;
    Ok((0..n)
        .map(|k| {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += (b.gamma(k, i, j).value() - a.gamma(k, i, j).value()) * x[i] * y[j];
                }
            }
            s
        })
        .collect())
}
