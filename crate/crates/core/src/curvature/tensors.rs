use serde::Serialize;

use super::metric::{cholesky, invert_jets, MetricField};
use crate::error::{Error, Result};
use crate::expr::{dot, fma_into, Jet};

/// Metric, inverse and Christoffel symbols as jets at one point.
///
/// If the metric jets have order `K`, the inverse has order `K` and the
/// Christoffel symbols order `K - 1`.
#[derive(Debug, Clone)]
pub struct LocalGeometry {
    pub n: usize,
    pub point: Vec<f64>,
    pub g: Vec<Jet>,
    pub ginv: Vec<Jet>,
    /// `Γ^k_ij` at index `(k*n + i)*n + j`.
    pub gamma: Vec<Jet>,
}

impl LocalGeometry {
    pub fn new<M: MetricField + ?Sized>(metric: &M, p: &[f64], order: usize) -> Result<Self> {
        let g = metric.metric_jets(p, order)?;
        Self::from_metric_jets(g, p)
    }

    pub fn from_metric_jets(g: Vec<Jet>, p: &[f64]) -> Result<Self> {
        let n = p.len();
        assert!(g[0].order() >= 1, "Christoffel symbols need first derivatives");
        let values: Vec<f64> = g.iter().map(Jet::value).collect();
        if cholesky(&values, n).is_none() {
            return Err(Error::SingularMetric { point: p.to_vec(), reason: "metric is not positive-definite".into() });
        }
        let ginv = invert_jets(&g, n)
            .ok_or_else(|| Error::SingularMetric { point: p.to_vec(), reason: "metric is not invertible".into() })?;
        // dg[(a*n + b)*n + c] = ∂_a g_bc
        let mut dg = Vec::with_capacity(n * n * n);
        for a in 0..n {
            for bc in 0..n * n {
                dg.push(g[bc].d(a));
            }
        }
        let dgi = |a: usize, b: usize, c: usize| &dg[(a * n + b) * n + c];
        let order = dg[0].order();
        let nv = p.len();
        let mut gamma: Vec<Jet> = Vec::with_capacity(n * n * n);
        let mut lowered: Vec<Jet> = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    lowered.push(&(dgi(i, j, l) + dgi(j, i, l)) - dgi(l, i, j));
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if j < i {
                        let mirrored = gamma[(k * n + j) * n + i].clone();
                        gamma.push(mirrored);
                        continue;
                    }
                    let mut acc = Jet::constant(nv, order, 0.0);
                    for l in 0..n {
                        fma_into(&mut acc, &ginv[k * n + l], &lowered[(i * n + j) * n + l]);
                    }
                    gamma.push(acc.scale(0.5));
                }
            }
        }
        Ok(LocalGeometry { n, point: p.to_vec(), g, ginv, gamma })
    }

    pub fn gamma(&self, k: usize, i: usize, j: usize) -> &Jet {
        &self.gamma[(k * self.n + i) * self.n + j]
    }

    /// `R^a_{bcd}` with `R(∂_c, ∂_d)∂_b = R^a_{bcd} ∂_a`, at index `((a*n+b)*n+c)*n+d`.
    pub fn riemann_up(&self) -> Vec<Jet> {
        let n = self.n;
        let nv = self.point.len();
        let order = self.gamma[0].order().saturating_sub(1);
        let zero = Jet::constant(nv, order, 0.0);
        let mut out = vec![zero.clone(); n.pow(4)];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in c + 1..n {
                        let mut r = &self.gamma(a, d, b).d(c) - &self.gamma(a, c, b).d(d);
                        let mut minus = zero.clone();
                        for e in 0..n {
                            fma_into(&mut r, self.gamma(a, c, e), self.gamma(e, d, b));
                            fma_into(&mut minus, self.gamma(a, d, e), self.gamma(e, c, b));
                        }
                        let r = &r - &minus;
                        out[((a * n + b) * n + d) * n + c] = -&r;
                        out[((a * n + b) * n + c) * n + d] = r;
                    }
                }
            }
        }
        out
    }

    /// `R_{abcd} = g_{ae} R^e_{bcd}`.
    pub fn riemann_down(&self, up: &[Jet]) -> Vec<Jet> {
        let n = self.n;
        let n3 = n * n * n;
        let mut out = Vec::with_capacity(n.pow(4));
        for a in 0..n {
            for bcd in 0..n3 {
                let row: Vec<Jet> = (0..n).map(|e| self.g[a * n + e].clone()).collect();
                let col: Vec<Jet> = (0..n).map(|e| up[e * n3 + bcd].clone()).collect();
                out.push(dot(&row, &col));
            }
        }
        out
    }

    /// `Ric_{bd} = R^a_{bad}`.
    pub fn ricci(&self, up: &[Jet]) -> Vec<Jet> {
        let n = self.n;
        let mut out = Vec::with_capacity(n * n);
        for b in 0..n {
            for d in 0..n {
                let mut s = Jet::constant(up[0].nvars(), up[0].order(), 0.0);
                for a in 0..n {
                    s = &s + &up[((a * n + b) * n + a) * n + d];
                }
                out.push(s);
            }
        }
        out
    }

    pub fn scalar(&self, ricci: &[Jet]) -> Jet {
        let inv: Vec<Jet> = self.ginv.clone();
        dot(&inv, ricci)
    }

    /// Schouten tensor `P = (Ric - R g / (2(n-1))) / (n-2)`, for `n ≥ 3`.
    pub fn schouten(&self, ricci: &[Jet], scalar: &Jet) -> Vec<Jet> {
        let n = self.n as f64;
        ricci
            .iter()
            .zip(&self.g)
            .map(|(r, g)| (r - &(g * scalar).scale(1.0 / (2.0 * (n - 1.0)))).scale(1.0 / (n - 2.0)))
            .collect()
    }
}

/// Christoffel symbols `Γ^k_ij` at a point, index `(k*n + i)*n + j`.
pub fn christoffel<M: MetricField + ?Sized>(g: &M, p: &[f64]) -> Result<Vec<f64>> {
    let geo = LocalGeometry::new(g, p, 1)?;
    Ok(geo.gamma.iter().map(Jet::value).collect())
}

/// Curvature quantities at one point. All index conventions are row-major.
#[derive(Debug, Clone, Serialize)]
pub struct CurvaturePackage {
    pub dim: usize,
    pub point: Vec<f64>,
    pub metric: Vec<f64>,
    pub inverse_metric: Vec<f64>,
    /// `Γ^k_ij`.
    pub christoffel: Vec<f64>,
    /// `R_{abcd}`, all indices down, `R_{abcd} = g(R(∂_c,∂_d)∂_b, ∂_a)`.
    pub riemann: Vec<f64>,
    pub ricci: Vec<f64>,
    pub scalar: f64,
    /// Present for `n ≥ 3`.
    pub schouten: Option<Vec<f64>>,
    /// `W^a_{bcd}`, present for `n ≥ 3`.
    pub weyl: Option<Vec<f64>>,
    /// `C_{abc} = ∇_c P_{ab} - ∇_b P_{ac}`, present for `n = 3`.
    pub cotton: Option<Vec<f64>>,
}

impl CurvaturePackage {
    pub fn riemann(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let n = self.dim;
        self.riemann[((a * n + b) * n + c) * n + d]
    }

    pub fn christoffel(&self, k: usize, i: usize, j: usize) -> f64 {
        let n = self.dim;
        self.christoffel[(k * n + i) * n + j]
    }

    pub fn weyl_up(&self, a: usize, b: usize, c: usize, d: usize) -> Option<f64> {
        let n = self.dim;
        self.weyl.as_ref().map(|w| w[((a * n + b) * n + c) * n + d])
    }

    /// `|W|_g`, the pointwise norm of the Weyl tensor.
    pub fn weyl_norm(&self) -> Option<f64> {
        let w = self.weyl.as_ref()?;
        let lower = lower_first(w, &self.metric, self.dim, 4);
        Some(norm_all_lower(&lower, &self.inverse_metric, self.dim, 4))
    }

    /// `|C|_g`, the pointwise norm of the Cotton tensor.
    pub fn cotton_norm(&self) -> Option<f64> {
        let c = self.cotton.as_ref()?;
        Some(norm_all_lower(c, &self.inverse_metric, self.dim, 3))
    }

    pub fn riemann_norm(&self) -> f64 {
        norm_all_lower(&self.riemann, &self.inverse_metric, self.dim, 4)
    }
}

/// Computes every curvature quantity at `p`.
pub fn curvature_package<M: MetricField + ?Sized>(g: &M, p: &[f64]) -> Result<CurvaturePackage> {
    let n = g.dim();
    let order = if n == 3 { 3 } else { 2 };
    let geo = LocalGeometry::new(g, p, order)?;
    let up = geo.riemann_up();
    let down = geo.riemann_down(&up);
    let ric = geo.ricci(&up);
    let scal = geo.scalar(&ric);
    let vals = |v: &[Jet]| v.iter().map(Jet::value).collect::<Vec<f64>>();
    let metric = vals(&geo.g);
    let inverse_metric = vals(&geo.ginv);
    let (mut schouten, mut weyl, mut cotton) = (None, None, None);
    if n >= 3 {
        let p_jets = geo.schouten(&ric, &scal);
        let pv = vals(&p_jets);
        let rd = vals(&down);
        let mut w_down = vec![0.0; n.pow(4)];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let kn = pv[a * n + c] * metric[b * n + d] + pv[b * n + d] * metric[a * n + c]
                            - pv[a * n + d] * metric[b * n + c]
                            - pv[b * n + c] * metric[a * n + d];
                        w_down[((a * n + b) * n + c) * n + d] = rd[((a * n + b) * n + c) * n + d] - kn;
                    }
                }
            }
        }
        weyl = Some(raise_first(&w_down, &inverse_metric, n, 4));
        if n == 3 {
            cotton = Some(cotton_tensor(&geo, &p_jets));
        }
        schouten = Some(pv);
    }
    Ok(CurvaturePackage {
        dim: n,
        point: p.to_vec(),
        metric,
        inverse_metric,
        christoffel: vals(&geo.gamma),
        riemann: vals(&down),
        ricci: vals(&ric),
        scalar: scal.value(),
        schouten,
        weyl,
        cotton,
    })
}

fn cotton_tensor(geo: &LocalGeometry, p: &[Jet]) -> Vec<f64> {
    let n = geo.n;
    // ∇_c P_ab = ∂_c P_ab - Γ^e_ca P_eb - Γ^e_cb P_ae
    let nabla = |c: usize, a: usize, b: usize| -> f64 {
        let mut v = p[a * n + b].d(c).value();
        for e in 0..n {
            v -= geo.gamma(e, c, a).value() * p[e * n + b].value();
            v -= geo.gamma(e, c, b).value() * p[a * n + e].value();
        }
        v
    };
    let mut out = Vec::with_capacity(n * n * n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                out.push(nabla(c, a, b) - nabla(b, a, c));
            }
        }
    }
    out
}

fn raise_first(t: &[f64], ginv: &[f64], n: usize, rank: usize) -> Vec<f64> {
    let rest = n.pow(rank as u32 - 1);
    let mut out = vec![0.0; t.len()];
    for a in 0..n {
        for r in 0..rest {
            out[a * rest + r] = (0..n).map(|e| ginv[a * n + e] * t[e * rest + r]).sum();
        }
    }
    out
}

fn lower_first(t: &[f64], g: &[f64], n: usize, rank: usize) -> Vec<f64> {
    raise_first(t, g, n, rank)
}

/// Raises the index at `pos` (0 = leftmost).
fn raise_at(t: &[f64], ginv: &[f64], n: usize, rank: usize, pos: usize) -> Vec<f64> {
    let inner = n.pow((rank - 1 - pos) as u32);
    let outer = t.len() / (inner * n);
    let mut out = vec![0.0; t.len()];
    for o in 0..outer {
        for a in 0..n {
            for i in 0..inner {
                out[(o * n + a) * inner + i] =
                    (0..n).map(|e| ginv[a * n + e] * t[(o * n + e) * inner + i]).sum();
            }
        }
    }
    out
}

/// `sqrt(T_{a…} T^{a…})` for an all-lower tensor.
pub fn norm_all_lower(t: &[f64], ginv: &[f64], n: usize, rank: usize) -> f64 {
    let mut up = t.to_vec();
    for pos in 0..rank {
        up = raise_at(&up, ginv, n, rank, pos);
    }
    t.iter().zip(&up).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt()
}
