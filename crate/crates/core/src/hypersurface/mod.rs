//! Hypersurfaces in a chart: fundamental forms, umbilicity, conformal change of
//! the second fundamental form, geodesic collars and the umbilic-to-geodesic
//! conformal deformation.
//!
//! Sign convention: `h_ij = g(∇_{∂i} ∂j F, ν)`. The unit normal `ν` is `side`
//! times the normalized generalized cross product `∂_1F × … × ∂_{n-1}F`.

mod collar;
mod geodesic;

pub use collar::{collar_expansion_check, geodesic_collar, CollarChart, CollarConfig, CollarFit, CollarSample};
pub use geodesic::{make_totally_geodesic, verify_totally_geodesic, CollarConformalFactor, GeodesicReport};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::chart::ChartBox;
use crate::curvature::{invert_jets, LocalGeometry, MetricField, ScalarField};
use crate::error::{Error, Result};
use crate::expr::{Expression, Jet};
use crate::par::Execution;

/// A parametrized hypersurface `F: Y ⊂ R^{n-1} → M^n` with a chosen normal side.
#[derive(Debug, Clone, PartialEq)]
pub struct HypersurfaceEmbedding {
    params: ChartBox,
    map: Vec<Expression>,
    side: i8,
}

impl HypersurfaceEmbedding {
    pub fn new(params: ChartBox, map: Vec<Expression>, side: i8) -> Result<Self> {
        let m = params.dim();
        if map.len() != m + 1 {
            return Err(Error::invalid(format!(
                "a map from {m} parameters must have {} components, got {}",
                m + 1,
                map.len()
            )));
        }
        if side != 1 && side != -1 {
            return Err(Error::invalid("side must be +1 or -1"));
        }
        if let Some(e) = map.iter().find(|e| e.dim() > m) {
            return Err(Error::invalid(format!("map component {e} uses more than {m} parameters")));
        }
        let map = map.into_iter().map(|e| e.with_dim(m)).collect();
        Ok(HypersurfaceEmbedding { params, map, side })
    }

    pub fn from_strings(params: ChartBox, map: &[&str], side: i8) -> Result<Self> {
        let m = params.dim();
        let map = map.iter().map(|s| Expression::parse(s, m)).collect::<Result<Vec<_>, _>>()?;
        Self::new(params, map, side)
    }

    pub fn params(&self) -> &ChartBox {
        &self.params
    }

    pub fn map(&self) -> &[Expression] {
        &self.map
    }

    pub fn side(&self) -> i8 {
        self.side
    }

    pub fn with_side(&self, side: i8) -> Result<Self> {
        Self::new(self.params.clone(), self.map.clone(), side)
    }

    pub fn ambient_dim(&self) -> usize {
        self.map.len()
    }

    pub fn point(&self, y: &[f64]) -> Result<Vec<f64>> {
        Ok(self.map.iter().map(|e| e.eval(y)).collect::<Result<Vec<_>, _>>()?)
    }

    /// Jets of order 2 of every map component.
    fn jets(&self, y: &[f64], order: usize) -> Result<Vec<Jet>> {
        Ok(self.map.iter().map(|e| e.eval_jet(y, order)).collect::<Result<Vec<_>, _>>()?)
    }

    /// Tangent vectors, second derivatives and the unit normal at `y`.
    pub(crate) fn frame<M: MetricField + ?Sized>(&self, g: &M, y: &[f64]) -> Result<SurfaceFrame> {
        let n = self.ambient_dim();
        let m = n - 1;
        if g.dim() != n {
            return Err(Error::invalid(format!("embedding lands in dimension {n}, metric has {}", g.dim())));
        }
        let f = self.jets(y, 2)?;
        let x: Vec<f64> = f.iter().map(Jet::value).collect();
        let tangents: Vec<Vec<f64>> =
            (0..m).map(|i| f.iter().map(|c| c.partial(&[i]).unwrap_or(0.0)).collect()).collect();
        let second: Vec<Vec<f64>> = (0..m * m)
            .map(|ij| f.iter().map(|c| c.partial(&[ij / m, ij % m]).unwrap_or(0.0)).collect())
            .collect();
        let geo = LocalGeometry::new(g, &x, 1)?;
        let gv: Vec<f64> = geo.g.iter().map(Jet::value).collect();
        let ginv: Vec<f64> = geo.ginv.iter().map(Jet::value).collect();
        let gamma: Vec<f64> = geo.gamma.iter().map(Jet::value).collect();

        // covector annihilating every tangent: n_k = (-1)^k det(T without component k)
        let covector: Vec<f64> = (0..n)
            .map(|k| {
                let minor = DMatrix::from_fn(m, m, |r, i| tangents[i][if r < k { r } else { r + 1 }]);
                let det = if m == 0 { 1.0 } else { minor.determinant() };
                if k % 2 == 0 {
                    det
                } else {
                    -det
                }
            })
            .collect();
        let raised: Vec<f64> = (0..n).map(|k| (0..n).map(|l| ginv[k * n + l] * covector[l]).sum()).collect();
        let len2: f64 = raised.iter().zip(&covector).map(|(a, b)| a * b).sum();
        let induced = gram(&tangents, &gv, n);
        let scale = induced.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1e-300);
        if !(len2 > 1e-24 * scale.powi(m as i32)) {
            return Err(Error::Invalid(format!("embedding differential is rank-deficient at {y:?}")));
        }
        let normal: Vec<f64> = raised.iter().map(|v| self.side as f64 * v / len2.sqrt()).collect();
        Ok(SurfaceFrame { x, tangents, second, metric: gv, gamma, normal, induced })
    }

    /// Rank and normal orthonormality at `samples` Halton parameter points.
    pub fn validate<M: MetricField + ?Sized>(&self, g: &M, samples: usize) -> Result<()> {
        for y in self.params.halton_points(samples)? {
            let fr = self.frame(g, &y)?;
            let n = fr.x.len();
            let nn = inner(&fr.normal, &fr.normal, &fr.metric, n);
            if (nn - 1.0).abs() > 1e-9 {
                return Err(Error::numerical(format!("normal has length² {nn} at {y:?}")));
            }
            for t in &fr.tangents {
                let d = inner(&fr.normal, t, &fr.metric, n);
                if d.abs() > 1e-9 * (1.0 + inner(t, t, &fr.metric, n).sqrt()) {
                    return Err(Error::numerical(format!("normal not orthogonal to the tangent space at {y:?}")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub(crate) struct SurfaceFrame {
    pub x: Vec<f64>,
    pub tangents: Vec<Vec<f64>>,
    /// `∂_i ∂_j F`, indexed `i * m + j`.
    pub second: Vec<Vec<f64>>,
    pub metric: Vec<f64>,
    pub gamma: Vec<f64>,
    pub normal: Vec<f64>,
    pub induced: Vec<f64>,
}

impl SurfaceFrame {
    /// `∇_{∂i} ∂j F = ∂i∂jF + Γ(∂iF, ∂jF)`.
    pub fn covariant_second(&self, i: usize, j: usize) -> Vec<f64> {
        let n = self.x.len();
        let m = n - 1;
        let (ti, tj) = (&self.tangents[i], &self.tangents[j]);
        (0..n)
            .map(|k| {
                let mut v = self.second[i * m + j][k];
                for a in 0..n {
                    for b in 0..n {
                        v += self.gamma[(k * n + a) * n + b] * ti[a] * tj[b];
                    }
                }
                v
            })
            .collect()
    }

    pub fn sff(&self) -> Vec<f64> {
        let n = self.x.len();
        let m = n - 1;
        let mut h = vec![0.0; m * m];
        for i in 0..m {
            for j in i..m {
                let v = inner(&self.covariant_second(i, j), &self.normal, &self.metric, n);
                h[i * m + j] = v;
                h[j * m + i] = v;
            }
        }
        h
    }
}

pub(crate) fn inner(a: &[f64], b: &[f64], g: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += g[i * n + j] * a[i] * b[j];
        }
    }
    s
}

fn gram(t: &[Vec<f64>], g: &[f64], n: usize) -> Vec<f64> {
    let m = t.len();
    let mut out = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            out[i * m + j] = inner(&t[i], &t[j], g, n);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondFundamentalForm {
    /// Parameter point `y`.
    pub parameter: Vec<f64>,
    /// `F(y)`.
    pub point: Vec<f64>,
    /// Unit normal `ν` at `F(y)`.
    pub normal: Vec<f64>,
    /// `ĝ_ij`, row-major.
    pub induced_metric: Vec<f64>,
    /// `h_ij`, row-major.
    pub h: Vec<f64>,
    /// `ĝ^{-1} h`, row-major.
    pub shape_operator: Vec<f64>,
    /// Shape-operator eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
}

impl SecondFundamentalForm {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    fn from_parts(parameter: Vec<f64>, point: Vec<f64>, normal: Vec<f64>, induced: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        let m = parameter.len();
        let (shape_operator, eigenvalues) = shape_operator(&induced, &h, m)
            .ok_or_else(|| Error::SingularMetric { point: point.clone(), reason: "induced metric is singular".into() })?;
        Ok(SecondFundamentalForm { parameter, point, normal, induced_metric: induced, h, shape_operator, eigenvalues })
    }
}

/// `ĝ^{-1} h` and its eigenvalues (descending), through the Cholesky factor of `ĝ`.
fn shape_operator(induced: &[f64], h: &[f64], m: usize) -> Option<(Vec<f64>, Vec<f64>)> {
    let gi = DMatrix::from_row_slice(m, m, induced);
    let hm = DMatrix::from_row_slice(m, m, h);
    let chol = gi.clone().cholesky()?;
    let l = chol.l();
    let linv = l.clone().try_inverse()?;
    let sym = &linv * &hm * linv.transpose();
    let sym = (&sym + sym.transpose()) * 0.5;
    let mut eig: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    let s = chol.inverse() * hm;
    Some((s.transpose().iter().copied().collect(), eig))
}

/// `h_ij = g(∇_{∂i}∂jF, ν)` at parameter point `y`.
pub fn second_fundamental_form<M: MetricField + ?Sized>(
    emb: &HypersurfaceEmbedding,
    g: &M,
    y: &[f64],
) -> Result<SecondFundamentalForm> {
    let fr = emb.frame(g, y)?;
    let h = fr.sff();
    SecondFundamentalForm::from_parts(y.to_vec(), fr.x, fr.normal, fr.induced, h)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UmbilicReport {
    pub umbilic: bool,
    /// `tr(ĝ^{-1}h)/(n-1)`.
    pub lambda: f64,
    /// Cluster sizes of the eigenvalues, in descending eigenvalue order.
    pub pattern: Vec<usize>,
    /// `|h - λĝ|`, measured with `ĝ`.
    pub deviation: f64,
    pub tolerance: f64,
}

/// Sizes of clusters of a descending list, splitting where neighbours differ
/// by more than `rel_tol · max(1, max|e|)`.
pub fn multiplicity_pattern(eigenvalues: &[f64], rel_tol: f64) -> Vec<usize> {
    if eigenvalues.is_empty() {
        return Vec::new();
    }
    let scale = eigenvalues.iter().fold(1.0f64, |s, e| s.max(e.abs()));
    let mut pattern = vec![1];
    for w in eigenvalues.windows(2) {
        if (w[0] - w[1]).abs() > rel_tol * scale {
            pattern.push(1);
        } else {
            *pattern.last_mut().unwrap() += 1;
        }
    }
    pattern
}

pub fn umbilicity_report(sff: &SecondFundamentalForm, tol: f64) -> UmbilicReport {
    let m = sff.dim();
    let lambda = sff.eigenvalues.iter().sum::<f64>() / m as f64;
    let deviation = sff.eigenvalues.iter().map(|k| (k - lambda).powi(2)).sum::<f64>().sqrt();
    UmbilicReport {
        umbilic: deviation <= tol,
        lambda,
        pattern: multiplicity_pattern(&sff.eigenvalues, 1e-5),
        deviation,
        tolerance: tol,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UmbilicScan {
    pub umbilic: bool,
    pub max_deviation: f64,
    /// `(y, λ(y))` on the sample points.
    pub lambda: Vec<(Vec<f64>, f64)>,
    pub patterns: Vec<Vec<usize>>,
}

/// Umbilicity over `samples` Halton parameter points.
pub fn umbilicity_scan<M: MetricField + ?Sized>(
    emb: &HypersurfaceEmbedding,
    g: &M,
    samples: usize,
    tol: f64,
    exec: Execution,
) -> Result<UmbilicScan> {
    let pts = emb.params().halton_points(samples)?;
    let reports = exec.try_map(&pts, |y| -> Result<UmbilicReport> {
        Ok(umbilicity_report(&second_fundamental_form(emb, g, y)?, tol))
    })?;
    let max_deviation = reports.iter().fold(0.0f64, |m, r| m.max(r.deviation));
    Ok(UmbilicScan {
        umbilic: reports.iter().all(|r| r.umbilic),
        max_deviation,
        lambda: pts.into_iter().zip(&reports).map(|(y, r)| (y, r.lambda)).collect(),
        patterns: reports.into_iter().map(|r| r.pattern).collect(),
    })
}

/// The second fundamental form of the same hypersurface for `e^{2φ}g`, from
/// `h̄ = e^φ (h - (∂_ν φ) ĝ)` with respect to the unit normal `e^{-φ}ν`.
pub fn conformal_sff_transform<S: ScalarField + ?Sized>(sff: &SecondFundamentalForm, phi: &S) -> Result<SecondFundamentalForm> {
    let jet = phi.jet(&sff.point, 1)?;
    let dphi = jet.gradient();
    let dnu: f64 = dphi.iter().zip(&sff.normal).map(|(a, b)| a * b).sum();
    let e = jet.value().exp();
    let h: Vec<f64> = sff.h.iter().zip(&sff.induced_metric).map(|(h, gh)| e * (h - dnu * gh)).collect();
    let induced: Vec<f64> = sff.induced_metric.iter().map(|v| e * e * v).collect();
    let normal: Vec<f64> = sff.normal.iter().map(|v| v / e).collect();
    SecondFundamentalForm::from_parts(sff.parameter.clone(), sff.point.clone(), normal, induced, h)
}

/// Residual of the vector form of the transformation law on tangent vectors
/// `X = Σ a_i ∂_iF`, `Y = Σ b_i ∂_iF` and an arbitrary vector `v`:
/// `g(Ā(X,Y), v) - g(A(X,Y), v) + g(X,Y) g((∇φ)_n, v)`, where `Ā` is built
/// from the Christoffel symbols of `e^{2φ}g` directly.
pub fn normal_scalar_residual<M, S>(
    emb: &HypersurfaceEmbedding,
    g: &M,
    phi: &S,
    y: &[f64],
    a: &[f64],
    b: &[f64],
    v: &[f64],
) -> Result<f64>
where
    M: MetricField + ?Sized,
    S: ScalarField + ?Sized,
{
    let gbar = crate::curvature::Rescaled { metric: g, phi };
    let fr = emb.frame(g, y)?;
    let frb = emb.frame(&gbar, y)?;
    let n = fr.x.len();
    let m = n - 1;
    let combine = |fr: &SurfaceFrame| -> Vec<f64> {
        let mut w = vec![0.0; n];
        for i in 0..m {
            for j in 0..m {
                let c = fr.covariant_second(i, j);
                for k in 0..n {
                    w[k] += a[i] * b[j] * c[k];
                }
            }
        }
        w
    };
    // normal parts, both projected with g along the g-unit normal
    let nu = &fr.normal;
    let proj = |w: &[f64]| -> Vec<f64> {
        let c = inner(w, nu, &fr.metric, n);
        nu.iter().map(|x| c * x).collect()
    };
    let a_vec = proj(&combine(&fr));
    let abar_vec = proj(&combine(&frb));
    let x: Vec<f64> = (0..n).map(|k| (0..m).map(|i| a[i] * fr.tangents[i][k]).sum()).collect();
    let yv: Vec<f64> = (0..n).map(|k| (0..m).map(|i| b[i] * fr.tangents[i][k]).sum()).collect();
    let gxy = inner(&x, &yv, &fr.metric, n);
    let dphi = phi.jet(&fr.x, 1)?.gradient();
    let ginv = invert_jets(&fr.metric.iter().map(|&v| Jet::constant(n, 0, v)).collect::<Vec<_>>(), n)
        .ok_or_else(|| Error::SingularMetric { point: fr.x.clone(), reason: "metric is not invertible".into() })?;
    let grad: Vec<f64> = (0..n).map(|k| (0..n).map(|l| ginv[k * n + l].value() * dphi[l]).sum()).collect();
    let grad_n = proj(&grad);
    let lhs = inner(&abar_vec, v, &fr.metric, n) - inner(&a_vec, v, &fr.metric, n);
    let rhs = -gxy * inner(&grad_n, v, &fr.metric, n);
    Ok((lhs - rhs).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::ChartMetric;

    fn euclid3() -> ChartMetric {
        ChartMetric::euclidean(ChartBox::cube(3, -3.0, 3.0).unwrap()).unwrap()
    }

    #[test]
    fn plane_is_totally_geodesic() {
        let emb = HypersurfaceEmbedding::from_strings(ChartBox::cube(2, -1.0, 1.0).unwrap(), &["x1", "x2", "0"], 1)
            .unwrap();
        let s = second_fundamental_form(&emb, &euclid3(), &[0.3, -0.2]).unwrap();
        assert!(s.h.iter().all(|v| v.abs() < 1e-15));
        assert!((s.normal[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn round_sphere_inward() {
        for r in [1.0, 2.0] {
            let emb = HypersurfaceEmbedding::from_strings(
                ChartBox::new(vec![(0.3, 2.8), (0.0, 6.0)]).unwrap(),
                &[&format!("{r}*sin(x1)*cos(x2)"), &format!("{r}*sin(x1)*sin(x2)"), &format!("{r}*cos(x1)")],
                -1,
            )
            .unwrap();
            let s = second_fundamental_form(&emb, &euclid3(), &[1.1, 0.7]).unwrap();
            for e in &s.eigenvalues {
                assert!((e - 1.0 / r).abs() < 1e-12);
            }
            let u = umbilicity_report(&s, 1e-8);
            assert!(u.umbilic && (u.lambda - 1.0 / r).abs() < 1e-12 && u.pattern == vec![2]);
        }
    }

    #[test]
    fn cylinder_patterns() {
        let params = ChartBox::new(vec![(0.0, 6.0), (-1.0, 1.0)]).unwrap();
        let out = HypersurfaceEmbedding::from_strings(params, &["cos(x1)", "sin(x1)", "x2"], 1).unwrap();
        let s = second_fundamental_form(&out, &euclid3(), &[0.4, 0.1]).unwrap();
        assert!((s.eigenvalues[0]).abs() < 1e-14 && (s.eigenvalues[1] + 1.0).abs() < 1e-14);
        let s = second_fundamental_form(&out.with_side(-1).unwrap(), &euclid3(), &[0.4, 0.1]).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-14 && s.eigenvalues[1].abs() < 1e-14);
        let u = umbilicity_report(&s, 1e-8);
        assert!(!u.umbilic);
        assert_eq!(u.pattern, vec![1, 1]);
    }

    #[test]
    fn rank_deficient_map_is_rejected() {
        let emb = HypersurfaceEmbedding::from_strings(ChartBox::cube(2, -1.0, 1.0).unwrap(), &["x1", "x1", "0"], 1)
            .unwrap();
        assert!(second_fundamental_form(&emb, &euclid3(), &[0.3, 0.2]).is_err());
    }

    #[test]
    fn patterns() {
        assert_eq!(multiplicity_pattern(&[2.0, 2.0, 1.0], 1e-5), vec![2, 1]);
        assert_eq!(multiplicity_pattern(&[1.0, 1.0 - 1e-7], 1e-5), vec![2]);
    }
}
