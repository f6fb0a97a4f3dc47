use crate::curvature::{LocalGeometry, MetricField};
use crate::error::{Error, Result};
use crate::expr::Jet;

use super::forms::{Form, JetForm};

/// Orthonormal frame at a point, as jets: `e_a = E^k_a ∂_k`, `θ^a = Θ^a_k dx^k`.
#[derive(Debug, Clone)]
pub struct FrameField {
    pub n: usize,
    pub point: Vec<f64>,
    /// Coordinate vectors in the order they were orthonormalized.
    pub ordering: Vec<usize>,
    /// `E^k_a` at `k*n + a`.
    pub vectors: Vec<Jet>,
    /// `Θ^a_k` at `a*n + k`.
    pub coframe: Vec<Jet>,
}

impl FrameField {
    /// Gram–Schmidt on `∂_{ordering[0]}, ∂_{ordering[1]}, …` with respect to `g`.
    pub fn gram_schmidt(g: &[Jet], point: &[f64], ordering: &[usize]) -> Result<Self> {
        let n = point.len();
        let mut sorted = ordering.to_vec();
        sorted.sort_unstable();
        if sorted != (0..n).collect::<Vec<_>>() {
            return Err(Error::invalid(format!("{ordering:?} is not an ordering of the coordinates")));
        }
        let (nv, order) = (g[0].nvars(), g[0].order());
        let zero = Jet::constant(nv, order, 0.0);
        let inner = |u: &[Jet], v: &[Jet]| -> Jet {
            let mut s = zero.clone();
            for i in 0..n {
                for j in 0..n {
                    s = &s + &(&(&u[i] * &v[j]) * &g[i * n + j]);
                }
            }
            s
        };
        let scale = (0..n).fold(0.0f64, |m, i| m.max(g[i * n + i].value().abs()));
        let mut frame: Vec<Vec<Jet>> = Vec::with_capacity(n);
        for &k in ordering {
            let mut v: Vec<Jet> = (0..n).map(|i| Jet::constant(nv, order, if i == k { 1.0 } else { 0.0 })).collect();
            for e in &frame {
                let c = inner(&v, e);
                for i in 0..n {
                    v[i] = &v[i] - &(&c * &e[i]);
                }
            }
            let norm2 = inner(&v, &v);
            if !(norm2.value() > 1e-13 * scale.max(1e-300)) {
                return Err(Error::SingularMetric {
                    point: point.to_vec(),
                    reason: format!("Gram-Schmidt breaks down at coordinate vector {}", k + 1),
                });
            }
            let inv = norm2.sqrt()?.recip()?;
            frame.push(v.iter().map(|c| c * &inv).collect());
        }
        let mut vectors = vec![zero.clone(); n * n];
        for (a, e) in frame.iter().enumerate() {
            for k in 0..n {
                vectors[k * n + a] = e[k].clone();
            }
        }
        // θ^a = g(e_a, ·)
        let mut coframe = vec![zero; n * n];
        for a in 0..n {
            for k in 0..n {
                let mut s = Jet::constant(nv, order, 0.0);
                for l in 0..n {
                    s = &s + &(&frame[a][l] * &g[l * n + k]);
                }
                coframe[a * n + k] = s;
            }
        }
        Ok(FrameField { n, point: point.to_vec(), ordering: ordering.to_vec(), vectors, coframe })
    }

    pub fn vector(&self, k: usize, a: usize) -> &Jet {
        &self.vectors[k * self.n + a]
    }

    pub fn covector(&self, a: usize, k: usize) -> &Jet {
        &self.coframe[a * self.n + k]
    }

    /// `max |g(e_a, e_b) - δ_ab|`.
    pub fn orthonormality_defect(&self, g: &[f64]) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        s += self.vector(i, a).value() * self.vector(j, b).value() * g[i * n + j];
                    }
                }
                worst = worst.max((s - if a == b { 1.0 } else { 0.0 }).abs());
            }
        }
        worst
    }
}

/// Matrix of 1-forms `ω^a_b` with `∇ e_b = e_a ⊗ ω^a_b`, stored at `a*n + b`.
#[derive(Debug, Clone)]
pub struct ConnectionForms {
    pub n: usize,
    pub forms: Vec<JetForm>,
}

/// Matrix of 2-forms `Ω^a_b`, stored at `a*n + b`.
#[derive(Debug, Clone)]
pub struct CurvatureForms {
    pub n: usize,
    pub forms: Vec<JetForm>,
}

impl ConnectionForms {
    /// Connection forms of the Levi-Civita connection of `geom` in `frame`.
    /// The frame need not be orthonormal for this metric, which is how a
    /// comparison connection is written in a common frame.
    pub fn new(frame: &FrameField, geom: &LocalGeometry) -> Self {
        let n = frame.n;
        let nv = frame.vectors[0].nvars();
        let order = geom.gamma[0].order().min(frame.vectors[0].order().saturating_sub(1));
        let mut forms = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let mut form = JetForm::zero_jet(n, 1, nv, order);
                for i in 0..n {
                    let mut s = Jet::constant(nv, order, 0.0);
                    for k in 0..n {
                        // ∇_i e_b has ∂_k component ∂_i E^k_b + Γ^k_il E^l_b
                        let mut comp = frame.vector(k, b).d(i).truncate(order);
                        for l in 0..n {
                            comp = &comp + &(geom.gamma(k, i, l) * frame.vector(l, b));
                        }
                        s = &s + &(frame.covector(a, k) * &comp);
                    }
                    form.comps[i] = s.truncate(order);
                }
                forms.push(form);
            }
        }
        ConnectionForms { n, forms }
    }

    pub fn get(&self, a: usize, b: usize) -> &JetForm {
        &self.forms[a * self.n + b]
    }

    pub fn add(&self, o: &Self) -> Self {
        ConnectionForms { n: self.n, forms: self.forms.iter().zip(&o.forms).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        ConnectionForms { n: self.n, forms: self.forms.iter().zip(&o.forms).map(|(a, b)| a.sub(b)).collect() }
    }

    pub fn scale(&self, c: f64) -> Self {
        ConnectionForms { n: self.n, forms: self.forms.iter().map(|a| a.scale(c)).collect() }
    }

    /// `Ω = dω + ω∧ω`.
    pub fn curvature(&self) -> CurvatureForms {
        let n = self.n;
        let mut forms = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let mut f = self.get(a, b).d();
                for c in 0..n {
                    f = f.add(&self.get(a, c).wedge(self.get(c, b)).truncate(f.order()));
                }
                forms.push(f);
            }
        }
        CurvatureForms { n, forms }
    }

    /// `max |ω_ab + ω_ba|` over components.
    pub fn antisymmetry_defect(&self) -> f64 {
        matrix_antisymmetry(self.n, &self.forms)
    }

    pub fn values(&self) -> Vec<Form<f64>> {
        self.forms.iter().map(JetForm::values).collect()
    }
}

fn matrix_antisymmetry(n: usize, forms: &[JetForm]) -> f64 {
    let mut worst = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            let s = forms[a * n + b].values();
            let t = forms[b * n + a].values();
            for (x, y) in s.comps.iter().zip(&t.comps) {
                worst = worst.max((x + y).abs());
            }
        }
    }
    worst
}

impl CurvatureForms {
    /// `Ω^a_b = Θ^a_k R^k_{l ij} E^l_b dx^i ∧ dx^j` (sum over `i < j`), from the Riemann tensor.
    pub fn from_riemann(frame: &FrameField, geom: &LocalGeometry) -> Self {
        let n = frame.n;
        let up = geom.riemann_up();
        let nv = up[0].nvars();
        let order = up[0].order();
        let mut forms = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let mut form = JetForm::zero_jet(n, 2, nv, order);
                for (slot, ij) in super::forms::combinations(n, 2).iter().enumerate() {
                    let (i, j) = (ij[0], ij[1]);
                    let mut s = Jet::constant(nv, order, 0.0);
                    for k in 0..n {
                        let mut inner = Jet::constant(nv, order, 0.0);
                        for l in 0..n {
                            inner = &inner + &(&up[((k * n + l) * n + i) * n + j] * frame.vector(l, b));
                        }
                        s = &s + &(frame.covector(a, k) * &inner);
                    }
                    form.comps[slot] = s.truncate(order);
                }
                forms.push(form);
            }
        }
        CurvatureForms { n, forms }
    }

    pub fn get(&self, a: usize, b: usize) -> &JetForm {
        &self.forms[a * self.n + b]
    }

    pub fn antisymmetry_defect(&self) -> f64 {
        matrix_antisymmetry(self.n, &self.forms)
    }

    /// `max |Ω - Ω'|` over entries and components.
    pub fn distance(&self, o: &Self) -> f64 {
        self.forms.iter().zip(&o.forms).fold(0.0f64, |m, (a, b)| m.max(a.values().sub(&b.values()).max_abs()))
    }

    pub fn values(&self) -> Vec<Form<f64>> {
        self.forms.iter().map(JetForm::values).collect()
    }

    /// `tr(Ω ∧ Ω') = Σ Ω^a_b ∧ Ω'^b_a`.
    pub fn trace_wedge(&self, o: &Self) -> JetForm {
        trace_wedge(self.n, &self.forms, &o.forms)
    }
}

pub(crate) fn trace_wedge(n: usize, a: &[JetForm], b: &[JetForm]) -> JetForm {
    let mut acc: Option<JetForm> = None;
    for i in 0..n {
        for j in 0..n {
            let w = a[i * n + j].wedge(&b[j * n + i]);
            acc = Some(match acc {
                None => w,
                Some(s) => s.add(&w),
            });
        }
    }
    acc.expect("n >= 1")
}

/// Frame, connection and curvature at one point, with the structure-equation residual.
#[derive(Debug, Clone)]
pub struct CartanData {
    pub frame: FrameField,
    pub connection: ConnectionForms,
    /// Curvature assembled from the Riemann tensor.
    pub curvature: CurvatureForms,
    /// `max ‖dω + ω∧ω − Ω‖` over entries and components.
    pub structure_residual: f64,
    pub orthonormality_defect: f64,
}

/// Frame, connection and curvature forms of `g` at `p`. Metric jets of
/// `order ≥ 2` are required; the curvature carries `order − 2` derivatives.
pub fn connection_and_curvature<M: MetricField + ?Sized>(
    g: &M,
    p: &[f64],
    order: usize,
    ordering: &[usize],
) -> Result<CartanData> {
    if order < 2 {
        return Err(Error::invalid("connection and curvature forms need metric jets of order >= 2"));
    }
    let geom = LocalGeometry::new(g, p, order)?;
    let frame = FrameField::gram_schmidt(&geom.g, p, ordering)?;
    let connection = ConnectionForms::new(&frame, &geom);
    let curvature = CurvatureForms::from_riemann(&frame, &geom);
    let structure_residual = connection.curvature().distance(&curvature);
    let gv: Vec<f64> = geom.g.iter().map(Jet::value).collect();
    let orthonormality_defect = frame.orthonormality_defect(&gv);
    Ok(CartanData { frame, connection, curvature, structure_residual, orthonormality_defect })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::ChartBox;
    use crate::curvature::ChartMetric;

    #[test]
    fn euclidean_forms_vanish() {
        let g = ChartMetric::euclidean(ChartBox::cube(3, -1.0, 1.0).unwrap()).unwrap();
        let c = connection_and_curvature(&g, &[0.1, 0.2, 0.3], 2, &[0, 1, 2]).unwrap();
        assert!(c.connection.values().iter().all(|f| f.max_abs() == 0.0));
        assert!(c.curvature.values().iter().all(|f| f.max_abs() == 0.0));
    }

    #[test]
    fn polar_plane_connection() {
        // dr² + r² dθ²: e_1 = ∂_r, e_2 = ∂_θ / r, ω^1_2 = -dθ
        let g = ChartMetric::diagonal(ChartBox::new(vec![(0.5, 2.0), (0.0, 6.0)]).unwrap(), &["1", "x1^2"]).unwrap();
        let c = connection_and_curvature(&g, &[1.3, 0.4], 2, &[0, 1]).unwrap();
        let w = c.connection.get(0, 1).values();
        assert!(w.comps[0].abs() < 1e-14);
        assert!((w.comps[1] + 1.0).abs() < 1e-14);
        assert!(c.structure_residual < 1e-13);
        assert!(c.curvature.values().iter().all(|f| f.max_abs() < 1e-13));
    }

    #[test]
    fn breakdown_is_reported() {
        let g = ChartMetric::diagonal(ChartBox::new(vec![(-1.0, 1.0), (-1.0, 1.0)]).unwrap(), &["1", "x1^2"]).unwrap();
        assert!(matches!(
            connection_and_curvature(&g, &[0.0, 0.2], 2, &[0, 1]),
            Err(Error::SingularMetric { .. })
        ));
    }
}
