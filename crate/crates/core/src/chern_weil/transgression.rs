use serde::{Deserialize, Serialize};

use super::cartan::{ConnectionForms, FrameField};
use super::forms::{Form, FormField, JetForm};
use super::pontryagin::{integrate_l_form, l_polarized};
use crate::chart::ChartBox;
use crate::curvature::{ChartMetric, LocalGeometry, MetricField};
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::par::Execution;
use crate::quadrature::{gauss_legendre, integrate, Estimate};

/// Gauss order of the `t`-integral.
pub const DEFAULT_T_ORDER: usize = 8;

/// The pieces of `Ω_t = Ω₀ + t D₀θ + t² θ∧θ` for `ω_t = ω₀ + tθ`.
struct Family {
    n: usize,
    theta: Vec<JetForm>,
    omega0: Vec<JetForm>,
    linear: Vec<JetForm>,
    quadratic: Vec<JetForm>,
}

impl Family {
    fn new(w: &ConnectionForms, w0: &ConnectionForms) -> Self {
        let n = w.n;
        let theta = w.sub(w0);
        let curv0 = w0.curvature();
        let mut linear = Vec::with_capacity(n * n);
        let mut quadratic = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let mut lin = theta.get(a, b).d();
                let order = lin.order();
                let mut quad = JetForm::zero_jet(n, 2, lin.comps[0].nvars(), order);
                for c in 0..n {
                    lin = lin
                        .add(&w0.get(a, c).wedge(theta.get(c, b)).truncate(order))
                        .add(&theta.get(a, c).wedge(w0.get(c, b)).truncate(order));
                    quad = quad.add(&theta.get(a, c).wedge(theta.get(c, b)).truncate(order));
                }
                linear.push(lin);
                quadratic.push(quad);
            }
        }
        Family { n, theta: theta.forms, omega0: curv0.forms, linear, quadratic }
    }

    fn at(&self, t: f64) -> Vec<JetForm> {
        (0..self.n * self.n)
            .map(|k| self.omega0[k].add(&self.linear[k].scale(t)).add(&self.quadratic[k].scale(t * t)))
            .collect()
    }
}

/// The transgression at one point.
#[derive(Debug, Clone)]
pub struct TransgressionPoint {
    pub point: Vec<f64>,
    /// `Q = 2 ∫₀¹ L₁(θ, Ω_t) dt`, a 3-form.
    pub q: JetForm,
    pub l1: JetForm,
    pub l1_reference: JetForm,
    /// `θ = ω − ω₀` in the orthonormal frame of the first metric.
    pub theta: Vec<Form<f64>>,
}

impl TransgressionPoint {
    /// `max |dQ − (L₁(Ω) − L₁(Ω₀))|`; needs `Q` with first derivatives.
    pub fn identity_residual(&self) -> f64 {
        let dq = self.q.d().values();
        let diff = self.l1.sub(&self.l1_reference).values();
        dq.sub(&diff).max_abs()
    }
}

/// Transgression of `L₁` between the Levi-Civita connections of `h` and `h0`,
/// both written in the `h`-orthonormal frame. `order` is the metric jet
/// order: 2 gives values of `Q`, 3 also gives `dQ`.
pub fn transgression<M, M0>(h: &M, h0: &M0, p: &[f64], order: usize, t_order: usize) -> Result<TransgressionPoint>
where
    M: MetricField + ?Sized,
    M0: MetricField + ?Sized,
{
    let n = h.dim();
    if h0.dim() != n {
        return Err(Error::invalid("connections live on charts of different dimension"));
    }
    if !(4..=5).contains(&n) {
        return Err(Error::invalid(format!("the L1 transgression is implemented for dimensions 4 and 5, got {n}")));
    }
    if order < 2 {
        return Err(Error::invalid("the transgression needs metric jets of order >= 2"));
    }
    let geom = LocalGeometry::new(h, p, order)?;
    let geom0 = LocalGeometry::new(h0, p, order)?;
    let ordering: Vec<usize> = (0..n).collect();
    let frame = FrameField::gram_schmidt(&geom.g, p, &ordering)?;
    let w = ConnectionForms::new(&frame, &geom);
    let w0 = ConnectionForms::new(&frame, &geom0);
    let fam = Family::new(&w, &w0);
    let (nodes, weights) = gauss_legendre(t_order.max(1));
    let mut q: Option<JetForm> = None;
    for (x, wt) in nodes.iter().zip(&weights) {
        let t = 0.5 * (x + 1.0);
        let term = l_polarized(n, &fam.theta, &fam.at(t)).scale(2.0 * 0.5 * wt);
        q = Some(match q {
            None => term,
            Some(acc) => acc.add(&term),
        });
    }
    let om1 = fam.at(1.0);
    let om0 = fam.at(0.0);
    Ok(TransgressionPoint {
        point: p.to_vec(),
        q: q.expect("at least one node"),
        l1: l_polarized(n, &om1, &om1),
        l1_reference: l_polarized(n, &om0, &om0),
        theta: fam.theta.iter().map(JetForm::values).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransgressionReport {
    pub max_residual: f64,
    pub max_q: f64,
    pub samples: usize,
    pub tolerance: f64,
    pub pass: bool,
}

/// Checks `dQ = L₁(Ω) − L₁(Ω₀)` at Halton points of `chart`; also returns
/// `Q` sampled for export.
pub fn transgression_check<M, M0>(
    h: &M,
    h0: &M0,
    chart: &ChartBox,
    samples: usize,
    tolerance: f64,
    exec: Execution,
) -> Result<(TransgressionReport, FormField)>
where
    M: MetricField + ?Sized,
    M0: MetricField + ?Sized,
{
    let pts = chart.halton_points(samples)?;
    let rows = exec.try_map(&pts, |p| {
        let tp = transgression(h, h0, p, 3, DEFAULT_T_ORDER)?;
        Ok::<_, Error>((tp.identity_residual(), tp.q.values()))
    })?;
    let mut field = FormField::new(h.dim(), 3);
    for (p, (_, q)) in pts.iter().zip(&rows) {
        field.push(p.clone(), q);
    }
    let max_residual = rows.iter().fold(0.0f64, |m, r| m.max(r.0));
    Ok((
        TransgressionReport {
            max_residual,
            max_q: rows.iter().fold(0.0f64, |m, r| m.max(r.1.max_abs())),
            samples: pts.len(),
            tolerance,
            pass: max_residual <= tolerance,
        },
        field,
    ))
}

/// A collar `dx² + g_ij(x, y) dy^i dy^j` on `[x0, x1] × Y`, with expression
/// components in the variables `(x, y1, …)`.
#[derive(Debug, Clone)]
pub struct AnalyticCollar {
    x_range: (f64, f64),
    slice_chart: ChartBox,
    slice: Vec<Expression>,
    metric: ChartMetric,
    product: ChartMetric,
}

impl AnalyticCollar {
    /// `slice` holds the row-major `(n−1)²` components of `g(x)`.
    pub fn new(x_range: (f64, f64), slice_chart: ChartBox, slice: Vec<Expression>) -> Result<Self> {
        let m = slice_chart.dim();
        let n = m + 1;
        if slice.len() != m * m {
            return Err(Error::invalid(format!("collar slice metric needs {} components", m * m)));
        }
        let slice: Vec<Expression> = slice.iter().map(|e| e.with_dim(n)).collect();
        let mut intervals = vec![x_range];
        intervals.extend_from_slice(slice_chart.intervals());
        let chart = ChartBox::new(intervals)?;
        let build = |comp: &dyn Fn(usize, usize) -> Expression| -> Result<ChartMetric> {
            let rows = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| match (i, j) {
                            (0, 0) => Expression::constant(n, 1.0),
                            (0, _) | (_, 0) => Expression::constant(n, 0.0),
                            _ => comp(i - 1, j - 1),
                        })
                        .collect()
                })
                .collect();
            ChartMetric::new(chart.clone(), rows, 1)
        };
        let metric = build(&|i, j| slice[i * m + j].clone())?;
        let zero = Expression::constant(n, 0.0);
        let product = build(&|i, j| slice[i * m + j].substitute(0, &zero))?;
        Ok(AnalyticCollar { x_range, slice_chart, slice, metric, product })
    }

    /// Parses components written in `x1 = x`, `x2 = y1`, ….
    pub fn parse(x_range: (f64, f64), slice_chart: ChartBox, slice: &[&str]) -> Result<Self> {
        let n = slice_chart.dim() + 1;
        let exprs = slice.iter().map(|s| Expression::parse(s, n)).collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(x_range, slice_chart, exprs)
    }

    pub fn metric(&self) -> &ChartMetric {
        &self.metric
    }

    /// The product metric `dx² + g(0)`.
    pub fn product_metric(&self) -> &ChartMetric {
        &self.product
    }

    pub fn slice_chart(&self) -> &ChartBox {
        &self.slice_chart
    }

    pub fn x_range(&self) -> (f64, f64) {
        self.x_range
    }

    /// `S_ij = −½ ∂_x g_ij` at `x = 0`, the second fundamental form of `{x = 0}`.
    pub fn second_fundamental_form(&self, y: &[f64]) -> Result<Vec<f64>> {
        let mut p = vec![0.0];
        p.extend_from_slice(y);
        self.slice
            .iter()
            .map(|e| Ok(-0.5 * e.eval_jet(&p, 1)?.gradient()[0]))
            .collect()
    }

    pub fn max_second_fundamental_form(&self, samples: usize) -> Result<f64> {
        let mut worst = 0.0f64;
        for y in self.slice_chart.halton_points(samples)? {
            worst = self.second_fundamental_form(&y)?.iter().fold(worst, |m, v| m.max(v.abs()));
        }
        Ok(worst)
    }
}

/// `∫_{\{x\} × Y} Q` against the product comparison metric, with `∂_x` first
/// in the orientation.
pub fn boundary_transgression_integral(collar: &AnalyticCollar, x: f64, order: usize, exec: Execution) -> Result<Estimate> {
    let m = collar.slice_chart.dim();
    if m != 3 {
        return Err(Error::invalid("boundary transgression integrals are implemented for 3-dimensional slices"));
    }
    let f = |y: &[f64]| -> Result<f64> {
        let mut p = vec![x];
        p.extend_from_slice(y);
        let tp = transgression(&collar.metric, &collar.product, &p, 2, DEFAULT_T_ORDER)?;
        // the dy¹∧dy²∧dy³ component is the last of the sorted 3-index tuples
        Ok(*tp.q.values().comps.last().expect("3-form in dimension 4"))
    };
    integrate(&f, &collar.slice_chart, order, exec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StokesReport {
    pub interior: f64,
    pub q_start: f64,
    pub q_end: f64,
    /// `∫ L₁ + ∫ Q|_{x0} − ∫ Q|_{x1}`.
    pub balance: f64,
    /// Sum of the quadrature error estimates.
    pub quadrature_error: f64,
}

/// `∫_{collar} L₁(Ω) − ∫_{collar} L₁(Ω₀) = ∫ Q|_{x1} − ∫ Q|_{x0}`; the
/// product term vanishes, which leaves the reported balance.
pub fn stokes_balance(collar: &AnalyticCollar, order: usize, boundary_order: usize, exec: Execution) -> Result<StokesReport> {
    let chart = collar.metric.chart().clone();
    let interior = integrate_l_form(&collar.metric, &chart, 1, order, exec)?;
    let (x0, x1) = collar.x_range;
    let a = boundary_transgression_integral(collar, x0, boundary_order, exec)?;
    let b = boundary_transgression_integral(collar, x1, boundary_order, exec)?;
    Ok(StokesReport {
        interior: interior.value,
        q_start: a.value,
        q_end: b.value,
        balance: interior.value + a.value - b.value,
        quadrature_error: interior.error + a.error + b.error,
    })
}

/// `θ = ω − ω₀` at `(0, y)` in the frame `∂_x, e_1, …`.
pub fn theta_matrix(collar: &AnalyticCollar, y: &[f64]) -> Result<Vec<Form<f64>>> {
    let mut p = vec![0.0];
    p.extend_from_slice(y);
    let n = p.len();
    let geom = LocalGeometry::new(&collar.metric, &p, 2)?;
    let geom0 = LocalGeometry::new(&collar.product, &p, 2)?;
    let frame = FrameField::gram_schmidt(&geom.g, &p, &(0..n).collect::<Vec<_>>())?;
    let w = ConnectionForms::new(&frame, &geom);
    let w0 = ConnectionForms::new(&frame, &geom0);
    Ok(w.sub(&w0).values())
}
