use crate::chart::ChartBox;
use crate::error::{Error, Result};
use crate::expr::{Expression, Jet};

/// Anything that can hand out the metric components, with derivatives, at a point.
pub trait MetricField: Sync {
    fn dim(&self) -> usize;

    /// Row-major `n×n` metric components as jets of `order` at `p`.
    fn metric_jets(&self, p: &[f64], order: usize) -> Result<Vec<Jet>>;

    fn metric_values(&self, p: &[f64]) -> Result<Vec<f64>> {
        Ok(self.metric_jets(p, 0)?.iter().map(Jet::value).collect())
    }
}

/// Scalar fields with exact jets (conformal factors, cutoffs, collar functions).
pub trait ScalarField: Sync {
    fn jet(&self, p: &[f64], order: usize) -> Result<Jet>;
}

impl ScalarField for Expression {
    fn jet(&self, p: &[f64], order: usize) -> Result<Jet> {
        Ok(self.eval_jet(p, order)?)
    }
}

/// A Riemannian metric on a box chart, given by expression components.
#[derive(Debug, Clone)]
pub struct ChartMetric {
    chart: ChartBox,
    g: Vec<Expression>,
    orientation: i8,
}

impl ChartMetric {
    /// Builds from a full `n×n` component matrix. Off-diagonal pairs must agree
    /// (structurally, or numerically at sample points).
    pub fn new(chart: ChartBox, g: Vec<Vec<Expression>>, orientation: i8) -> Result<Self> {
        let n = chart.dim();
        if g.len() != n || g.iter().any(|row| row.len() != n) {
            return Err(Error::invalid(format!("metric must be {n}x{n}")));
        }
        if orientation != 1 && orientation != -1 {
            return Err(Error::invalid("orientation must be +1 or -1"));
        }
        let samples = if chart.is_bounded() { chart.halton_points(16)? } else { Vec::new() };
        for i in 0..n {
            for j in 0..n {
                if g[i][j].dim() > n {
                    return Err(Error::invalid(format!("component g{}{} uses too many coordinates", i + 1, j + 1)));
                }
                if i < j && g[i][j] != g[j][i] {
                    for p in &samples {
                        let (a, b) = (g[i][j].with_dim(n).eval(p)?, g[j][i].with_dim(n).eval(p)?);
                        if (a - b).abs() > 1e-12 * (1.0 + a.abs()) {
                            return Err(Error::invalid(format!("metric is not symmetric in ({}, {})", i + 1, j + 1)));
                        }
                    }
                }
            }
        }
        let g = (0..n * n).map(|k| g[k / n][k % n].with_dim(n)).collect();
        Ok(ChartMetric { chart, g, orientation })
    }

    /// Diagonal metric from expression strings.
    pub fn diagonal(chart: ChartBox, diag: &[&str]) -> Result<Self> {
        let n = chart.dim();
        let zero = Expression::constant(n, 0.0);
        let mut g = vec![vec![zero; n]; n];
        for (i, s) in diag.iter().enumerate() {
            g[i][i] = Expression::parse(s, n)?;
        }
        Self::new(chart, g, 1)
    }

    /// Parses a full matrix of expression strings.
    pub fn from_strings(chart: ChartBox, rows: &[Vec<String>], orientation: i8) -> Result<Self> {
        let n = chart.dim();
        let g = rows
            .iter()
            .map(|row| row.iter().map(|s| Expression::parse(s, n)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(chart, g, orientation)
    }

    /// `λ · δ_ij` for a scalar expression `λ`.
    pub fn conformally_euclidean(chart: ChartBox, lambda: &str) -> Result<Self> {
        let n = chart.dim();
        let l = Expression::parse(lambda, n)?;
        let zero = Expression::constant(n, 0.0);
        let g = (0..n)
            .map(|i| (0..n).map(|j| if i == j { l.clone() } else { zero.clone() }).collect())
            .collect();
        Self::new(chart, g, 1)
    }

    pub fn euclidean(chart: ChartBox) -> Result<Self> {
        Self::conformally_euclidean(chart, "1")
    }

    pub fn chart(&self) -> &ChartBox {
        &self.chart
    }

    pub fn orientation(&self) -> i8 {
        self.orientation
    }

    pub fn component(&self, i: usize, j: usize) -> &Expression {
        &self.g[i * self.dim() + j]
    }

    pub fn components(&self) -> &[Expression] {
        &self.g
    }

    pub fn with_chart(&self, chart: ChartBox) -> Result<Self> {
        if chart.dim() != self.dim() {
            return Err(Error::invalid("chart dimension mismatch"));
        }
        Ok(ChartMetric { chart, g: self.g.clone(), orientation: self.orientation })
    }

    /// Replaces every component through `f`.
    pub fn map_components(&self, f: impl Fn(&Expression) -> Expression) -> ChartMetric {
        ChartMetric { chart: self.chart.clone(), g: self.g.iter().map(f).collect(), orientation: self.orientation }
    }

    /// Cholesky at `p`; fails when the metric is not positive-definite there.
    pub fn check_positive_definite(&self, p: &[f64]) -> Result<()> {
        let g = self.metric_values(p)?;
        cholesky(&g, self.dim()).map(|_| ()).ok_or_else(|| Error::SingularMetric {
            point: p.to_vec(),
            reason: "metric is not positive-definite".into(),
        })
    }

    /// Positive-definiteness at `samples` Halton points of the chart, or of
    /// its sampling window when unbounded.
    pub fn validate(&self, samples: usize) -> Result<()> {
        for p in self.chart.sampling_window().halton_points(samples)? {
            self.check_positive_definite(&p)?;
        }
        Ok(())
    }
}

impl MetricField for ChartMetric {
    fn dim(&self) -> usize {
        self.chart.dim()
    }

    fn metric_jets(&self, p: &[f64], order: usize) -> Result<Vec<Jet>> {
        let n = self.dim();
        let seeds = Jet::seed(p, order);
        let template = Jet::constant(n, order, 0.0);
        let mut out: Vec<Jet> = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                if j < i {
                    let mirrored = out[j * n + i].clone();
                    out.push(mirrored);
                } else {
                    out.push(self.g[i * n + j].eval_scalar(&seeds, &template)?);
                }
            }
        }
        Ok(out)
    }
}

/// `e^{2φ} g` for any metric field and scalar field.
pub struct Rescaled<'a, M: ?Sized, S: ?Sized> {
    pub metric: &'a M,
    pub phi: &'a S,
}

impl<M: MetricField + ?Sized, S: ScalarField + ?Sized> MetricField for Rescaled<'_, M, S> {
    fn dim(&self) -> usize {
        self.metric.dim()
    }

    fn metric_jets(&self, p: &[f64], order: usize) -> Result<Vec<Jet>> {
        let factor = self.phi.jet(p, order)?.scale(2.0).exp();
        Ok(self.metric.metric_jets(p, order)?.iter().map(|g| g * &factor).collect())
    }
}

/// Lower-triangular Cholesky factor of a row-major SPD matrix.
pub fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > 0.0) || !s.is_finite() {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Inverse of a matrix of jets by Gauss–Jordan elimination with pivoting on values.
pub fn invert_jets(a: &[Jet], n: usize) -> Option<Vec<Jet>> {
    let nv = a[0].nvars();
    let order = a.iter().map(Jet::order).min().unwrap_or(0);
    let mut m: Vec<Jet> = a.iter().map(|j| j.truncate(order)).collect();
    let mut inv: Vec<Jet> =
        (0..n * n).map(|k| Jet::constant(nv, order, if k / n == k % n { 1.0 } else { 0.0 })).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| {
            m[x * n + col].value().abs().total_cmp(&m[y * n + col].value().abs())
        })?;
        if m[piv * n + col].value().abs() < 1e-300 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap(piv * n + k, col * n + k);
                inv.swap(piv * n + k, col * n + k);
            }
        }
        let r = m[col * n + col].recip().ok()?;
        for k in 0..n {
            m[col * n + k] = &m[col * n + k] * &r;
            inv[col * n + k] = &inv[col * n + k] * &r;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = m[row * n + col].clone();
            if f.coeffs().iter().all(|&c| c == 0.0) {
                continue;
            }
            for k in 0..n {
                let dm = &f * &m[col * n + k];
                m[row * n + k] = &m[row * n + k] - &dm;
                let di = &f * &inv[col * n + k];
                inv[row * n + k] = &inv[row * n + k] - &di;
            }
        }
    }
    Some(inv)
}
