//! Tensor-product Gauss–Legendre quadrature on chart boxes.
//!
//! Every estimate is computed at two orders, `m` and `⌈m/2⌉`; the reported
//! error is their difference. Unbounded boxes are handled by a truncation
//! schedule: the cube radius doubles and each new shell is integrated
//! separately until the estimated remaining tail drops below tolerance.

use serde::{Deserialize, Serialize};

use crate::chart::ChartBox;
use crate::error::{Error, Result};
use crate::par::{pairwise_sum, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Nodes and weights of the `m`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_m
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(m, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Applies the `m`-point tensor rule on the sub-box `intervals`, rejecting
/// nodes that the chart excludes.
fn rule<F>(f: &F, chart: &ChartBox, intervals: &[(f64, f64)], m: usize, exec: Execution) -> Result<(f64, usize)>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let n = intervals.len();
    let (x, w) = gauss_legendre(m);
    let total = m.pow(n as u32);
    let half: Vec<(f64, f64)> = intervals.iter().map(|(a, b)| ((a + b) / 2.0, (b - a) / 2.0)).collect();
    let jac: f64 = half.iter().map(|(_, h)| h).product();
    let values = exec.map_range(total, |mut k| -> Result<f64> {
        let mut p = [0.0; 8];
        let mut weight = jac;
        for d in 0..n {
            let i = k % m;
            k /= m;
            p[d] = half[d].0 + half[d].1 * x[i];
            weight *= w[i];
        }
        let p = &p[..n];
        if chart.is_excluded(p) {
            return Ok(0.0);
        }
        let v = f(p)?;
        if !v.is_finite() {
            return Err(Error::numerical(format!("non-finite sample at {p:?}")));
        }
        Ok(weight * v)
    });
    let values: Vec<f64> = values.into_iter().collect::<Result<_>>()?;
    Ok((pairwise_sum(&values), total))
}

fn estimate_on<F>(f: &F, chart: &ChartBox, intervals: &[(f64, f64)], order: usize, exec: Execution) -> Result<Estimate>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let (hi, n_hi) = rule(f, chart, intervals, order, exec)?;
    let (lo, n_lo) = rule(f, chart, intervals, order.div_ceil(2).max(1), exec)?;
    Ok(Estimate { value: hi, error: (hi - lo).abs(), evaluations: n_hi + n_lo })
}

/// Integrates `f` over a bounded chart box.
pub fn integrate<F>(f: &F, chart: &ChartBox, order: usize, exec: Execution) -> Result<Estimate>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    if !chart.is_bounded() {
        return Err(Error::invalid("unbounded chart: use integrate_improper"));
    }
    estimate_on(f, chart, chart.intervals(), order, exec)
}

/// Like [`integrate`], failing when the error estimate exceeds `tolerance`.
pub fn integrate_to<F>(f: &F, chart: &ChartBox, order: usize, tolerance: f64, exec: Execution) -> Result<Estimate>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let est = integrate(f, chart, order, exec)?;
    if est.error > tolerance {
        return Err(Error::numerical(format!(
            "quadrature error estimate {:.3e} exceeds tolerance {tolerance:.3e} at order {order}",
            est.error
        )));
    }
    Ok(est)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationSchedule {
    pub initial_radius: f64,
    pub max_doublings: usize,
    pub tolerance: f64,
}

impl Default for TruncationSchedule {
    fn default() -> Self {
        TruncationSchedule { initial_radius: 1.0, max_doublings: 12, tolerance: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImproperEstimate {
    pub value: f64,
    /// Quadrature error plus the estimated tail beyond the final radius.
    pub error: f64,
    pub tail_estimate: f64,
    pub radius: f64,
    /// Contribution of each shell, starting with the initial cube.
    pub shells: Vec<f64>,
    pub evaluations: usize,
}

/// Integrates over all of `R^dim` by cube truncation with radius doubling.
pub fn integrate_improper<F>(f: &F, dim: usize, order: usize, schedule: TruncationSchedule, exec: Execution) -> Result<ImproperEstimate>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let r0 = schedule.initial_radius;
    let full = ChartBox::cube(dim, f64::NEG_INFINITY, f64::INFINITY)
        .or_else(|_| ChartBox::cube(dim, -1.0, 1.0))?;
    let base = vec![(-r0, r0); dim];
    let first = estimate_on(f, &full, &base, order, exec)?;
    let mut value = first.value;
    let mut quad_err = first.error;
    let mut evaluations = first.evaluations;
    let mut shells = vec![first.value];
    let mut radius = r0;
    for _ in 0..schedule.max_doublings {
        let outer = 2.0 * radius;
        let mut shell = 0.0;
        // {max|x_i| in (R, 2R]} split by the first axis that leaves [-R, R]
        for axis in 0..dim {
            for side in [-1.0, 1.0] {
                let slab: Vec<(f64, f64)> = (0..dim)
                    .map(|d| match d.cmp(&axis) {
                        std::cmp::Ordering::Less => (-radius, radius),
                        std::cmp::Ordering::Equal => {
                            if side < 0.0 {
                                (-outer, -radius)
                            } else {
                                (radius, outer)
                            }
                        }
                        std::cmp::Ordering::Greater => (-outer, outer),
                    })
                    .collect();
                let est = estimate_on(f, &full, &slab, order, exec)?;
                shell += est.value;
                quad_err += est.error;
                evaluations += est.evaluations;
            }
        }
        value += shell;
        shells.push(shell);
        radius = outer;
        let k = shells.len();
        let last = shells[k - 1].abs();
        let prev = shells[k - 2].abs();
        let tail = if k >= 3 && prev > 0.0 && last < prev {
            let q = last / prev;
            last * q / (1.0 - q)
        } else {
            last
        };
        if k >= 3 && tail <= schedule.tolerance {
            return Ok(ImproperEstimate {
                value,
                error: quad_err + tail,
                tail_estimate: tail,
                radius,
                shells,
                evaluations,
            });
        }
    }
    Err(Error::numerical(format!(
        "truncation tail did not fall below {:.1e} by radius {radius}",
        schedule.tolerance
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_and_weights() {
        let (x, w) = gauss_legendre(5);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
        // exact for degree 2m-1 = 9
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((s - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn unit_square() {
        let c = ChartBox::cube(2, 0.0, 1.0).unwrap();
        let e = integrate(&|_: &[f64]| Ok(1.0), &c, 4, Execution::Sequential).unwrap();
        assert!((e.value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sine_over_half_period() {
        let c = ChartBox::new(vec![(0.0, std::f64::consts::PI)]).unwrap();
        let e = integrate(&|p: &[f64]| Ok(p[0].sin()), &c, 8, Execution::Sequential).unwrap();
        assert!((e.value - 2.0).abs() < 1e-10);
    }

    #[test]
    fn non_finite_samples_fail() {
        let c = ChartBox::cube(1, -1.0, 1.0).unwrap();
        let r = integrate(&|_: &[f64]| Ok(f64::NAN), &c, 4, Execution::Sequential);
        assert!(matches!(r, Err(Error::Numerical(_))));
    }
}
