//! Box-shaped coordinate charts with optional excluded sets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::MAX_VARS;

/// Default guard radius, as a fraction of the box diameter.
pub const DEFAULT_GUARD: f64 = 1e-3;

/// A closed subset removed from a chart (a pole, a puncture).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ExcludedSet {
    Ball { center: Vec<f64>, radius: f64 },
}

impl ExcludedSet {
    pub fn point(center: Vec<f64>) -> Self {
        ExcludedSet::Ball { center, radius: 0.0 }
    }

    fn distance(&self, p: &[f64]) -> f64 {
        match self {
            ExcludedSet::Ball { center, radius } => {
                let d: f64 = center.iter().zip(p).map(|(c, x)| (c - x).powi(2)).sum::<f64>().sqrt();
                d - radius
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartBox {
    intervals: Vec<(f64, f64)>,
    excluded: Vec<ExcludedSet>,
    guard: f64,
}

impl ChartBox {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        Self::with_excluded(intervals, Vec::new())
    }

    pub fn with_excluded(intervals: Vec<(f64, f64)>, excluded: Vec<ExcludedSet>) -> Result<Self> {
        if intervals.is_empty() || intervals.len() > 5 {
            return Err(Error::invalid(format!(
                "chart dimension must be between 1 and 5, got {}",
                intervals.len()
            )));
        }
        debug_assert!(intervals.len() <= MAX_VARS);
        for (i, &(a, b)) in intervals.iter().enumerate() {
            if a.is_nan() || b.is_nan() || a >= b {
                return Err(Error::invalid(format!("axis {} has empty interval [{a}, {b}]", i + 1)));
            }
        }
        for e in &excluded {
            let ExcludedSet::Ball { center, radius } = e;
            if center.len() != intervals.len() || *radius < 0.0 {
                return Err(Error::invalid("excluded ball does not match chart dimension"));
            }
        }
        Ok(ChartBox { intervals, excluded, guard: DEFAULT_GUARD })
    }

    /// Cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![(lo, hi); dim])
    }

    pub fn with_guard(mut self, guard: f64) -> Self {
        self.guard = guard;
        self
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn excluded(&self) -> &[ExcludedSet] {
        &self.excluded
    }

    pub fn is_bounded(&self) -> bool {
        self.intervals.iter().all(|(a, b)| a.is_finite() && b.is_finite())
    }

    pub fn diameter(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt()
    }

    fn guard_radius(&self) -> f64 {
        if self.is_bounded() {
            self.guard * self.diameter()
        } else {
            self.guard
        }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim() && self.intervals.iter().zip(p).all(|(&(a, b), &x)| x >= a && x <= b)
    }

    /// Inside the box and farther than the guard radius from every excluded set.
    pub fn admits(&self, p: &[f64]) -> bool {
        self.contains(p) && !self.is_excluded(p)
    }

    pub fn is_excluded(&self, p: &[f64]) -> bool {
        let g = self.guard_radius();
        self.excluded.iter().any(|e| e.distance(p) <= g)
    }

    /// The box with each unbounded axis clipped to a window of width 4 at its
    /// finite end, or centred on 0 when both ends are infinite.
    pub fn sampling_window(&self) -> ChartBox {
        let intervals = self
            .intervals
            .iter()
            .map(|&(a, b)| match (a.is_finite(), b.is_finite()) {
                (true, true) => (a, b),
                (true, false) => (a, a + 4.0),
                (false, true) => (b - 4.0, b),
                (false, false) => (-2.0, 2.0),
            })
            .collect();
        ChartBox { intervals, ..self.clone() }
    }

    /// Halton points in the box, skipping excluded regions.
    pub fn halton_points(&self, count: usize) -> Result<Vec<Vec<f64>>> {
        if !self.is_bounded() {
            return Err(Error::invalid("cannot sample an unbounded chart"));
        }
        let mut out = Vec::with_capacity(count);
        let mut index = 1u64;
        let budget = 50 * count as u64 + 100;
        while out.len() < count && index < budget {
            let p: Vec<f64> = self
                .intervals
                .iter()
                .enumerate()
                .map(|(d, &(a, b))| a + (b - a) * radical_inverse(index, PRIMES[d]))
                .collect();
            index += 1;
            if !self.is_excluded(&p) {
                out.push(p);
            }
        }
        Ok(out)
    }

    /// Tensor grid of `per_axis` points per axis at cell midpoints.
    pub fn grid_points(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let n = self.dim();
        let total = per_axis.pow(n as u32);
        (0..total)
            .map(|mut k| {
                let mut p = vec![0.0; n];
                for (d, &(a, b)) in self.intervals.iter().enumerate() {
                    let i = k % per_axis;
                    k /= per_axis;
                    p[d] = a + (b - a) * (i as f64 + 0.5) / per_axis as f64;
                }
                p
            })
            .filter(|p| !self.is_excluded(p))
            .collect()
    }
}

const PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_intervals() {
        assert!(ChartBox::new(vec![(1.0, 1.0)]).is_err());
        assert!(ChartBox::new(vec![]).is_err());
        assert!(ChartBox::new(vec![(0.0, 1.0); 6]).is_err());
    }

    #[test]
    fn halton_skips_excluded_points() {
        let b = ChartBox::with_excluded(
            vec![(-1.0, 1.0), (-1.0, 1.0)],
            vec![ExcludedSet::Ball { center: vec![0.0, 0.0], radius: 0.5 }],
        )
        .unwrap();
        let pts = b.halton_points(200).unwrap();
        assert_eq!(pts.len(), 200);
        assert!(pts.iter().all(|p| p[0].hypot(p[1]) > 0.5));
        assert!(pts.iter().all(|p| b.contains(p)));
    }

    #[test]
    fn radical_inverse_base_two() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(2, 2), 0.25);
        assert_eq!(radical_inverse(3, 2), 0.75);
    }
}
