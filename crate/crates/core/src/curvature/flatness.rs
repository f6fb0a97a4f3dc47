use serde::{Deserialize, Serialize};

use super::metric::MetricField;
use super::tensors::curvature_package;
use crate::chart::ChartBox;
use crate::error::Result;
use crate::par::Execution;

/// Which tensor certified the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlatnessCriterion {
    /// `n ≤ 2`: every metric is locally conformally flat.
    Trivial,
    Cotton,
    Weyl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum FlatnessVerdict {
    Flat,
    NotFlat { witness: Vec<f64>, norm: f64 },
    /// Largest norm lies in `(tol, 10 tol]`, too close to call.
    Inconclusive { witness: Vec<f64>, norm: f64 },
}

impl FlatnessVerdict {
    pub fn is_flat(&self) -> bool {
        matches!(self, FlatnessVerdict::Flat)
    }

    pub fn label(&self) -> &'static str {
        match self {
            FlatnessVerdict::Flat => "flat",
            FlatnessVerdict::NotFlat { .. } => "not flat",
            FlatnessVerdict::Inconclusive { .. } => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatnessReport {
    pub verdict: FlatnessVerdict,
    pub criterion: FlatnessCriterion,
    pub max_norm: f64,
    pub samples: usize,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatnessConfig {
    pub samples: usize,
    pub tolerance: f64,
}

impl Default for FlatnessConfig {
    fn default() -> Self {
        FlatnessConfig { samples: 200, tolerance: 1e-6 }
    }
}

/// Samples the Weyl (n ≥ 4) or Cotton (n = 3) g-norm over Halton points of `chart`.
pub fn classify_conformally_flat<M: MetricField + ?Sized>(
    g: &M,
    chart: &ChartBox,
    config: FlatnessConfig,
    exec: Execution,
) -> Result<FlatnessReport> {
    let n = g.dim();
    let criterion = match n {
        0..=2 => FlatnessCriterion::Trivial,
        3 => FlatnessCriterion::Cotton,
        _ => FlatnessCriterion::Weyl,
    };
    if criterion == FlatnessCriterion::Trivial {
        return Ok(FlatnessReport {
            verdict: FlatnessVerdict::Flat,
            criterion,
            max_norm: 0.0,
            samples: 0,
            tolerance: config.tolerance,
        });
    }
    let points = chart.halton_points(config.samples)?;
    let norms = exec.try_map(&points, |p| -> Result<f64> {
        let k = curvature_package(g, p)?;
        Ok(match criterion {
            FlatnessCriterion::Cotton => k.cotton_norm().unwrap_or(0.0),
            _ => k.weyl_norm().unwrap_or(0.0),
        })
    })?;
    let (idx, max_norm) = norms
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0f64), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    let tol = config.tolerance;
    let verdict = if max_norm <= tol {
        FlatnessVerdict::Flat
    } else if max_norm <= 10.0 * tol {
        FlatnessVerdict::Inconclusive { witness: points[idx].clone(), norm: max_norm }
    } else {
        FlatnessVerdict::NotFlat { witness: points[idx].clone(), norm: max_norm }
    };
    Ok(FlatnessReport { verdict, criterion, max_norm, samples: points.len(), tolerance: tol })
}
