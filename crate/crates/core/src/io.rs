//! JSON documents for metrics, embeddings and collars.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::chart::{ChartBox, ExcludedSet};
use crate::chern_weil::AnalyticCollar;
use crate::curvature::ChartMetric;
use crate::error::{Error, Result};
use crate::hypersurface::HypersurfaceEmbedding;

/// An interval endpoint: a number, or `"inf"` / `"-inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bound {
    Number(f64),
    Symbol(InfSymbol),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InfSymbol {
    #[serde(rename = "inf", alias = "+inf")]
    Inf,
    #[serde(rename = "-inf")]
    NegInf,
}

impl Bound {
    pub fn value(self) -> f64 {
        match self {
            Bound::Number(v) => v,
            Bound::Symbol(InfSymbol::Inf) => f64::INFINITY,
            Bound::Symbol(InfSymbol::NegInf) => f64::NEG_INFINITY,
        }
    }

    pub fn from_value(v: f64) -> Self {
        if v == f64::INFINITY {
            Bound::Symbol(InfSymbol::Inf)
        } else if v == f64::NEG_INFINITY {
            Bound::Symbol(InfSymbol::NegInf)
        } else {
            Bound::Number(v)
        }
    }
}

fn chart_from(domain: &[[Bound; 2]], excluded: Vec<ExcludedSet>) -> Result<ChartBox> {
    ChartBox::with_excluded(domain.iter().map(|[a, b]| (a.value(), b.value())).collect(), excluded)
}

fn default_orientation() -> i8 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricFile {
    pub dimension: usize,
    pub domain: Vec<[Bound; 2]>,
    /// `n × n` component expressions in `x1 … xn`.
    pub g: Vec<Vec<String>>,
    #[serde(default = "default_orientation")]
    pub orientation: i8,
    #[serde(default)]
    pub excluded: Vec<ExcludedSet>,
}

impl MetricFile {
    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn chart(&self) -> Result<ChartBox> {
        if self.domain.len() != self.dimension {
            return Err(Error::invalid(format!(
                "domain has {} intervals for dimension {}",
                self.domain.len(),
                self.dimension
            )));
        }
        chart_from(&self.domain, self.excluded.clone())
    }

    pub fn to_metric(&self) -> Result<ChartMetric> {
        let chart = self.chart()?;
        if self.g.len() != self.dimension || self.g.iter().any(|r| r.len() != self.dimension) {
            return Err(Error::invalid(format!("g must be a {0} × {0} matrix", self.dimension)));
        }
        ChartMetric::from_strings(chart, &self.g, self.orientation)
    }
}

/// Reads and validates a metric file at `samples` points.
pub fn load_metric(path: &Path, samples: usize) -> Result<ChartMetric> {
    let g = MetricFile::read(path)?.to_metric()?;
    g.validate(samples)?;
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingFile {
    pub parameters: Vec<[f64; 2]>,
    /// Components of `F(y)` in `x1 … x(n−1)` (the parameters).
    pub map: Vec<String>,
    #[serde(default = "default_orientation")]
    pub side: i8,
    /// Path of the ambient metric file, relative to the embedding file.
    pub metric: String,
}

impl EmbeddingFile {
    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn to_embedding(&self) -> Result<HypersurfaceEmbedding> {
        let params = ChartBox::new(self.parameters.iter().map(|[a, b]| (*a, *b)).collect())?;
        let refs: Vec<&str> = self.map.iter().map(String::as_str).collect();
        HypersurfaceEmbedding::from_strings(params, &refs, self.side)
    }

    pub fn metric_path(&self, base: &Path) -> PathBuf {
        base.parent().unwrap_or(Path::new(".")).join(&self.metric)
    }
}

/// Reads an embedding and the metric it refers to; validates both.
pub fn load_embedding(path: &Path, samples: usize) -> Result<(HypersurfaceEmbedding, ChartMetric)> {
    let file = EmbeddingFile::read(path)?;
    let emb = file.to_embedding()?;
    let g = load_metric(&file.metric_path(path), samples)?;
    emb.validate(&g, samples)?;
    Ok((emb, g))
}

/// A collar metric `dx² + g_x` given by its slice components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollarFile {
    pub x_range: [f64; 2],
    pub slice_domain: Vec<[Bound; 2]>,
    /// Row-major slice components in `x1 = x`, `x2 …` the slice coordinates.
    pub slice: Vec<Vec<String>>,
}

impl CollarFile {
    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn to_collar(&self) -> Result<AnalyticCollar> {
        let chart = chart_from(&self.slice_domain, Vec::new())?;
        let flat: Vec<&str> = self.slice.iter().flatten().map(String::as_str).collect();
        AnalyticCollar::parse((self.x_range[0], self.x_range[1]), chart, &flat)
    }
}
