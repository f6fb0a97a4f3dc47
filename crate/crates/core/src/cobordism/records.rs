use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::EtaResult;

/// Slack added to the combined error estimate in the APS identity check.
pub const APS_SLACK: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaValue {
    pub value: f64,
    pub err: f64,
    #[serde(default)]
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConformalMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric_ref: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flat_verdict: Option<String>,
}

/// An oriented odd-dimensional manifold with a conformal class, known
/// through its eta invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldRecord {
    pub name: String,
    pub dim: usize,
    pub orientation: i8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<EtaValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conformal: Option<ConformalMeta>,
}

impl ManifoldRecord {
    pub fn new(name: impl Into<String>, dim: usize, eta: f64, err: f64) -> Result<Self> {
        let r = ManifoldRecord {
            name: name.into(),
            dim,
            orientation: 1,
            eta: Some(EtaValue { value: eta, err, source: "supplied".into() }),
            conformal: None,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn from_eta(name: impl Into<String>, dim: usize, eta: &EtaResult, source: impl Into<String>) -> Result<Self> {
        let mut r = Self::new(name, dim, eta.value, eta.error)?;
        r.eta.as_mut().unwrap().source = source.into();
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim % 2 == 0 {
            return Err(Error::invalid(format!("record `{}` has even dimension {}", self.name, self.dim)));
        }
        if self.orientation.abs() != 1 {
            return Err(Error::invalid(format!("record `{}` has orientation {}, expected ±1", self.name, self.orientation)));
        }
        if let Some(e) = &self.eta {
            if !e.value.is_finite() || !(e.err >= 0.0) || !e.err.is_finite() {
                return Err(Error::invalid(format!("record `{}` has a malformed eta value", self.name)));
            }
        }
        Ok(())
    }

    pub fn eta(&self) -> Result<&EtaValue> {
        self.eta.as_ref().ok_or_else(|| Error::invalid(format!("record `{}` has no eta value", self.name)))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let r: ManifoldRecord = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        r.validate()?;
        Ok(r)
    }
}

/// `M₁ ⊔ M₂`; eta values add.
pub fn disjoint_union(a: &ManifoldRecord, b: &ManifoldRecord) -> Result<ManifoldRecord> {
    if a.dim != b.dim {
        return Err(Error::invalid(format!("cannot unite dimensions {} and {}", a.dim, b.dim)));
    }
    let (ea, eb) = (a.eta()?, b.eta()?);
    Ok(ManifoldRecord {
        name: format!("({} + {})", a.name, b.name),
        dim: a.dim,
        orientation: 1,
        eta: Some(EtaValue { value: ea.value + eb.value, err: ea.err + eb.err, source: "disjoint union".into() }),
        conformal: None,
    })
}

/// `−M`: flips the orientation and negates eta. An involution.
pub fn reverse_orientation(m: &ManifoldRecord) -> ManifoldRecord {
    let name = match m.name.strip_prefix('-') {
        Some(rest) => rest.to_string(),
        None => format!("-{}", m.name),
    };
    ManifoldRecord {
        name,
        orientation: -m.orientation,
        eta: m.eta.as_ref().map(|e| EtaValue { value: -e.value, err: e.err, source: e.source.clone() }),
        ..m.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenanced<T> {
    pub value: T,
    #[serde(default)]
    pub err: f64,
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEntry {
    /// Path of a manifold record file, relative to the cobordism record.
    #[serde(rename = "ref")]
    pub reference: String,
    /// Induced orientation sign.
    pub sign: i8,
    /// Inline record; loaded from `ref` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record: Option<ManifoldRecord>,
}

/// An even-dimensional filling `W` with `∂W = ⊔ ±Mᵢ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CobordismRecord {
    pub name: String,
    pub dim: usize,
    pub boundary: Vec<BoundaryEntry>,
    pub signature: Provenanced<i64>,
    pub l_integral: Provenanced<f64>,
    pub umbilic: Vec<bool>,
}

impl CobordismRecord {
    /// Reads a record and resolves boundary references against its directory.
    pub fn read(path: &Path) -> Result<Self> {
        let mut c: CobordismRecord = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        for b in &mut c.boundary {
            if b.record.is_none() {
                b.record = Some(ManifoldRecord::read(&dir.join(&b.reference))?);
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim % 2 == 1 {
            return Err(Error::invalid(format!("cobordism `{}` has odd dimension {}", self.name, self.dim)));
        }
        if self.umbilic.len() != self.boundary.len() {
            return Err(Error::invalid("one umbilicity flag is needed per boundary component"));
        }
        for b in &self.boundary {
            if b.sign.abs() != 1 {
                return Err(Error::invalid(format!("boundary `{}` has sign {}", b.reference, b.sign)));
            }
            let r = b.record.as_ref().ok_or_else(|| Error::invalid(format!("boundary `{}` is unresolved", b.reference)))?;
            r.validate()?;
            if r.dim + 1 != self.dim {
                return Err(Error::invalid(format!("boundary `{}` has dimension {}, expected {}", r.name, r.dim, self.dim - 1)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApsStatus {
    Pass,
    Fail,
    /// Some boundary component is not umbilic; the identity is not asserted.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApsReport {
    pub signature: i64,
    pub l_integral: f64,
    /// `Σ σᵢ η(Mᵢ)` over boundary components with induced signs `σᵢ`.
    pub boundary_eta: f64,
    /// `|sign − ∫L + ½ Σ σᵢ ηᵢ|`.
    pub residual: f64,
    pub combined_error: f64,
    pub status: ApsStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notice: Option<String>,
}

/// Checks `sign(W) = ∫_W L − ½ η(∂W)`.
pub fn aps_identity_check(c: &CobordismRecord) -> Result<ApsReport> {
    c.validate()?;
    let mut boundary_eta = 0.0;
    let mut eta_err = 0.0;
    for b in &c.boundary {
        let e = b.record.as_ref().unwrap().eta()?;
        boundary_eta += b.sign as f64 * e.value;
        eta_err += e.err;
    }
    let residual = (c.signature.value as f64 - c.l_integral.value + 0.5 * boundary_eta).abs();
    let combined_error = c.l_integral.err + 0.5 * eta_err;
    let non_umbilic: Vec<&str> =
        c.boundary.iter().zip(&c.umbilic).filter(|(_, u)| !**u).map(|(b, _)| b.reference.as_str()).collect();
    let (status, notice) = if !non_umbilic.is_empty() {
        (ApsStatus::Skipped, Some(format!("identity not asserted: non-umbilic boundary {}", non_umbilic.join(", "))))
    } else if residual <= combined_error + APS_SLACK {
        (ApsStatus::Pass, None)
    } else {
        (ApsStatus::Fail, None)
    };
    Ok(ApsReport {
        signature: c.signature.value,
        l_integral: c.l_integral.value,
        boundary_eta,
        residual,
        combined_error,
        status,
        notice,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstructionVerdict {
    pub eta: f64,
    pub error: f64,
    pub nearest_even: i64,
    /// Distance from eta to `2ℤ`.
    pub distance: f64,
    pub tolerance: f64,
    /// True when eta is provably not an even integer, so the manifold
    /// bounds no conformally flat filling with umbilic boundary.
    pub obstructed: bool,
}

pub fn obstruction_test(m: &ManifoldRecord, tolerance: f64) -> Result<ObstructionVerdict> {
    let e = m.eta()?;
    if !(tolerance > 0.0 && tolerance <= 0.25) {
        return Err(Error::invalid(format!("tolerance {tolerance} must lie in (0, 0.25]")));
    }
    if e.err > tolerance {
        return Err(Error::numerical(format!(
            "eta error estimate {} of `{}` exceeds the tolerance {tolerance}",
            e.err, m.name
        )));
    }
    let nearest = 2.0 * (e.value / 2.0).round();
    let distance = (e.value - nearest).abs();
    Ok(ObstructionVerdict {
        eta: e.value,
        error: e.err,
        nearest_even: nearest as i64,
        distance,
        tolerance,
        obstructed: distance > tolerance + e.err,
    })
}

/// `Φ = exp(iπη)`, stored as its angle in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Phi {
    pub angle: f64,
    /// `π` times the eta error estimate.
    pub error: f64,
}

impl Phi {
    pub fn from_eta(eta: f64, err: f64) -> Self {
        Phi { angle: (PI * eta).rem_euclid(2.0 * PI), error: PI * err }
    }

    pub fn identity() -> Self {
        Phi { angle: 0.0, error: 0.0 }
    }

    pub fn value(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.angle)
    }

    pub fn mul(&self, other: &Phi) -> Phi {
        Phi { angle: (self.angle + other.angle).rem_euclid(2.0 * PI), error: self.error + other.error }
    }

    pub fn conj(&self) -> Phi {
        Phi { angle: (-self.angle).rem_euclid(2.0 * PI), error: self.error }
    }

    /// Arc distance on the unit circle.
    pub fn distance(&self, other: &Phi) -> f64 {
        let d = (self.angle - other.angle).rem_euclid(2.0 * PI);
        d.min(2.0 * PI - d)
    }
}

pub fn phi(m: &ManifoldRecord) -> Result<Phi> {
    let e = m.eta()?;
    Ok(Phi::from_eta(e.value, e.err))
}
