use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use umbilic_core::{Error, Result};

pub const CONVENTIONS: &[&str] = &[
    "eta(s) = sum sign(lambda) |lambda|^(-s), continued to s = 0; eta(A) = eta_A(0)",
    "the eta of the signature operator used here is twice the eta of the even-form operator",
    "the heat route integrates 2/Gamma((s+1)/2) * u^s Tr(A exp(-u^2 A^2)); the Mellin form in t^s exp(-t A^2) at s = -1/2 gives twice eta(0)",
    "conformal change: gbar = exp(2 phi) g",
    "h(X, Y) = g(nabla_X Y, nu) for the unit normal nu on the embedding's side",
    "p1 = -(1/8 pi^2) tr(Omega ^ Omega), so that the integral of p1 over CP2 is 3; L1 = p1 / 3",
    "Phi = exp(i pi eta), reported as an angle in [0, 2 pi)",
];

pub const NOT_AT_DESK_SCALE: &[&str] = &[
    "eta invariants of actual closed hyperbolic 3-manifolds (records carry supplied values)",
    "density of the image of Phi in the circle",
    "the gluing law of eta invariants under connected sum (assumed, not verified)",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub error: f64,
    /// Threshold the value is compared with; absent for informational entries.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub pass: bool,
    pub provenance: String,
}

impl Check {
    pub fn below(name: &str, value: f64, error: f64, tolerance: f64, provenance: &str) -> Self {
        Check { name: name.into(), value, error, tolerance: Some(tolerance), pass: value <= tolerance, provenance: provenance.into() }
    }

    pub fn info(name: &str, value: f64, error: f64, provenance: &str) -> Self {
        Check { name: name.into(), value, error, tolerance: None, pass: true, provenance: provenance.into() }
    }

    pub fn verdict(name: &str, value: f64, error: f64, tolerance: f64, pass: bool, provenance: &str) -> Self {
        Check { name: name.into(), value, error, tolerance: Some(tolerance), pass, provenance: provenance.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Input {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

impl Input {
    pub fn digest(role: &str, path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
        Ok(Input { role: role.into(), path: path.display().to_string(), sha256: hex::encode(Sha256::digest(&bytes)) })
    }
}

/// One run. Contains no timing, so identical inputs give identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub inputs: Vec<Input>,
    pub config: serde_json::Value,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub summary: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub conventions: Vec<String>,
    pub details: serde_json::Value,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {}: {}", self.tool, self.command, if self.pass { "PASS" } else { "FAIL" });
        for i in &self.inputs {
            let _ = writeln!(s, "  input {} {} (sha256 {})", i.role, i.path, &i.sha256[..12]);
        }
        for line in &self.summary {
            let _ = writeln!(s, "  {line}");
        }
        for c in &self.checks {
            let status = match (c.tolerance, c.pass) {
                (None, _) => "info",
                (_, true) => "pass",
                (_, false) => "FAIL",
            };
            let tol = c.tolerance.map(|t| format!(" (tolerance {t:.1e})")).unwrap_or_default();
            let _ = writeln!(s, "  [{status}] {} = {:.12e} ± {:.1e}{tol}  [{}]", c.name, c.value, c.error, c.provenance);
        }
        for n in &self.notes {
            let _ = writeln!(s, "  note: {n}");
        }
        let _ = writeln!(s, "  conventions:");
        for c in &self.conventions {
            let _ = writeln!(s, "    - {c}");
        }
        s
    }
}
