use std::path::Path;

use serde::{Deserialize, Serialize};

use super::zeta::{hurwitz_tail, hurwitz_zeta, hurwitz_zeta_nonpositive, EM_CUT};
use crate::error::{Error, Result};
use crate::par::{pairwise_sum, Execution};

/// Highest supported degree of a lattice multiplicity polynomial.
pub const MAX_MULTIPLICITY_DEGREE: usize = 4;

/// A spectrum without zero modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SpectrumModel {
    /// A finite list of eigenvalues, taken as the complete spectrum.
    Explicit {
        /// `(λ, multiplicity)`, sorted by `|λ|`.
        eigenvalues: Vec<(f64, u64)>,
        /// Declared cutoff `|λ| ≤ R` of the list.
        #[serde(default = "infinite")]
        truncation_radius: f64,
    },
    /// `λ_n = scale · (n + a)` for `n ∈ ℤ \ excluded`, multiplicity
    /// `m(n) = Σ_k c_k n^k`.
    Lattice {
        a: f64,
        #[serde(default = "unit_multiplicity")]
        multiplicity_coeffs: Vec<f64>,
        #[serde(default)]
        excluded: Vec<i64>,
        #[serde(default = "unit_scale")]
        scale: f64,
    },
    /// Disjoint union.
    Composite { parts: Vec<SpectrumModel> },
}

fn infinite() -> f64 {
    f64::INFINITY
}

fn unit_multiplicity() -> Vec<f64> {
    vec![1.0]
}

fn unit_scale() -> f64 {
    1.0
}

impl SpectrumModel {
    pub fn explicit(mut eigenvalues: Vec<(f64, u64)>) -> Result<Self> {
        eigenvalues.sort_by(|x, y| x.0.abs().total_cmp(&y.0.abs()).then(x.0.total_cmp(&y.0)));
        let truncation_radius = eigenvalues.last().map_or(0.0, |e| e.0.abs());
        let s = SpectrumModel::Explicit { eigenvalues, truncation_radius };
        s.validate()?;
        Ok(s)
    }

    pub fn lattice(a: f64, multiplicity_coeffs: Vec<f64>, excluded: Vec<i64>) -> Result<Self> {
        let s = SpectrumModel::Lattice { a, multiplicity_coeffs, excluded, scale: 1.0 };
        s.validate()?;
        Ok(s)
    }

    /// The symmetric spectrum `{±1, …, ±N}`.
    pub fn symmetric(count: u64) -> Self {
        let ev = (1..=count).flat_map(|k| [(k as f64, 1), (-(k as f64), 1)]).collect();
        SpectrumModel::explicit(ev).expect("nonzero eigenvalues")
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SpectrumModel::Explicit { eigenvalues, .. } => {
                for &(l, m) in eigenvalues {
                    if l == 0.0 || !l.is_finite() {
                        return Err(Error::invalid(format!("eigenvalue {l} is not a nonzero real number")));
                    }
                    if m == 0 {
                        return Err(Error::invalid("multiplicities must be positive"));
                    }
                }
                if eigenvalues.windows(2).any(|w| w[0].0.abs() > w[1].0.abs()) {
                    return Err(Error::invalid("explicit spectrum must be sorted by |eigenvalue|"));
                }
                Ok(())
            }
            SpectrumModel::Lattice { a, multiplicity_coeffs, excluded, scale } => {
                if !(0.0..1.0).contains(a) {
                    return Err(Error::invalid(format!("lattice offset {a} must lie in [0, 1)")));
                }
                if *a == 0.0 && !excluded.contains(&0) {
                    return Err(Error::invalid("offset 0 requires excluding the zero mode n = 0"));
                }
                if *scale == 0.0 || !scale.is_finite() {
                    return Err(Error::invalid("lattice scale must be a nonzero real number"));
                }
                if multiplicity_coeffs.is_empty() || multiplicity_coeffs.len() > MAX_MULTIPLICITY_DEGREE + 1 {
                    return Err(Error::invalid(format!(
                        "multiplicity polynomial needs 1 to {} coefficients",
                        MAX_MULTIPLICITY_DEGREE + 1
                    )));
                }
                let deg = degree(multiplicity_coeffs);
                let lead = multiplicity_coeffs[deg];
                if lead < 0.0 || (deg % 2 == 1) {
                    return Err(Error::invalid("multiplicity polynomial takes negative values for large |n|"));
                }
                for n in -200..=200 {
                    if poly(multiplicity_coeffs, n as f64) < 0.0 {
                        return Err(Error::invalid(format!("multiplicity is negative at n = {n}")));
                    }
                }
                Ok(())
            }
            SpectrumModel::Composite { parts } => parts.iter().try_for_each(SpectrumModel::validate),
        }
    }

    /// The same spectrum with every eigenvalue negated.
    pub fn negated(&self) -> Self {
        self.scaled(-1.0)
    }

    /// The same spectrum with every eigenvalue multiplied by `c ≠ 0`.
    pub fn scaled(&self, c: f64) -> Self {
        match self {
            SpectrumModel::Explicit { eigenvalues, truncation_radius } => SpectrumModel::Explicit {
                eigenvalues: eigenvalues.iter().map(|&(l, m)| (c * l, m)).collect(),
                truncation_radius: truncation_radius * c.abs(),
            },
            SpectrumModel::Lattice { a, multiplicity_coeffs, excluded, scale } => SpectrumModel::Lattice {
                a: *a,
                multiplicity_coeffs: multiplicity_coeffs.clone(),
                excluded: excluded.clone(),
                scale: scale * c,
            },
            SpectrumModel::Composite { parts } => SpectrumModel::Composite { parts: parts.iter().map(|p| p.scaled(c)).collect() },
        }
    }

    pub fn concat(&self, other: &Self) -> Self {
        SpectrumModel::Composite { parts: vec![self.clone(), other.clone()] }
    }

    /// Abscissa of absolute convergence of `Σ m |λ|^{−s}`.
    pub fn growth_order(&self) -> f64 {
        match self {
            SpectrumModel::Explicit { .. } => f64::NEG_INFINITY,
            SpectrumModel::Lattice { multiplicity_coeffs, .. } => degree(multiplicity_coeffs) as f64 + 1.0,
            SpectrumModel::Composite { parts } => parts.iter().map(|p| p.growth_order()).fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// True when every eigenvalue `λ` appears with the multiplicity of `−λ`.
    pub fn is_symmetric(&self) -> bool {
        match self {
            SpectrumModel::Explicit { eigenvalues, .. } => {
                let mut pos: Vec<(f64, u64)> = eigenvalues.iter().filter(|e| e.0 > 0.0).copied().collect();
                let mut neg: Vec<(f64, u64)> = eigenvalues.iter().filter(|e| e.0 < 0.0).map(|&(l, m)| (-l, m)).collect();
                pos.sort_by(|x, y| x.0.total_cmp(&y.0));
                neg.sort_by(|x, y| x.0.total_cmp(&y.0));
                pos == neg
            }
            _ => false,
        }
    }

    /// Reads a CSV file with header `eigenvalue,multiplicity`. A sidecar
    /// `<file>.meta.json` may declare `{"truncation_radius": R}`.
    pub fn read_csv(path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            eigenvalue: f64,
            multiplicity: u64,
        }
        #[derive(Deserialize)]
        struct Meta {
            truncation_radius: f64,
        }
        let mut reader = csv::Reader::from_path(path)?;
        let rows: Vec<(f64, u64)> = reader
            .deserialize::<Row>()
            .map(|r| r.map(|r| (r.eigenvalue, r.multiplicity)))
            .collect::<std::result::Result<_, _>>()?;
        let mut model = SpectrumModel::explicit(rows)?;
        let sidecar = sidecar_path(path);
        if sidecar.exists() {
            let meta: Meta = serde_json::from_str(&std::fs::read_to_string(&sidecar)?)?;
            if let SpectrumModel::Explicit { truncation_radius, eigenvalues } = &mut model {
                if eigenvalues.last().is_some_and(|e| e.0.abs() > meta.truncation_radius) {
                    return Err(Error::invalid("eigenvalues exceed the declared truncation radius"));
                }
                *truncation_radius = meta.truncation_radius;
            }
        }
        Ok(model)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let SpectrumModel::Explicit { eigenvalues, truncation_radius } = self else {
            return Err(Error::invalid("only explicit spectra have a CSV form"));
        };
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["eigenvalue", "multiplicity"])?;
        for (l, m) in eigenvalues {
            w.write_record([l.to_string(), m.to_string()])?;
        }
        w.flush()?;
        if truncation_radius.is_finite() {
            std::fs::write(sidecar_path(path), serde_json::json!({ "truncation_radius": truncation_radius }).to_string())?;
        }
        Ok(())
    }

    /// Reads a spectrum file: `.csv` as an explicit list, anything else as a
    /// JSON descriptor.
    pub fn read(path: &Path) -> Result<Self> {
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
            return Self::read_csv(path);
        }
        let model: SpectrumModel = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        model.validate()?;
        Ok(model)
    }
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    s.into()
}

fn degree(c: &[f64]) -> usize {
    c.iter().rposition(|v| *v != 0.0).unwrap_or(0)
}

pub(crate) fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * x + v)
}

/// Coefficients of `p(σ u + t)` as a polynomial in `u`.
fn reexpand(c: &[f64], sigma: f64, t: f64) -> Vec<f64> {
    let mut out = vec![0.0; c.len()];
    // Horner in polynomial arithmetic
    for &ck in c.iter().rev() {
        let mut next = vec![0.0; c.len()];
        for (i, &v) in out.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            next[i] += v * t;
            if i + 1 < next.len() {
                next[i + 1] += v * sigma;
            }
        }
        next[0] += ck;
        out = next;
    }
    out
}

/// One side of a lattice: `Σ_{j ≥ 0} P(j + b) (j + b)^{−s}` with `P` in powers of `u = j + b`.
pub(crate) struct LatticeSide {
    pub base: f64,
    pub coeffs: Vec<f64>,
    pub sign: f64,
}

pub(crate) struct LatticeParts {
    pub sides: [LatticeSide; 2],
    /// `(λ, m)` of excluded modes inside the sums, on the unit scale.
    pub removed: Vec<(f64, f64)>,
    pub scale: f64,
}

pub(crate) fn lattice_parts(a: f64, coeffs: &[f64], excluded: &[i64], scale: f64) -> LatticeParts {
    // positive side: λ = n + a = u, n = u − a, u = j + b₊
    let base_pos = if a > 0.0 { a } else { 1.0 };
    let pos = LatticeSide { base: base_pos, coeffs: reexpand(coeffs, 1.0, -a), sign: 1.0 };
    // negative side: λ = n + a = −u, n = −u − a, u = j + (1 − a)
    let neg = LatticeSide { base: 1.0 - a, coeffs: reexpand(coeffs, -1.0, -a), sign: -1.0 };
    let mut removed: Vec<(f64, f64)> = Vec::new();
    let mut seen = Vec::new();
    for &n in excluded {
        if seen.contains(&n) {
            continue;
        }
        seen.push(n);
        let lambda = n as f64 + a;
        if lambda != 0.0 {
            removed.push((lambda, poly(coeffs, n as f64)));
        }
    }
    LatticeParts { sides: [pos, neg], removed, scale }
}

/// `Σ sign(λ) m |λ|^{−s}` evaluated through the side decomposition, with
/// `ζ(s', b)` supplied by the caller.
fn combine(parts: &LatticeParts, s: f64, zeta: impl Fn(f64, f64, usize) -> (f64, f64)) -> (f64, f64) {
    let (value, err) = combine_sides(&parts.sides, s, zeta);
    let mut value = value;
    for &(l, m) in &parts.removed {
        value -= l.signum() * m * l.abs().powf(-s);
    }
    let sgn = parts.scale.signum();
    let factor = parts.scale.abs().powf(-s);
    (sgn * factor * value, factor * err)
}

fn combine_sides(sides: &[LatticeSide], s: f64, zeta: impl Fn(f64, f64, usize) -> (f64, f64)) -> (f64, f64) {
    let mut value = 0.0;
    let mut err = 0.0;
    for side in sides {
        for (k, &d) in side.coeffs.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            let (z, e) = zeta(s - k as f64, side.base, k);
            value += side.sign * d * z;
            err += (d * e).abs();
        }
    }
    (value, err)
}

/// The diagnostics of an eta evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaDiagnostics {
    pub terms_summed: u64,
    pub tail_bound: f64,
    /// Bernoulli correction terms in the Euler–Maclaurin continuation.
    pub continuation_order: usize,
    pub hurwitz: Option<f64>,
    pub euler_maclaurin: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaMethod {
    FiniteSum,
    HurwitzClosedForm,
    PartialSumWithTail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaResult {
    pub value: f64,
    pub method: EtaMethod,
    pub error: f64,
    pub diagnostics: EtaDiagnostics,
}

/// Default number of lattice points on each side summed before the tail.
pub const DEFAULT_LATTICE_RADIUS: u64 = 10_000;

/// `η(s) = Σ sign(λ) |λ|^{−s}` for `s` above the convergence abscissa, by
/// partial sums up to `radius` lattice points and an Euler–Maclaurin tail.
pub fn eta_series(sp: &SpectrumModel, s: f64, radius: u64, exec: Execution) -> Result<EtaResult> {
    if s <= sp.growth_order() {
        return Err(Error::invalid(format!(
            "s = {s} is below the convergence abscissa {} of this spectrum",
            sp.growth_order()
        )));
    }
    match sp {
        SpectrumModel::Explicit { eigenvalues, .. } => {
            let terms: Vec<f64> = eigenvalues.iter().map(|&(l, m)| l.signum() * m as f64 * l.abs().powf(-s)).collect();
            Ok(EtaResult {
                value: pairwise_sum(&terms),
                method: EtaMethod::FiniteSum,
                error: 0.0,
                diagnostics: EtaDiagnostics {
                    terms_summed: terms.len() as u64,
                    tail_bound: 0.0,
                    continuation_order: 0,
                    hurwitz: None,
                    euler_maclaurin: None,
                },
            })
        }
        SpectrumModel::Lattice { a, multiplicity_coeffs, excluded, scale } => {
            let parts = lattice_parts(*a, multiplicity_coeffs, excluded, *scale);
            let cut = radius.max(EM_CUT as u64) as usize;
            // partial sums over j < cut on each side, in parallel blocks
            let block = 4096usize;
            let mut partial = 0.0;
            for side in &parts.sides {
                let blocks = cut.div_ceil(block);
                let sums = exec.map_range(blocks, |bi| {
                    let lo = bi * block;
                    let hi = (lo + block).min(cut);
                    let terms: Vec<f64> = (lo..hi)
                        .map(|j| {
                            let u = j as f64 + side.base;
                            poly(&side.coeffs, u) * u.powf(-s)
                        })
                        .collect();
                    pairwise_sum(&terms)
                });
                partial += side.sign * pairwise_sum(&sums);
            }
            let (tail, bound) = combine_sides(&parts.sides, s, |sp, b, _| hurwitz_tail(sp, b, cut));
            let removed: f64 = parts.removed.iter().map(|&(l, m)| l.signum() * m * l.abs().powf(-s)).sum();
            let sgn = scale.signum();
            let factor = scale.abs().powf(-s);
            let value = sgn * factor * (partial + tail - removed);
            let err = factor * (bound + 8.0 * f64::EPSILON * partial.abs().max(tail.abs()));
            Ok(EtaResult {
                value,
                method: EtaMethod::PartialSumWithTail,
                error: err,
                diagnostics: EtaDiagnostics {
                    terms_summed: 2 * cut as u64,
                    tail_bound: bound * factor,
                    continuation_order: super::zeta::EM_TERMS,
                    hurwitz: None,
                    euler_maclaurin: None,
                },
            })
        }
        SpectrumModel::Composite { parts } => {
            let results = parts.iter().map(|p| eta_series(p, s, radius, exec)).collect::<Result<Vec<_>>>()?;
            Ok(sum_results(&results, EtaMethod::PartialSumWithTail))
        }
    }
}

fn sum_results(results: &[EtaResult], method: EtaMethod) -> EtaResult {
    let opt_sum = |f: &dyn Fn(&EtaResult) -> Option<f64>| -> Option<f64> {
        results.iter().map(|r| f(r).or(if r.method == EtaMethod::FiniteSum { Some(r.value) } else { None })).sum()
    };
    EtaResult {
        value: results.iter().map(|r| r.value).sum(),
        method,
        error: results.iter().map(|r| r.error).sum(),
        diagnostics: EtaDiagnostics {
            terms_summed: results.iter().map(|r| r.diagnostics.terms_summed).sum(),
            tail_bound: results.iter().map(|r| r.diagnostics.tail_bound).sum(),
            continuation_order: results.iter().map(|r| r.diagnostics.continuation_order).max().unwrap_or(0),
            hurwitz: opt_sum(&|r| r.diagnostics.hurwitz),
            euler_maclaurin: opt_sum(&|r| r.diagnostics.euler_maclaurin),
        },
    }
}

/// `η(0)`. Lattice spectra are continued twice, by the Bernoulli closed form
/// of `ζ_H(−k, b)` and by Euler–Maclaurin summation evaluated at `s = −k`;
/// the reported error covers their difference.
pub fn eta_invariant(sp: &SpectrumModel) -> Result<EtaResult> {
    sp.validate()?;
    match sp {
        SpectrumModel::Explicit { eigenvalues, .. } => {
            let v: i64 = eigenvalues.iter().map(|&(l, m)| if l > 0.0 { m as i64 } else { -(m as i64) }).sum();
            Ok(EtaResult {
                value: v as f64,
                method: EtaMethod::FiniteSum,
                error: 0.0,
                diagnostics: EtaDiagnostics {
                    terms_summed: eigenvalues.len() as u64,
                    tail_bound: 0.0,
                    continuation_order: 0,
                    hurwitz: None,
                    euler_maclaurin: None,
                },
            })
        }
        SpectrumModel::Lattice { a, multiplicity_coeffs, excluded, scale } => {
            let parts = lattice_parts(*a, multiplicity_coeffs, excluded, *scale);
            let (closed, _) = combine(&parts, 0.0, |sp, b, k| {
                debug_assert_eq!(sp, -(k as f64));
                (hurwitz_zeta_nonpositive(k, b), 0.0)
            });
            let (em, em_err) = combine(&parts, 0.0, |sp, b, _| hurwitz_zeta(sp, b));
            let diff = (closed - em).abs();
            if !closed.is_finite() || !em.is_finite() || diff > 1e-6 * (1.0 + closed.abs()) {
                return Err(Error::numerical(format!(
                    "continuations disagree: closed form {closed}, Euler-Maclaurin {em}"
                )));
            }
            Ok(EtaResult {
                value: closed,
                method: EtaMethod::HurwitzClosedForm,
                error: diff.max(em_err).max(4.0 * f64::EPSILON * closed.abs()),
                diagnostics: EtaDiagnostics {
                    terms_summed: 2 * EM_CUT as u64,
                    tail_bound: em_err,
                    continuation_order: super::zeta::EM_TERMS,
                    hurwitz: Some(closed),
                    euler_maclaurin: Some(em),
                },
            })
        }
        SpectrumModel::Composite { parts } => {
            let results = parts.iter().map(eta_invariant).collect::<Result<Vec<_>>>()?;
            Ok(sum_results(&results, EtaMethod::HurwitzClosedForm))
        }
    }
}

/// `η` reduced modulo `2ℤ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaMod2 {
    /// Representative in `(−1, 1]`.
    pub representative: f64,
    /// The even integer `η − representative`.
    pub integer_part: i64,
}

pub fn eta_mod_2z(r: &EtaResult) -> Result<EtaMod2> {
    if r.error > 0.5 || !r.error.is_finite() {
        return Err(Error::numerical(format!("error estimate {} is too large to reduce modulo 2", r.error)));
    }
    Ok(reduce_mod_2(r.value))
}

pub fn reduce_mod_2(v: f64) -> EtaMod2 {
    let k = ((v - 1.0) / 2.0).ceil();
    let mut rep = v - 2.0 * k;
    let mut int = 2 * k as i64;
    if rep <= -1.0 {
        rep += 2.0;
        int -= 2;
    }
    EtaMod2 { representative: rep, integer_part: int }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reexpansion() {
        // p(n) = 1 + 2n + 3n², p(−u − 0.25)
        let c = reexpand(&[1.0, 2.0, 3.0], -1.0, -0.25);
        for u in [0.3, 1.7] {
            assert!((poly(&c, u) - poly(&[1.0, 2.0, 3.0], -u - 0.25)).abs() < 1e-12);
        }
    }

    #[test]
    fn reduction_examples() {
        assert_eq!(reduce_mod_2(2.0), EtaMod2 { representative: 0.0, integer_part: 2 });
        assert_eq!(reduce_mod_2(0.5), EtaMod2 { representative: 0.5, integer_part: 0 });
        assert_eq!(reduce_mod_2(-3.5), EtaMod2 { representative: 0.5, integer_part: -4 });
        assert_eq!(reduce_mod_2(1.0).representative, 1.0);
        assert_eq!(reduce_mod_2(-1.0), EtaMod2 { representative: 1.0, integer_part: -2 });
    }

    #[test]
    fn lattice_closed_forms() {
        let sp = SpectrumModel::lattice(0.25, vec![1.0], vec![]).unwrap();
        let r = eta_invariant(&sp).unwrap();
        assert!((r.value - 0.5).abs() < 1e-15);
        let sym = SpectrumModel::lattice(0.5, vec![1.0], vec![]).unwrap();
        assert!(eta_invariant(&sym).unwrap().value.abs() < 1e-15);
    }

    #[test]
    fn rejects_zero_modes() {
        assert!(SpectrumModel::lattice(0.0, vec![1.0], vec![]).is_err());
        assert!(SpectrumModel::lattice(0.0, vec![1.0], vec![0]).is_ok());
        assert!(SpectrumModel::explicit(vec![(0.0, 1)]).is_err());
        assert!(SpectrumModel::lattice(0.3, vec![0.0, 1.0], vec![]).is_err());
    }
}
