//! Differential forms on a chart with jet-valued or numeric coefficients.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::expr::Jet;

/// Strictly increasing index tuples of length `k` from `0..n`, lexicographic.
pub fn combinations(n: usize, k: usize) -> &'static [Vec<usize>] {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), &'static [Vec<usize>]>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("combination cache poisoned");
    *map.entry((n, k)).or_insert_with(|| {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(k);
        fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in start..n {
                cur.push(i);
                rec(i + 1, n, k, cur, out);
                cur.pop();
            }
        }
        rec(0, n, k, &mut cur, &mut out);
        Box::leak(out.into_boxed_slice())
    })
}

fn position(n: usize, idx: &[usize]) -> usize {
    combinations(n, idx.len()).iter().position(|c| c == idx).expect("sorted index tuple")
}

/// Sorts `idx`, returning the permutation sign, or `None` on a repeated index.
fn sort_sign(idx: &mut [usize]) -> Option<f64> {
    let mut sign = 1.0;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

/// A `k`-form with coefficients of type `T` on the sorted index tuples.
#[derive(Debug, Clone, PartialEq)]
pub struct Form<T> {
    pub n: usize,
    pub degree: usize,
    pub comps: Vec<T>,
}

pub type JetForm = Form<Jet>;

impl Form<f64> {
    pub fn zero(n: usize, degree: usize) -> Self {
        Form { n, degree, comps: vec![0.0; combinations(n, degree).len()] }
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sub(&self, o: &Self) -> Self {
        Form { n: self.n, degree: self.degree, comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a - b).collect() }
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        let mut s = idx.to_vec();
        match sort_sign(&mut s) {
            Some(sign) => sign * self.comps[position(self.n, &s)],
            None => 0.0,
        }
    }
}

impl JetForm {
    pub fn zero_jet(n: usize, degree: usize, nvars: usize, order: usize) -> Self {
        Form { n, degree, comps: vec![Jet::constant(nvars, order, 0.0); combinations(n, degree).len()] }
    }

    pub fn order(&self) -> usize {
        self.comps.iter().map(Jet::order).min().unwrap_or(0)
    }

    pub fn values(&self) -> Form<f64> {
        Form { n: self.n, degree: self.degree, comps: self.comps.iter().map(Jet::value).collect() }
    }

    pub fn add(&self, o: &Self) -> Self {
        Form { n: self.n, degree: self.degree, comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Form { n: self.n, degree: self.degree, comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, c: f64) -> Self {
        Form { n: self.n, degree: self.degree, comps: self.comps.iter().map(|a| a.scale(c)).collect() }
    }

    /// Exterior derivative; the result loses one order of jet information.
    pub fn d(&self) -> Self {
        let n = self.n;
        let k = self.degree;
        let nv = self.comps[0].nvars();
        let order = self.order().saturating_sub(1);
        let mut out = Self::zero_jet(n, k + 1, nv, order);
        if k + 1 > n {
            return out;
        }
        for (slot, target) in combinations(n, k + 1).iter().enumerate() {
            let mut acc = Jet::constant(nv, order, 0.0);
            for p in 0..=k {
                let mut rest = target.clone();
                let i = rest.remove(p);
                let c = &self.comps[position(n, &rest)];
                let term = c.d(i);
                acc = if p % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            out.comps[slot] = acc;
        }
        out
    }

    pub fn wedge(&self, o: &Self) -> Self {
        let n = self.n;
        let nv = self.comps[0].nvars();
        let order = self.order().min(o.order());
        let mut out = Self::zero_jet(n, self.degree + o.degree, nv, order);
        if self.degree + o.degree > n {
            return out;
        }
        let ca = combinations(n, self.degree);
        let cb = combinations(n, o.degree);
        for (ia, a) in ca.iter().enumerate() {
            if self.comps[ia].coeffs().iter().all(|c| *c == 0.0) {
                continue;
            }
            for (ib, b) in cb.iter().enumerate() {
                let mut idx: Vec<usize> = a.iter().chain(b).copied().collect();
                if let Some(sign) = sort_sign(&mut idx) {
                    let slot = position(n, &idx);
                    let prod = &self.comps[ia] * &o.comps[ib];
                    out.comps[slot] = &out.comps[slot] + &prod.scale(sign);
                }
            }
        }
        out
    }

    pub fn truncate(&self, order: usize) -> Self {
        Form { n: self.n, degree: self.degree, comps: self.comps.iter().map(|c| c.truncate(order)).collect() }
    }
}

/// Sampled form data for export: the component index lists and values on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormField {
    pub degree: usize,
    pub dimension: usize,
    /// 1-based coordinate indices of each component, e.g. `[1, 2, 3, 4]`.
    pub components: Vec<Vec<usize>>,
    pub samples: Vec<FormSample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormSample {
    pub point: Vec<f64>,
    pub values: Vec<f64>,
}

impl FormField {
    pub fn new(dimension: usize, degree: usize) -> Self {
        FormField {
            degree,
            dimension,
            components: combinations(dimension, degree).iter().map(|c| c.iter().map(|i| i + 1).collect()).collect(),
            samples: Vec::new(),
        }
    }

    pub fn push(&mut self, point: Vec<f64>, form: &Form<f64>) {
        self.samples.push(FormSample { point, values: form.comps.clone() });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_form(p: &[f64], f: &[&str]) -> JetForm {
        let n = p.len();
        let comps = f
            .iter()
            .map(|s| crate::expr::Expression::parse(s, n).unwrap().eval_jet(p, 3).unwrap())
            .collect();
        Form { n, degree: 1, comps }
    }

    #[test]
    fn combination_counts() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(5, 3).len(), 10);
        assert_eq!(combinations(4, 0).len(), 1);
        assert_eq!(combinations(3, 4).len(), 0);
    }

    #[test]
    fn d_squared_vanishes() {
        let a = one_form(&[0.3, -0.2, 0.5], &["x1*x2^2", "sin(x3)*x1", "exp(x2*x3)"]);
        let dd = a.d().d();
        assert!(dd.comps.iter().all(|c| c.value().abs() < 1e-13));
    }

    #[test]
    fn wedge_is_graded_commutative() {
        let p = [0.3, -0.2, 0.5, 0.1];
        let a = one_form(&p, &["x1", "x2*x3", "1", "x4^2"]);
        let b = one_form(&p, &["x3", "2", "x1*x4", "0"]);
        let ab = a.wedge(&b).values();
        let ba = b.wedge(&a).values();
        assert!(ab.comps.iter().zip(&ba.comps).all(|(x, y)| (x + y).abs() < 1e-15));
        assert!(a.wedge(&a).values().max_abs() < 1e-15);
    }

    #[test]
    fn leibniz_rule() {
        let p = [0.3, -0.2, 0.5];
        let a = one_form(&p, &["x1*x2", "x3", "x2^2"]);
        let b = one_form(&p, &["x3*x1", "sin(x1)", "1"]);
        let lhs = a.wedge(&b).d().values();
        let rhs = a.d().wedge(&b).sub(&a.wedge(&b.d())).values();
        assert!(lhs.sub(&rhs).max_abs() < 1e-13);
    }

    #[test]
    fn signed_component_lookup() {
        let mut f = Form::zero(3, 2);
        f.comps[0] = 2.0; // dx1∧dx2
        assert_eq!(f.get(&[1, 0]), -2.0);
        assert_eq!(f.get(&[0, 0]), 0.0);
    }
}
