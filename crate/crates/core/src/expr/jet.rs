//! Truncated multivariate Taylor polynomials ("jets").
//!
//! A jet of order `K` in `n` variables stores the Taylor coefficients
//! `c_α` of a function around a point for every multi-index `|α| ≤ K`.
//! Arithmetic is exact up to truncation, so partial derivatives obtained
//! from a jet carry only floating-point error.
//!
//! Monomials are stored graded by total degree, which makes the layout of
//! order `K - 1` a prefix of the layout of order `K`; truncation is a slice.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::OnceLock;

use super::DomainError;

pub const MAX_VARS: usize = 6;
pub const MAX_ORDER: usize = 4;

type Mono = [u8; MAX_VARS];

pub(crate) struct Layout {
    nvars: usize,
    order: usize,
    monos: Vec<Mono>,
    mul: Vec<(u16, u16, u16)>,
    // per variable: (source index, destination index, factor)
    deriv: Vec<Vec<(u16, u16, f64)>>,
    // α! for each monomial
    fact: Vec<f64>,
}

static LAYOUTS: [[OnceLock<Layout>; MAX_ORDER + 1]; MAX_VARS + 1] =
    [const { [const { OnceLock::new() }; MAX_ORDER + 1] }; MAX_VARS + 1];

fn degree(m: &Mono) -> usize {
    m.iter().map(|&d| d as usize).sum()
}

fn monomials(nvars: usize, order: usize) -> Vec<Mono> {
    let mut out = Vec::new();
    for d in 0..=order {
        let mut cur = [0u8; MAX_VARS];
        push_degree(nvars, 0, d, &mut cur, &mut out);
    }
    out
}

fn push_degree(nvars: usize, var: usize, left: usize, cur: &mut Mono, out: &mut Vec<Mono>) {
    if nvars == 0 {
        if left == 0 {
            out.push(*cur);
        }
        return;
    }
    if var == nvars - 1 {
        cur[var] = left as u8;
        out.push(*cur);
        cur[var] = 0;
        return;
    }
    for k in (0..=left).rev() {
        cur[var] = k as u8;
        push_degree(nvars, var + 1, left - k, cur, out);
    }
    cur[var] = 0;
}

pub(crate) fn layout(nvars: usize, order: usize) -> &'static Layout {
    assert!(nvars <= MAX_VARS, "jets support at most {MAX_VARS} variables");
    assert!(order <= MAX_ORDER, "jets support order at most {MAX_ORDER}");
    LAYOUTS[nvars][order].get_or_init(|| {
        let monos = monomials(nvars, order);
        let find = |m: &Mono| monos.iter().position(|x| x == m).expect("monomial in layout");
        let mut mul = Vec::new();
        for (a, ma) in monos.iter().enumerate() {
            for (b, mb) in monos.iter().enumerate() {
                if degree(ma) + degree(mb) > order {
                    continue;
                }
                let mut mc = [0u8; MAX_VARS];
                for v in 0..MAX_VARS {
                    mc[v] = ma[v] + mb[v];
                }
                mul.push((a as u16, b as u16, find(&mc) as u16));
            }
        }
        let mut deriv = vec![Vec::new(); nvars];
        for (v, table) in deriv.iter_mut().enumerate() {
            for (src, m) in monos.iter().enumerate() {
                if m[v] == 0 {
                    continue;
                }
                let mut lower = *m;
                lower[v] -= 1;
                table.push((src as u16, find(&lower) as u16, m[v] as f64));
            }
        }
        let fact = monos
            .iter()
            .map(|m| m.iter().map(|&k| factorial(k as usize)).product())
            .collect();
        Layout { nvars, order, monos, mul, deriv, fact }
    })
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Truncated Taylor expansion of a scalar function around a point.
#[derive(Clone)]
pub struct Jet {
    layout: &'static Layout,
    c: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("nvars", &self.layout.nvars)
            .field("order", &self.layout.order)
            .field("coeffs", &self.c)
            .finish()
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.layout.nvars == other.layout.nvars
            && self.layout.order == other.layout.order
            && self.c == other.c
    }
}

impl Jet {
    pub fn constant(nvars: usize, order: usize, value: f64) -> Self {
        let layout = layout(nvars, order);
        let mut c = vec![0.0; layout.monos.len()];
        c[0] = value;
        Jet { layout, c }
    }

    /// The coordinate function `x_var` expanded around `value`.
    pub fn variable(nvars: usize, order: usize, var: usize, value: f64) -> Self {
        assert!(var < nvars);
        let mut j = Self::constant(nvars, order, value);
        if order >= 1 {
            // degree-one monomials follow the constant, in variable order
            j.c[1 + var] = 1.0;
        }
        j
    }

    /// Coordinate jets for all variables at the point `p`.
    pub fn seed(p: &[f64], order: usize) -> Vec<Jet> {
        (0..p.len()).map(|i| Jet::variable(p.len(), order, i, p[i])).collect()
    }

    /// A jet of order 0 or 1 from a value and a gradient.
    pub fn linear(value: f64, gradient: &[f64], order: usize) -> Self {
        assert!(order <= 1, "linear jets carry at most first derivatives");
        let mut j = Self::constant(gradient.len(), order, value);
        if order == 1 {
            j.c[1..].copy_from_slice(gradient);
        }
        j
    }

    pub fn nvars(&self) -> usize {
        self.layout.nvars
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|x| x.is_finite())
    }

    /// Partial derivative `∂_{vars[0]} ∂_{vars[1]} …` at the expansion point.
    ///
    /// Returns `None` when more derivatives are requested than the jet carries.
    pub fn partial(&self, vars: &[usize]) -> Option<f64> {
        if vars.len() > self.order() {
            return None;
        }
        let mut m = [0u8; MAX_VARS];
        for &v in vars {
            assert!(v < self.nvars());
            m[v] += 1;
        }
        let idx = self.layout.monos.iter().position(|x| *x == m)?;
        Some(self.c[idx] * self.layout.fact[idx])
    }

    pub fn gradient(&self) -> Vec<f64> {
        (0..self.nvars()).map(|i| self.partial(&[i]).unwrap_or(f64::NAN)).collect()
    }

    pub fn hessian(&self) -> Vec<Vec<f64>> {
        let n = self.nvars();
        (0..n)
            .map(|i| (0..n).map(|j| self.partial(&[i, j]).unwrap_or(f64::NAN)).collect())
            .collect()
    }

    /// Drops all coefficients above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.order() {
            return self.clone();
        }
        let layout = layout(self.nvars(), order);
        Jet { layout, c: self.c[..layout.monos.len()].to_vec() }
    }

    /// Derivative with respect to variable `var`; the result has one order less.
    ///
    /// # Panics
    /// If the jet has order zero.
    pub fn d(&self, var: usize) -> Jet {
        assert!(self.order() >= 1, "cannot differentiate an order-0 jet");
        let layout = layout(self.nvars(), self.order() - 1);
        let mut c = vec![0.0; layout.monos.len()];
        for &(src, dst, f) in &self.layout.deriv[var] {
            c[dst as usize] += f * self.c[src as usize];
        }
        Jet { layout, c }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet { layout: self.layout, c: self.c.iter().map(|x| x * s).collect() }
    }

    fn aligned<'a>(&'a self, other: &'a Jet) -> (std::borrow::Cow<'a, Jet>, std::borrow::Cow<'a, Jet>) {
        use std::borrow::Cow;
        assert_eq!(self.nvars(), other.nvars(), "jets over different variable sets");
        match self.order().cmp(&other.order()) {
            std::cmp::Ordering::Equal => (Cow::Borrowed(self), Cow::Borrowed(other)),
            std::cmp::Ordering::Less => (Cow::Borrowed(self), Cow::Owned(other.truncate(self.order()))),
            std::cmp::Ordering::Greater => (Cow::Owned(self.truncate(other.order())), Cow::Borrowed(other)),
        }
    }

    fn zip(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        let (a, b) = self.aligned(other);
        Jet { layout: a.layout, c: a.c.iter().zip(&b.c).map(|(x, y)| f(*x, *y)).collect() }
    }

    fn product(&self, other: &Jet) -> Jet {
        let (a, b) = self.aligned(other);
        let mut c = vec![0.0; a.c.len()];
        for &(i, j, k) in &a.layout.mul {
            c[k as usize] += a.c[i as usize] * b.c[j as usize];
        }
        Jet { layout: a.layout, c }
    }

    /// `Σ_k coeffs[k] · (self - self(p))^k`, i.e. composition with a
    /// univariate function whose Taylor coefficients at `self(p)` are given.
    pub fn compose(&self, coeffs: &[f64]) -> Jet {
        let mut h = self.clone();
        h.c[0] = 0.0;
        let mut out = Jet::constant(self.nvars(), self.order(), coeffs[0]);
        let mut power = Jet::constant(self.nvars(), self.order(), 1.0);
        for &ck in coeffs.iter().skip(1).take(self.order()) {
            power = power.product(&h);
            if ck != 0.0 {
                for (o, p) in out.c.iter_mut().zip(&power.c) {
                    *o += ck * p;
                }
            }
        }
        out
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let coeffs: Vec<f64> = (0..=self.order()).map(|k| e / factorial(k)).collect();
        self.compose(&coeffs)
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        let coeffs: Vec<f64> = (0..=self.order()).map(|k| cycle[k % 4] / factorial(k)).collect();
        self.compose(&coeffs)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        let coeffs: Vec<f64> = (0..=self.order()).map(|k| cycle[k % 4] / factorial(k)).collect();
        self.compose(&coeffs)
    }

    pub fn recip(&self) -> Result<Jet, DomainError> {
        let u = self.value();
        if u == 0.0 {
            return Err(DomainError::new("division by zero"));
        }
        let coeffs: Vec<f64> = (0..=self.order())
            .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } / u.powi(k as i32 + 1))
            .collect();
        Ok(self.compose(&coeffs))
    }

    pub fn ln(&self) -> Result<Jet, DomainError> {
        let u = self.value();
        if u <= 0.0 {
            return Err(DomainError::new(format!("log of nonpositive value {u}")));
        }
        let mut coeffs = vec![u.ln()];
        for k in 1..=self.order() {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            coeffs.push(sign / (k as f64 * u.powi(k as i32)));
        }
        Ok(self.compose(&coeffs))
    }

    pub fn powi(&self, k: i32) -> Result<Jet, DomainError> {
        let base = if k < 0 { self.recip()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = Jet::constant(self.nvars(), self.order(), 1.0);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.product(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.product(&sq);
            }
        }
        Ok(acc)
    }

    /// Real power. Integer exponents go through repeated multiplication and
    /// accept negative bases; other exponents need a positive base.
    pub fn powf(&self, r: f64) -> Result<Jet, DomainError> {
        if r.fract() == 0.0 && r.abs() <= i32::MAX as f64 {
            return self.powi(r as i32);
        }
        let u = self.value();
        if u == 0.0 && self.order() == 0 && r > 0.0 {
            return Ok(Jet::constant(self.nvars(), 0, 0.0));
        }
        if u <= 0.0 {
            return Err(DomainError::new(format!("non-integer power {r} of nonpositive value {u}")));
        }
        let mut coeffs = Vec::with_capacity(self.order() + 1);
        let mut binom = 1.0;
        for k in 0..=self.order() {
            coeffs.push(binom * u.powf(r - k as f64));
            binom *= (r - k as f64) / (k as f64 + 1.0);
        }
        Ok(self.compose(&coeffs))
    }

    pub fn sqrt(&self) -> Result<Jet, DomainError> {
        if self.value() < 0.0 {
            return Err(DomainError::new(format!("sqrt of negative value {}", self.value())));
        }
        self.powf(0.5)
    }

    pub fn tan(&self) -> Result<Jet, DomainError> {
        let c = self.cos();
        if c.value().abs() < 1e-300 {
            return Err(DomainError::new("tan at a pole"));
        }
        Ok(&self.sin() * &c.recip()?)
    }

    pub fn tanh(&self) -> Jet {
        // tanh(u0 + h) = (t0 + tanh h) / (1 + t0 tanh h)
        let t0 = self.value().tanh();
        let series = [0.0, 1.0, 0.0, -1.0 / 3.0, 0.0, 2.0 / 15.0];
        let mut h = self.clone();
        h.c[0] = 0.0;
        let th = h.compose(&series);
        let num = th.clone() + t0;
        let den = th.scale(t0) + 1.0;
        // den has value 1, never singular
        &num * &den.recip().expect("nonzero denominator")
    }

    pub fn atan(&self) -> Jet {
        // atan(u0 + h) = atan(u0) + atan(h / (1 + u0 (u0 + h)))
        let u0 = self.value();
        let mut h = self.clone();
        h.c[0] = 0.0;
        let den = self.scale(u0) + 1.0;
        let w = &h * &den.recip().expect("1 + u0^2 > 0");
        let series = [0.0, 1.0, 0.0, -1.0 / 3.0, 0.0, 1.0 / 5.0];
        let mut out = w.compose(&series);
        out.c[0] = u0.atan();
        out
    }

    /// Smooth cutoff: 1 on |u| ≤ 1/3, 0 on |u| ≥ 2/3, glued by the
    /// `exp(-1/t)` bump.
    pub fn cutoff(&self) -> Jet {
        let u = self.value();
        let a = u.abs();
        if a <= 1.0 / 3.0 {
            return Jet::constant(self.nvars(), self.order(), 1.0);
        }
        if a >= 2.0 / 3.0 {
            return Jet::constant(self.nvars(), self.order(), 0.0);
        }
        let s = u.signum();
        // t runs from 1 at |u| = 1/3 to 0 at |u| = 2/3
        let t = (self.scale(-3.0 * s)) + 2.0;
        let psi = |x: &Jet| -> Jet {
            let inv = x.recip().expect("interior of the transition band");
            inv.scale(-1.0).exp()
        };
        let one_minus_t = t.scale(-1.0) + 1.0;
        let pa = psi(&t);
        let pb = psi(&one_minus_t);
        let den = &pa + &pb;
        &pa * &den.recip().expect("positive bump sum")
    }
}

pub(crate) fn cutoff_value(u: f64) -> f64 {
    let a = u.abs();
    if a <= 1.0 / 3.0 {
        1.0
    } else if a >= 2.0 / 3.0 {
        0.0
    } else {
        let t = 2.0 - 3.0 * a;
        let pa = (-1.0 / t).exp();
        let pb = (-1.0 / (1.0 - t)).exp();
        pa / (pa + pb)
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, o: &Jet) -> Jet {
        self.zip(o, |a, b| a + b)
    }
}
impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, o: &Jet) -> Jet {
        self.zip(o, |a, b| a - b)
    }
}
impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, o: &Jet) -> Jet {
        self.product(o)
    }
}
impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}
impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        &self + &o
    }
}
impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        &self - &o
    }
}
impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        self.product(&o)
    }
}
impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}
impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, o: f64) -> Jet {
        self.c[0] += o;
        self
    }
}
impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, o: f64) -> Jet {
        self.scale(o)
    }
}
impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, o: f64) -> Jet {
        self.scale(o)
    }
}
impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, o: f64) -> Jet {
        self.scale(1.0 / o)
    }
}

/// Adds `a * b` into `acc` without intermediate allocation.
pub fn fma_into(acc: &mut Jet, a: &Jet, b: &Jet) {
    assert_eq!(a.nvars(), b.nvars());
    let order = acc.order().min(a.order()).min(b.order());
    if acc.order() > order {
        *acc = acc.truncate(order);
    }
    let lay = acc.layout;
    let m = lay.monos.len();
    for &(i, j, k) in &lay.mul {
        let (i, j, k) = (i as usize, j as usize, k as usize);
        debug_assert!(i < m && j < m);
        acc.c[k] += a.c[i] * b.c[j];
    }
}

/// `Σ a_i b_i` over jets of possibly different orders.
pub fn dot(a: &[Jet], b: &[Jet]) -> Jet {
    let order = a.iter().chain(b).map(|j| j.order()).min().unwrap_or(0);
    let n = a.first().or(b.first()).map(|j| j.nvars()).unwrap_or(0);
    let mut acc = Jet::constant(n, order, 0.0);
    for (x, y) in a.iter().zip(b) {
        fma_into(&mut acc, x, y);
    }
    acc
}
