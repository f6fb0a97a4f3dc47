//! Bernoulli numbers and polynomials, and the Hurwitz zeta function by
//! Euler–Maclaurin summation.

/// Number of explicitly summed terms before the Euler–Maclaurin tail.
pub const EM_CUT: usize = 32;
/// Correction terms `B₂ … B₈`.
pub const EM_TERMS: usize = 4;

const BERNOULLI_EVEN: [f64; 6] = [1.0, 1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0];

/// `B_k` with `B₁ = −1/2`, for `k ≤ 10`.
pub fn bernoulli_number(k: usize) -> f64 {
    match k {
        1 => -0.5,
        k if k % 2 == 1 => 0.0,
        k if k / 2 < BERNOULLI_EVEN.len() => BERNOULLI_EVEN[k / 2],
        _ => panic!("Bernoulli numbers are tabulated up to B_10"),
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `B_n(x) = Σ_k C(n, k) B_k x^{n−k}`.
pub fn bernoulli_polynomial(n: usize, x: f64) -> f64 {
    (0..=n).map(|k| binomial(n, k) * bernoulli_number(k) * x.powi((n - k) as i32)).sum()
}

/// `ζ_H(−k, b) = −B_{k+1}(b) / (k + 1)`.
pub fn hurwitz_zeta_nonpositive(k: usize, b: f64) -> f64 {
    -bernoulli_polynomial(k + 1, b) / (k + 1) as f64
}

/// Tail `Σ_{j ≥ cut} (j + b)^{−s}` by Euler–Maclaurin, with the magnitude of
/// the first omitted correction as an error bound. Valid for every `s ≠ 1`
/// by analytic continuation; exact for non-positive integers.
pub fn hurwitz_tail(s: f64, b: f64, cut: usize) -> (f64, f64) {
    let x = cut as f64 + b;
    let mut value = x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // rising factorial s (s+1) … (s+2k−2) divided by (2k)!
    let mut rising = s;
    let mut fact = 2.0;
    let mut bound = 0.0;
    for k in 1..=EM_TERMS + 1 {
        let term = bernoulli_number(2 * k) / fact * rising * x.powf(-s - 2.0 * k as f64 + 1.0);
        if k <= EM_TERMS {
            value += term;
        } else {
            bound = term.abs();
        }
        rising *= (s + 2.0 * k as f64 - 1.0) * (s + 2.0 * k as f64);
        fact *= (2 * k + 1) as f64 * (2 * k + 2) as f64;
    }
    (value, bound)
}

/// `ζ_H(s, b)` for `s ≠ 1`, `b > 0`, with an error bound.
pub fn hurwitz_zeta(s: f64, b: f64) -> (f64, f64) {
    let head: f64 = (0..EM_CUT).map(|j| (j as f64 + b).powf(-s)).sum();
    let (tail, bound) = hurwitz_tail(s, b, EM_CUT);
    let value = head + tail;
    (value, bound + 4.0 * f64::EPSILON * head.abs().max(tail.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_polynomials() {
        assert!((bernoulli_polynomial(1, 0.25) + 0.25).abs() < 1e-15);
        assert!((bernoulli_polynomial(2, 0.5) + 1.0 / 12.0).abs() < 1e-15);
        assert!((bernoulli_polynomial(3, 0.3) - (0.027 - 1.5 * 0.09 + 0.5 * 0.3)).abs() < 1e-15);
    }

    #[test]
    fn riemann_zeta_values() {
        let (z2, e) = hurwitz_zeta(2.0, 1.0);
        assert!((z2 - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-14, "{z2} {e}");
        let (z0, _) = hurwitz_zeta(0.0, 1.0);
        assert!((z0 + 0.5).abs() < 1e-12);
        let (zm1, _) = hurwitz_zeta(-1.0, 1.0);
        assert!((zm1 + 1.0 / 12.0).abs() < 1e-10);
    }

    #[test]
    fn continuation_matches_the_closed_form() {
        for b in [0.1, 0.25, 0.5, 0.9, 1.0] {
            for k in 0..4 {
                let (em, _) = hurwitz_zeta(-(k as f64), b);
                assert!((em - hurwitz_zeta_nonpositive(k, b)).abs() < 1e-9, "{k} {b}");
            }
        }
    }
}
