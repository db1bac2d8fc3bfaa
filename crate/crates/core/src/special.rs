//! Special functions not covered by MPFR/MPC: Bernoulli numbers, Hurwitz zeta, polygamma, complex log-gamma.

use crate::arith::{binom, factorial};
use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float, Rational};
use std::sync::Mutex;

static BERNOULLI: Mutex<Vec<Rational>> = Mutex::new(Vec::new());

/// Bernoulli numbers B_0..B_n (B_1 = −1/2).
pub fn bernoulli(n: usize) -> Vec<Rational> {
    let mut cache = BERNOULLI.lock().unwrap();
    if cache.is_empty() {
        cache.push(Rational::from(1));
    }
    while cache.len() <= n {
        let m = cache.len();
        // Σ_{k<m} C(m+1,k) B_k + (m+1) B_m = 0
        let mut s = Rational::new();
        for (k, b) in cache.iter().enumerate() {
            if *b != 0 {
                s += binom((m + 1) as u32, k as u32) * b;
            }
        }
        cache.push(-s / Rational::from(m as u32 + 1));
    }
    cache[..=n].to_vec()
}

/// Hurwitz zeta ζ(k, x) = Σ_{j≥0} (x+j)^{−k} for integer k ≥ 2 and real x not a nonpositive integer.
pub fn hurwitz_zeta(k: u32, x: &Float) -> Float {
    assert!(k >= 2);
    let prec = x.prec();
    let work = prec + 32;
    let mut acc = Float::new(work);
    let mut x = Float::with_val(work, x);
    let big = (work as f64) / 2.0 + 10.0;
    // direct terms until x is large
    while x.to_f64() < big {
        acc += Float::with_val(work, (&x).pow(-(k as i32)));
        x += 1u32;
    }
    // Euler–Maclaurin tail at x
    acc += Float::with_val(work, (&x).pow(1 - k as i32)) / (k - 1);
    acc += Float::with_val(work, (&x).pow(-(k as i32))) / 2u32;
    let bern = bernoulli(2 * 200);
    let xinv2 = Float::with_val(work, (&x).pow(-2i32));
    // term_m = B_{2m}/(2m)! · k(k+1)…(k+2m−2) · x^{−k−2m+1}
    let mut pochh = Float::with_val(work, k);
    let mut xp = Float::with_val(work, (&x).pow(-(k as i32) - 1));
    let mut fact = Float::with_val(work, 2u32);
    for m in 1..200usize {
        let b = Float::with_val(work, &bern[2 * m]);
        let term = Float::with_val(work, &b * &pochh) * &xp / &fact;
        let small = term.is_zero() || (term.clone().abs().log2().to_f64() - acc.clone().abs().log2().to_f64()) < -(work as f64);
        acc += term;
        if small {
            break;
        }
        pochh *= (k as usize + 2 * m - 1) as u32;
        pochh *= (k as usize + 2 * m) as u32;
        xp *= &xinv2;
        fact *= ((2 * m + 1) * (2 * m + 2)) as u32;
    }
    Float::with_val(prec, acc)
}

/// Polygamma ψ^{(n)}(x); n = 0 is the digamma function.
pub fn polygamma(n: u32, x: &Float) -> Float {
    if n == 0 {
        return Float::with_val(x.prec(), x.digamma_ref());
    }
    let z = hurwitz_zeta(n + 1, x);
    let f = Float::with_val(x.prec(), factorial(n)) * z;
    if n % 2 == 1 {
        f
    } else {
        -f
    }
}

/// log Γ(z) for complex z off the nonpositive real axis, on the branch continuous from the positive reals
/// (Stirling series after an upward shift).
pub fn ln_gamma(z: &Complex) -> Complex {
    let prec = z.prec().0;
    let work = prec + 32;
    let mut z = Complex::with_val(work, z);
    let target = (work as f64) / 4.0 + 10.0;
    let mut shift = Complex::new(work);
    while z.real().to_f64() < target {
        shift += Complex::with_val(work, z.ln_ref());
        z += 1u32;
    }
    let two_pi = Float::with_val(work, Constant::Pi) * 2u32;
    let mut s = Complex::with_val(work, Complex::with_val(work, &z - 0.5) * Complex::with_val(work, z.ln_ref()));
    s -= &z;
    s += Float::with_val(work, two_pi.ln()) / 2u32;
    let bern = bernoulli(2 * 300);
    let zinv = Complex::with_val(work, 1 / &z);
    let zinv2 = Complex::with_val(work, zinv.square_ref());
    let mut zp = zinv.clone();
    for k in 1..300usize {
        let c = Rational::from(&bern[2 * k] / Rational::from((2 * k) * (2 * k - 1)));
        let term = Complex::with_val(work, &zp * &c);
        let small = crate::arith::cabs_log2(&term) < -(work as f64) + crate::arith::cabs_log2(&s).max(0.0);
        s += term;
        if small {
            break;
        }
        zp *= &zinv2;
    }
    Complex::with_val(prec, s - shift)
}

pub fn gamma_c(z: &Complex) -> Complex {
    Complex::with_val(z.prec().0, ln_gamma(z).exp_ref())
}

/// Real Γ(x) (MPFR).
pub fn gamma_r(x: &Float) -> Float {
    Float::with_val(x.prec(), x.gamma_ref())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_values() {
        let b = bernoulli(12);
        assert_eq!(b[1], Rational::from((-1, 2)));
        assert_eq!(b[2], Rational::from((1, 6)));
        assert_eq!(b[12], Rational::from((-691, 2730)));
        assert_eq!(b[7], 0);
    }

    #[test]
    fn hurwitz_at_one_is_zeta() {
        for k in [2u32, 3, 5] {
            let z = hurwitz_zeta(k, &Float::with_val(256, 1));
            let r = Float::with_val(256, Float::with_val(256, k).zeta_ref());
            let d = Float::with_val(256, &z - &r).abs();
            assert!(d.is_zero() || d.log2().to_f64() < -240.0);
        }
        // ζ(2, 1/2) = 3ζ(2) = π²/2
        let z = hurwitz_zeta(2, &Float::with_val(200, 0.5));
        let pi = Float::with_val(200, Constant::Pi);
        let d = Float::with_val(200, &z - Float::with_val(200, pi.square_ref()) / 2u32).abs();
        assert!(d.log2().to_f64() < -180.0);
        // shift relation across zero: ζ(2, −1/2) = 4 + ζ(2, 1/2)
        let a = hurwitz_zeta(2, &Float::with_val(200, -0.5));
        let b = Float::with_val(200, 4 + hurwitz_zeta(2, &Float::with_val(200, 0.5)));
        assert!(Float::with_val(200, &a - &b).abs().log2().to_f64() < -180.0);
    }

    #[test]
    fn complex_gamma_matches_real() {
        for x in [0.3f64, 1.0, 2.5, 7.25] {
            let g = gamma_c(&Complex::with_val(200, x));
            let r = gamma_r(&Float::with_val(200, x));
            let d = Complex::with_val(200, &g - &r);
            assert!(crate::arith::cabs_log2(&d) - r.clone().abs().log2().to_f64() < -180.0);
        }
        // Γ(1/2 + i y) modulus: |Γ(1/2+iy)|² = π / cosh(πy)
        let y = 1.3;
        let g = gamma_c(&Complex::with_val(200, (0.5, y)));
        let lhs = Float::with_val(200, g.norm_ref());
        let pi = Float::with_val(200, Constant::Pi);
        let rhs = Float::with_val(200, &pi / Float::with_val(200, Float::with_val(200, &pi * y).cosh()));
        assert!(Float::with_val(200, &lhs - &rhs).abs().log2().to_f64() < -150.0);
    }
}
