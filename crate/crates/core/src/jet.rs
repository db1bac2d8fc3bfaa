//! Truncated power series in ε = s - ρ.

use crate::arith::Scalar;
use crate::poly::QPoly;

#[derive(Clone, Debug, PartialEq)]
pub struct Jet<T: Scalar> {
    pub coeffs: Vec<T>,
}

impl<T: Scalar> Jet<T> {
    /// Zero jet of order `k` (k+1 coefficients).
    pub fn zero(k: usize, ctx: T::Ctx) -> Self {
        Jet { coeffs: (0..=k).map(|_| T::zero(ctx)).collect() }
    }

    pub fn constant(v: T, k: usize) -> Self {
        let ctx = v.ctx();
        let mut j = Self::zero(k, ctx);
        j.coeffs[0] = v;
        j
    }

    pub fn from_coeffs(coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty());
        Jet { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn add(&self, o: &Self) -> Self {
        Jet { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.sadd(b)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Jet { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.ssub(b)).collect() }
    }

    pub fn neg(&self) -> Self {
        Jet { coeffs: self.coeffs.iter().map(|a| a.sneg()).collect() }
    }

    pub fn scale(&self, s: &T) -> Self {
        Jet { coeffs: self.coeffs.iter().map(|a| a.smul(s)).collect() }
    }

    /// Product truncated at the common order.
    pub fn mul(&self, o: &Self) -> Self {
        let k = self.order().min(o.order());
        let ctx = self.coeffs[0].ctx();
        let mut out: Vec<T> = (0..=k).map(|_| T::zero(ctx)).collect();
        for i in 0..=k {
            if self.coeffs[i].is_exact_zero() {
                continue;
            }
            for j in 0..=(k - i) {
                if o.coeffs[j].is_exact_zero() {
                    continue;
                }
                out[i + j] = out[i + j].sadd(&self.coeffs[i].smul(&o.coeffs[j]));
            }
        }
        Jet { coeffs: out }
    }

    /// Multiplicative inverse; the constant term must be nonzero.
    pub fn inv(&self) -> Option<Self> {
        if self.coeffs[0].is_exact_zero() {
            return None;
        }
        let k = self.order();
        let ctx = self.coeffs[0].ctx();
        let inv0 = T::one(ctx).sdiv(&self.coeffs[0]);
        let mut out: Vec<T> = Vec::with_capacity(k + 1);
        out.push(inv0.clone());
        for n in 1..=k {
            let mut s = T::zero(ctx);
            for i in 1..=n {
                if self.coeffs[i].is_exact_zero() {
                    continue;
                }
                s = s.sadd(&self.coeffs[i].smul(&out[n - i]));
            }
            out.push(s.smul(&inv0).sneg());
        }
        Some(Jet { coeffs: out })
    }

    /// p(x + ε) for a rational polynomial p, by repeated synthetic division.
    pub fn poly_at(p: &QPoly, x: &T, k: usize) -> Self {
        let ctx = x.ctx();
        let mut c: Vec<T> = p.coeffs().iter().map(|q| T::from_q(q, ctx)).collect();
        let n = c.len();
        let mut out = Vec::with_capacity(k + 1);
        for i in 0..=k {
            if i >= n {
                out.push(T::zero(ctx));
                continue;
            }
            // after this pass c[i] holds p^{(i)}(x)/i!
            for j in (i..n - 1).rev() {
                let t = c[j + 1].smul(x);
                c[j] = c[j].sadd(&t);
            }
            out.push(c[i].clone());
        }
        if n == 0 {
            return Self::zero(k, ctx);
        }
        Jet { coeffs: out }
    }

    pub fn max_mag_log2(&self) -> f64 {
        self.coeffs.iter().map(|c| c.mag_log2()).fold(f64::NEG_INFINITY, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::{Complex, Rational};

    fn rj(v: &[i64]) -> Jet<Rational> {
        Jet::from_coeffs(v.iter().map(|&x| Rational::from(x)).collect())
    }

    #[test]
    fn inverse_of_one_minus_eps() {
        let j = rj(&[1, -1, 0, 0]);
        assert_eq!(j.inv().unwrap(), rj(&[1, 1, 1, 1]));
        assert_eq!(j.mul(&j.inv().unwrap()), rj(&[1, 0, 0, 0]));
        assert!(rj(&[0, 1]).inv().is_none());
    }

    #[test]
    fn polynomial_taylor_jet() {
        // (x+1)^3 at x = 2: 27 + 27ε + 9ε² + ε³
        let p = QPoly::from_i64(&[1, 3, 3, 1]);
        let j = Jet::poly_at(&p, &Rational::from(2), 4);
        assert_eq!(j, rj(&[27, 27, 9, 1, 0]));
        let jc = Jet::poly_at(&p, &Complex::with_val(64, 2), 2);
        assert_eq!(jc.coeffs[1], Complex::with_val(64, 27));
    }
}
