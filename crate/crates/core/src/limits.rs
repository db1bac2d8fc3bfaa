//! Frobenius constants from coefficient ratios: λ_k = lim a_n^{(k)}(ρ)/(k!·a_n(ρ)).

use crate::arith::{cabs_log2, fmt_complex};
use crate::error::{FrobError, Result};
use crate::frobenius::{frobenius_table, principal_log, Exponent, FrobeniusTable, TableMode};
use crate::jet::Jet;
use crate::op::CanonicalOp;
use crate::poly::QPoly;
use crate::special::{gamma_r, polygamma};
use rayon::prelude::*;
use rug::{Complex, Float, Rational};
use serde_json::{json, Value};

#[derive(Clone, Debug)]
pub struct LimitReport {
    pub lambda: Vec<Complex>,
    pub kappa_ratios: Vec<Complex>,
    pub extrapolation_order: usize,
    /// log2 of the largest |λ_k(N) − λ_k(N/2)|.
    pub consistency_gap_log2: f64,
    pub n: usize,
    pub c: Complex,
    pub verified: Vec<String>,
    pub unverified: Vec<String>,
}

impl LimitReport {
    pub fn to_json(&self, digits: usize) -> Value {
        json!({
            "lambda": self.lambda.iter().map(|z| fmt_complex(z, digits)).collect::<Vec<_>>(),
            "kappa_ratios": self.kappa_ratios.iter().map(|z| fmt_complex(z, digits)).collect::<Vec<_>>(),
            "extrapolation_order": self.extrapolation_order,
            "consistency_gap_log2": self.consistency_gap_log2,
            "N": self.n,
            "c": fmt_complex(&self.c, digits),
            "verified_hypotheses": self.verified,
            "unverified_hypotheses": self.unverified,
        })
    }
}

/// Neville extrapolation of (x_i, y_i) to x = 0.
fn extrapolate_to_zero(xs: &[Float], ys: &[Complex]) -> Complex {
    let prec = ys[0].prec().0;
    let mut p: Vec<Complex> = ys.to_vec();
    let n = xs.len();
    for m in 1..n {
        for i in 0..(n - m) {
            // p_i = (x_{i+m} p_i − x_i p_{i+1}) / (x_{i+m} − x_i)
            let num = Complex::with_val(prec, &p[i] * &xs[i + m]) - Complex::with_val(prec, &p[i + 1] * &xs[i]);
            let den = Float::with_val(prec, &xs[i + m] - &xs[i]);
            p[i] = num / den;
        }
    }
    p[0].clone()
}

fn ratio(table: &FrobeniusTable, n: usize, k: usize, prec: u32) -> Complex {
    if let (Some(a), Some(b)) = (table.exact_coeff(n, k), table.exact_coeff(n, 0)) {
        return Complex::with_val(prec, Rational::from(a / b));
    }
    let a = table.coeff(n, k, prec);
    let b = table.coeff(n, 0, prec);
    Complex::with_val(prec, a / b)
}

fn extrapolated(table: &FrobeniusTable, k: usize, n: usize, order: usize, prec: u32) -> Complex {
    let step = (n / 64).max(1);
    let pts: Vec<usize> = (0..=order).map(|i| n - i * step).collect();
    let xs: Vec<Float> = pts.iter().map(|&m| Float::with_val(prec, 1) / m as u32).collect();
    let ys: Vec<Complex> = pts.iter().map(|&m| ratio(table, m, k, prec)).collect();
    extrapolate_to_zero(&xs, &ys)
}

/// λ_0..λ_K by Richardson extrapolation in 1/n on samples n = N, N − N/64, …; also the N vs N/2 gap.
pub fn lambda_limits(table: &FrobeniusTable, k: usize, n: usize, order: usize, prec: u32) -> Result<(Vec<Complex>, f64, Vec<String>)> {
    if n + 1 > table.n || k > table.k {
        return Err(FrobError::InvalidArgument(format!("table too small for N={} K={}", n, k)));
    }
    if n < 128 || order * (n / 64).max(1) >= n / 2 {
        return Err(FrobError::InvalidArgument("N too small for the extrapolation window".into()));
    }
    let mut notes = Vec::new();
    // (iii): same sign of a_n(ρ) over the last quarter
    let sgn = |m: usize| -> Result<i32> {
        let v = table.coeff(m, 0, 64);
        if cabs_log2(&Complex::with_val(64, v.imag())) > cabs_log2(&v) - 40.0 {
            return Err(FrobError::SignConditionViolated(m));
        }
        Ok(if v.real().is_sign_negative() { -1 } else { 1 })
    };
    let s0 = sgn(n)?;
    for m in (3 * n / 4)..=n {
        if sgn(m)? != s0 {
            return Err(FrobError::SignConditionViolated(m));
        }
    }
    notes.push(format!("(iii) a_n(rho) of constant sign for {} <= n <= {}", 3 * n / 4, n));
    let half = n / 2;
    let res: Vec<Result<(Complex, f64)>> = (0..=k)
        .into_par_iter()
        .map(|kk| {
            if kk == 0 {
                return Ok((Complex::with_val(prec, 1), f64::NEG_INFINITY));
            }
            let raw_n = ratio(table, n, kk, prec);
            let raw_h = ratio(table, half, kk, prec);
            let drift = Complex::with_val(prec, &raw_n - &raw_h);
            if cabs_log2(&drift) > (1.0 + crate::arith::cabs_f64(&raw_h)).log2() {
                return Err(FrobError::DivergentRatio(kk));
            }
            let a = extrapolated(table, kk, n, order, prec);
            let b = extrapolated(table, kk, half, order, prec);
            let gap = cabs_log2(&Complex::with_val(prec, &a - &b));
            Ok((a, gap))
        })
        .collect();
    let mut lambda = Vec::with_capacity(k + 1);
    let mut gap = f64::NEG_INFINITY;
    for r in res {
        let (a, g) = r?;
        lambda.push(a);
        gap = gap.max(g);
    }
    Ok((lambda, gap, notes))
}

/// κ_k/κ_0 = Σ_j log(c)^j/j!·λ_{k−j}; `log_c` overrides the principal branch.
pub fn kappa_from_lambda(lambda: &[Complex], c: &Complex, log_c: Option<&Complex>) -> Vec<Complex> {
    let prec = lambda.first().map(|z| z.prec().0).unwrap_or(c.prec().0);
    let lc = log_c.cloned().unwrap_or_else(|| principal_log(&Complex::with_val(prec, c)));
    let mut pw = vec![Complex::with_val(prec, 1)];
    for j in 1..lambda.len() {
        let v = Complex::with_val(prec, &pw[j - 1] * &lc) / j as u32;
        pw.push(v);
    }
    (0..lambda.len())
        .map(|k| {
            let mut s = Complex::new(prec);
            for j in 0..=k {
                s += Complex::with_val(prec, &pw[j] * &lambda[k - j]);
            }
            s
        })
        .collect()
}

/// Whole pipeline: table at ρ, limits, κ ratios at the nearest singularity c (assumed real positive).
pub fn kappa_limits(l: &CanonicalOp, rho: &Rational, k: usize, n: usize, order: usize, prec: u32) -> Result<LimitReport> {
    let table = frobenius_table(l, &Exponent::Exact(rho.clone()), k, n + 1, prec, TableMode::Auto)?;
    let sing = l.singularities(prec);
    let c = sing.nearest_to_origin().ok_or_else(|| FrobError::InvalidArgument("no finite singularity".into()))?.value.clone();
    let (lambda, gap, mut verified) = lambda_limits(&table, k, n, order, prec)?;
    let mut unverified = vec!["(ii) analyticity of sigma_c-invariant solutions of (D-rho)^j L is assumed".to_string()];
    // (i): with a_n c^n ~ n^p, φ_{ρ,0} is unbounded at c⁻ iff p ≥ −1
    let lc = principal_log(&c);
    let tail = |m: usize| -> f64 {
        let a = table.coeff(m, 0, 64);
        cabs_log2(&a) + (m as f64) * lc.real().to_f64() / std::f64::consts::LN_2
    };
    let pw = tail(n) - tail(n / 2);
    if pw >= -1.05 {
        verified.push(format!("(i) a_n c^n ~ n^{:.3}, so phi_{{rho,0}} is unbounded at c-", pw));
    } else {
        unverified.push(format!("(i) a_n c^n ~ n^{:.3} is summable; phi_{{rho,0}} stays bounded at c-", pw));
    }
    if sing.finite.iter().filter(|r| (crate::arith::cabs_f64(&r.value) - crate::arith::cabs_f64(&c)).abs() < 1e-12).count() > 1 {
        unverified.push("several singularities share the closest modulus".into());
    }
    let kappa_ratios = kappa_from_lambda(&lambda, &c, None);
    Ok(LimitReport { lambda, kappa_ratios, extrapolation_order: order, consistency_gap_log2: gap, n, c, verified, unverified })
}

/// Hypergeometric operator Π(D+β_j−1) − t·Π(D+α_j).
pub fn hypergeometric_operator(alphas: &[Rational], betas: &[Rational]) -> CanonicalOp {
    let mut p0 = QPoly::one();
    for b in betas {
        p0 = p0.mul(&QPoly::new(vec![Rational::from(b - 1u32), Rational::from(1)]));
    }
    let mut p1 = QPoly::one();
    for a in alphas {
        p1 = p1.mul(&QPoly::new(vec![a.clone(), Rational::from(1)]));
    }
    CanonicalOp::from_theta_form(&crate::op::ThetaForm { p: vec![p0, p1.neg()] })
}

/// Taylor coefficients of 1/A(s) at s = ρ, A(s) = ΠΓ(s+α_j)/ΠΓ(s+β_j), via polygamma values.
pub fn hypergeometric_kappa(alphas: &[Rational], betas: &[Rational], rho: &Rational, k: usize, prec: u32) -> Result<Jet<Complex>> {
    for (i, a) in alphas.iter().enumerate() {
        for (j, b) in betas.iter().enumerate() {
            if *Rational::from(a - b).denom() == 1 {
                return Err(FrobError::IrreducibilityViolated(i, j));
            }
        }
    }
    let l = hypergeometric_operator(alphas, betas);
    let idata = l.indicial(prec)?;
    if !idata.is_admissible(rho) {
        return Err(FrobError::ExponentNotAdmissible(rho.to_string(), 0));
    }
    let work = prec + 32;
    let args = |v: &[Rational]| -> Vec<Float> { v.iter().map(|a| Float::with_val(work, Rational::from(a + rho))).collect() };
    let (xa, xb) = (args(alphas), args(betas));
    for x in xa.iter().chain(&xb) {
        if x.is_integer() && *x <= 0 {
            return Err(FrobError::ExponentNotAdmissible(rho.to_string(), 0));
        }
    }
    // A(ρ)
    let mut a0 = Float::with_val(work, 1);
    for x in &xa {
        a0 *= gamma_r(x);
    }
    for x in &xb {
        a0 /= gamma_r(x);
    }
    // −(log A(ρ+ε) − log A(ρ)) = Σ_{m≥1} g_m ε^m
    let mut g = vec![Float::new(work); k + 1];
    for (m, gm) in g.iter_mut().enumerate().skip(1) {
        let mut s = Float::new(work);
        for x in &xa {
            s -= polygamma(m as u32 - 1, x);
        }
        for x in &xb {
            s += polygamma(m as u32 - 1, x);
        }
        *gm = s / Float::with_val(work, crate::arith::factorial(m as u32));
    }
    // exp of a series without constant term: m·e_m = Σ_{j=1}^{m} j g_j e_{m−j}
    let mut e = vec![Float::with_val(work, 1)];
    for m in 1..=k {
        let mut s = Float::new(work);
        for j in 1..=m {
            s += Float::with_val(work, &g[j] * &e[m - j]) * j as u32;
        }
        e.push(s / m as u32);
    }
    Ok(Jet::from_coeffs(e.into_iter().map(|x| Complex::with_val(prec, x / &a0)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::cabs_log2;

    fn q(a: i64, b: i64) -> Rational {
        Rational::from((a, b))
    }

    #[test]
    fn trivial_kappa_from_lambda() {
        let one = Complex::with_val(64, 1);
        let lam = vec![one.clone(), Complex::new(64), Complex::new(64)];
        let r = kappa_from_lambda(&lam, &one, None);
        assert_eq!(r[0], one);
        assert!(r[1].is_zero() && r[2].is_zero());
    }

    #[test]
    fn legendre_oracle_kappa0() {
        let h = q(1, 2);
        let j = hypergeometric_kappa(&[h.clone(), h.clone()], &[q(1, 1), q(1, 1)], &Rational::new(), 3, 128).unwrap();
        let pi = Float::with_val(128, rug::float::Constant::Pi);
        let d = Complex::with_val(128, &j.coeffs[0] - Float::with_val(128, 1 / pi));
        assert!(cabs_log2(&d) < -120.0);
    }

    #[test]
    fn irreducibility_checked() {
        let r = hypergeometric_kappa(&[q(1, 2), q(1, 1)], &[q(1, 1), q(1, 1)], &Rational::new(), 2, 64);
        assert_eq!(r.unwrap_err(), FrobError::IrreducibilityViolated(1, 0));
    }

    #[test]
    fn legendre_limits_match_oracle() {
        let h = q(1, 2);
        let (al, be) = (vec![h.clone(), h.clone()], vec![q(1, 1), q(1, 1)]);
        let l = hypergeometric_operator(&al, &be);
        let rep = kappa_limits(&l, &Rational::new(), 4, 1200, 8, 256).unwrap();
        let or = hypergeometric_kappa(&al, &be, &Rational::new(), 4, 256).unwrap();
        for k in 1..=4 {
            let want = Complex::with_val(256, &or.coeffs[k] / &or.coeffs[0]);
            let d = Complex::with_val(256, &rep.kappa_ratios[k] - &want);
            assert!(cabs_log2(&d) < -50.0, "k={} {} vs {}", k, fmt_complex(&rep.kappa_ratios[k], 20), fmt_complex(&want, 20));
        }
    }
}
