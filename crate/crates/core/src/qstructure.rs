//! Inverse κ-series α and the rational basis η_k = (2πi)^{−k} Σ α_j ε_{k−j} of the extended solution space.

use crate::arith::{cabs_f64, cabs_log2, snap_rational, two_pi_i, Scalar};
use crate::error::{FrobError, Result};
use crate::frobenius::Exponent;
use crate::jet::Jet;
use crate::linalg::{vec_norm_log2, vec_scale, vec_sub, CMat};
use crate::monodromy::{frobenius_states, kappa_via_monodromy, sigma_zero_numeric, PathSpec};
use crate::op::CanonicalOp;
use rug::{Complex, Rational};
use serde_json::{json, Value};

#[derive(Clone, Debug, PartialEq)]
pub struct AlphaSeries<T: Scalar> {
    pub alpha: Vec<T>,
}

/// Σ α_j s^j = 1/(Σ κ_j s^j).
pub fn invert_kappa<T: Scalar>(kappa: &Jet<T>) -> Result<AlphaSeries<T>> {
    if kappa.coeffs[0].is_exact_zero() {
        return Err(FrobError::LeadingCoefficientZero);
    }
    let inv = kappa.inv().ok_or(FrobError::LeadingCoefficientZero)?;
    Ok(AlphaSeries { alpha: inv.coeffs })
}

/// Numerical κ_0 below 2^{-prec/2} relative to the jet counts as zero.
pub fn invert_kappa_numeric(kappa: &Jet<Complex>, prec: u32) -> Result<AlphaSeries<Complex>> {
    if cabs_log2(&kappa.coeffs[0]) - kappa.max_mag_log2() < -(prec as f64) / 2.0 {
        return Err(FrobError::LeadingCoefficientZero);
    }
    invert_kappa(kappa)
}

#[derive(Clone, Debug)]
pub struct EtaReport {
    pub n: usize,
    pub order: usize,
    pub kappa: Vec<Complex>,
    pub alpha: Vec<Complex>,
    /// log2 of |N η_k − η_{k−1}| / |η_k| for k = 0..order−1 (η_{−1} = 0).
    pub log_shift_residual_log2: Vec<f64>,
    /// log2 of |(σ_c − 1) η_k − [k=0] δ| / |δ|.
    pub sigma_c_residual_log2: Vec<f64>,
    /// δ = Σ μ_k η_k, k < r.
    pub mu: Vec<Complex>,
    pub mu_rational: Vec<Option<Rational>>,
    pub mu_residual_log2: f64,
}

impl EtaReport {
    pub fn to_json(&self, digits: usize) -> Value {
        let c = |z: &Complex| crate::monodromy::complex_json(z, digits);
        json!({
            "n": self.n,
            "order": self.order,
            "alpha": self.alpha.iter().map(c).collect::<Vec<_>>(),
            "log_shift_residual_log2": self.log_shift_residual_log2,
            "sigma_c_residual_log2": self.sigma_c_residual_log2,
            "mu": self.mu.iter().map(c).collect::<Vec<_>>(),
            "mu_rational": self.mu_rational.iter().map(|q| q.as_ref().map(|x| x.to_string())).collect::<Vec<_>>(),
            "mu_residual_log2": self.mu_residual_log2,
        })
    }
}

/// Builds η_0..η_{n+r} for D^{n+1}L at a MUM point 0 and checks N η_k = η_{k−1} and (σ_c − 1)η_k = [k=0]δ.
pub fn eta_checks(l: &CanonicalOp, n: usize, path: &PathSpec, prec: u32) -> Result<EtaReport> {
    let work = prec + 64;
    let r = l.order();
    let ind = l.indicial(64)?;
    if ind.multiplicity_of(&Rational::new()) != r {
        return Err(FrobError::ReflectionHypothesisFails("t = 0 is not a MUM point with exponent 0".into()));
    }
    let d = n + r + 1;
    let md = kappa_via_monodromy(l, &Rational::new(), d - 1, path, prec)?;
    if md.extended_order != d {
        return Err(FrobError::Numerical(format!("extended order {} != {}", md.extended_order, d)));
    }
    let kappa: Vec<Complex> = md.kappa.coeffs.iter().map(|z| Complex::with_val(work, z)).collect();
    let tol = -(prec as f64) / 2.0;
    if cabs_log2(&kappa[0]) < tol {
        return Err(FrobError::ReflectionHypothesisFails("σ_c ε_0 = ε_0".into()));
    }
    let alpha = invert_kappa(&Jet::from_coeffs(kappa.clone()))?.alpha;
    let t0 = &md.anchor;
    let cmin = l.singularities(work).nearest_to_origin().map(|x| cabs_f64(&x.value)).unwrap_or(1.0);
    let eps = frobenius_states(l, &Exponent::Exact(Rational::new()), d - 1, t0, d, cabs_f64(t0) / cmin, work)?;
    let tpi = two_pi_i(work);
    let mut etas: Vec<Vec<Complex>> = Vec::with_capacity(d);
    for k in 0..d {
        let mut acc = vec![Complex::new(work); d];
        for j in 0..=k {
            for (a, e) in acc.iter_mut().zip(&eps[k - j]) {
                *a += Complex::with_val(work, &alpha[j] * e);
            }
        }
        let scale = Complex::with_val(work, 1 / Complex::with_val(work, tpi.pow_u(k)));
        etas.push(vec_scale(&acc, &scale));
    }
    // N = log σ_0 from a numerical loop around 0
    let (le, _) = crate::monodromy::extended_operator(l, &Rational::new(), d - 1)?;
    let s0 = sigma_zero_numeric(&le, t0, prec)?;
    let nmat = s0.m.log_unipotent();
    let mut shift = Vec::with_capacity(d);
    for k in 0..d {
        let ne = nmat.mul_vec(&etas[k]);
        let target = if k == 0 { vec![Complex::new(work); d] } else { etas[k - 1].clone() };
        shift.push((vec_norm_log2(&vec_sub(&ne, &target)) - vec_norm_log2(&etas[k])).max(-(work as f64)));
    }
    let var = md.state_sigma.sub(&CMat::identity(d, work));
    let delta = var.mul_vec(&eps[0]);
    let dn = vec_norm_log2(&delta);
    let mut sc = Vec::with_capacity(d);
    for (k, e) in etas.iter().enumerate() {
        let v = var.mul_vec(e);
        let target = if k == 0 { delta.clone() } else { vec![Complex::new(work); d] };
        sc.push((vec_norm_log2(&vec_sub(&v, &target)) - dn).max(-(work as f64)));
    }
    // δ in the η basis
    let basis = CMat::from_cols(&etas, work);
    let coords = basis.solve(&delta)?;
    let mu: Vec<Complex> = coords[..r].iter().map(|z| Complex::with_val(prec, z)).collect();
    let rest = coords[r..].iter().map(cabs_log2).fold(f64::NEG_INFINITY, f64::max) - vec_norm_log2(&coords);
    let mu_rational = mu.iter().map(|z| snap_rational(z, 1000, tol)).collect();
    Ok(EtaReport {
        n,
        order: d,
        kappa: kappa.iter().map(|z| Complex::with_val(prec, z)).collect(),
        alpha: alpha.iter().map(|z| Complex::with_val(prec, z)).collect(),
        log_shift_residual_log2: shift,
        sigma_c_residual_log2: sc,
        mu,
        mu_rational,
        mu_residual_log2: rest,
    })
}

trait PowU {
    fn pow_u(&self, k: usize) -> Complex;
}

impl PowU for Complex {
    fn pow_u(&self, k: usize) -> Complex {
        let mut acc = Complex::with_val(self.prec(), 1);
        for _ in 0..k {
            acc *= self;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inversion_formulas() {
        let k = Jet::from_coeffs(vec![Rational::from(2), Rational::from(3), Rational::from(5)]);
        let a = invert_kappa(&k).unwrap().alpha;
        assert_eq!(a[0], Rational::from((1, 2)));
        assert_eq!(a[1], Rational::from((-3, 4)));
        // (−κ_2 κ_0 + κ_1²)/κ_0³
        assert_eq!(a[2], Rational::from((-10 + 9, 8)));
        let z = Jet::from_coeffs(vec![Rational::new(), Rational::from(1)]);
        assert_eq!(invert_kappa(&z), Err(FrobError::LeadingCoefficientZero));
        let one = Jet::from_coeffs(vec![Rational::from(1), Rational::new(), Rational::new()]);
        assert_eq!(invert_kappa(&one).unwrap().alpha, one.coeffs);
    }
}
