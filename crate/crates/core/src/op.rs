//! Exact operator algebra in the theta derivation D = t d/dt.

use crate::arith::{binom, stirling2};
use crate::error::{FrobError, Result};
use crate::poly::{exact_roots, PolyRoot, QPoly};
use rug::{Complex, Integer, Rational};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::fmt;

/// Operator Σ_b coeffs[b](t)·D^b in D-on-the-right normal form.
#[derive(Clone, Default)]
pub struct CanonicalOp {
    coeffs: Vec<QPoly>,
    /// Polynomial the source expression was multiplied by on the left to clear t-denominators.
    pub left_multiplier: Option<QPoly>,
}

impl PartialEq for CanonicalOp {
    fn eq(&self, o: &Self) -> bool {
        self.coeffs == o.coeffs
    }
}
impl Eq for CanonicalOp {}

impl fmt::Debug for CanonicalOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalOp({})", self)
    }
}

impl fmt::Display for CanonicalOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for b in (0..self.coeffs.len()).rev() {
            let q = &self.coeffs[b];
            if q.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let qs = q.to_string_var("t");
            match b {
                0 => write!(f, "({})", qs)?,
                1 => write!(f, "({})*D", qs)?,
                _ => write!(f, "({})*D^{}", qs, b)?,
            }
        }
        Ok(())
    }
}

impl CanonicalOp {
    /// Builds from coefficient polynomials indexed by D-power; trailing zeros dropped.
    pub fn from_coeffs(mut coeffs: Vec<QPoly>) -> Self {
        while coeffs.last().is_some_and(|q| q.is_zero()) {
            coeffs.pop();
        }
        CanonicalOp { coeffs, left_multiplier: None }
    }

    pub fn zero() -> Self {
        Self::from_coeffs(vec![])
    }

    pub fn one() -> Self {
        Self::from_coeffs(vec![QPoly::one()])
    }

    pub fn d() -> Self {
        Self::from_coeffs(vec![QPoly::zero(), QPoly::one()])
    }

    pub fn t() -> Self {
        Self::from_coeffs(vec![QPoly::from_i64(&[0, 1])])
    }

    pub fn scalar(q: Rational) -> Self {
        Self::from_coeffs(vec![QPoly::constant(q)])
    }

    /// Multiplication operator by a polynomial in t.
    pub fn poly(p: QPoly) -> Self {
        Self::from_coeffs(vec![p])
    }

    /// (D - a)^k.
    pub fn d_minus(a: &Rational, k: u32) -> Self {
        let base = Self::from_coeffs(vec![QPoly::constant(Rational::from(-a)), QPoly::one()]);
        let mut r = Self::one();
        for _ in 0..k {
            r = base.mul(&r);
        }
        r
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Order r (0 for the zero operator).
    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Coefficient of D^b.
    pub fn coeff(&self, b: usize) -> QPoly {
        self.coeffs.get(b).cloned().unwrap_or_default()
    }

    pub fn coeffs(&self) -> &[QPoly] {
        &self.coeffs
    }

    /// Leading coefficient q_0(t), the coefficient of D^r.
    pub fn leading(&self) -> QPoly {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    /// Largest power of t occurring.
    pub fn t_degree(&self) -> usize {
        self.coeffs.iter().filter_map(|q| q.degree()).max().unwrap_or(0)
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::from_coeffs((0..n).map(|b| self.coeff(b).add(&o.coeff(b))).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|q| q.neg()).collect())
    }

    pub fn scale(&self, q: &Rational) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|p| p.scale(q)).collect())
    }

    /// Left multiplication by a polynomial in t.
    pub fn left_mul_poly(&self, p: &QPoly) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|q| p.mul(q)).collect())
    }

    /// Product self·o using D·t^a = t^a·(D + a).
    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut out = vec![QPoly::zero(); self.order() + o.order() + 1];
        for (b, qb) in self.coeffs.iter().enumerate() {
            if qb.is_zero() {
                continue;
            }
            for (e, oe) in o.coeffs.iter().enumerate() {
                for (c, oc) in oe.coeffs().iter().enumerate() {
                    if *oc == 0 {
                        continue;
                    }
                    // D^b t^c = t^c (D + c)^b
                    let cq = Rational::from(c as u32);
                    let mut cpow = Rational::from(1);
                    for i in (0..=b).rev() {
                        // coefficient of D^i in (D+c)^b is C(b,i) c^{b-i}
                        let k = b - i;
                        if k > 0 {
                            cpow *= &cq;
                        }
                        let w = Rational::from(&binom(b as u32, i as u32) * &cpow) * oc;
                        if w == 0 {
                            continue;
                        }
                        let term = qb.shift_up(c).scale(&w);
                        out[i + e] = out[i + e].add(&term);
                    }
                }
            }
        }
        Self::from_coeffs(out)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut r = Self::one();
        for _ in 0..e {
            r = self.mul(&r);
        }
        r
    }

    /// Formal adjoint Σ (-D)^b q_b(t), re-normalized.
    pub fn adjoint(&self) -> Self {
        let mut acc = Self::zero();
        let mut dpow = Self::one();
        let minus_d = Self::d().neg();
        for qb in self.coeffs.iter() {
            if !qb.is_zero() {
                acc = acc.add(&dpow.mul(&Self::poly(qb.clone())));
            }
            dpow = minus_d.mul(&dpow);
        }
        acc
    }

    /// Left composition factor·self.
    pub fn left_compose(&self, factor: &Self) -> Self {
        factor.mul(self)
    }

    /// (t - c)^{-1}·self when every coefficient is divisible by t - c.
    pub fn left_divide_by_linear(&self, c: &Rational) -> Result<Self> {
        let lin = QPoly::linear_root(c);
        let mut out = Vec::with_capacity(self.coeffs.len());
        for q in &self.coeffs {
            let (qq, r) = q.div_rem(&lin);
            if !r.is_zero() {
                return Err(FrobError::NotDivisible(c.to_string()));
            }
            out.push(qq);
        }
        Ok(Self::from_coeffs(out))
    }

    /// Theta form Σ_j t^j p_j(D).
    pub fn theta_form(&self) -> ThetaForm {
        let a = self.t_degree();
        let mut p = Vec::with_capacity(a + 1);
        for j in 0..=a {
            p.push(QPoly::new(self.coeffs.iter().map(|q| q.coeff(j)).collect()));
        }
        if self.is_zero() {
            p = vec![QPoly::zero()];
        }
        ThetaForm { p }
    }

    pub fn from_theta_form(tf: &ThetaForm) -> Self {
        let r = tf.p.iter().filter_map(|p| p.degree()).max().unwrap_or(0);
        let mut coeffs = vec![Vec::new(); r + 1];
        for b in 0..=r {
            coeffs[b] = tf.p.iter().map(|p| p.coeff(b)).collect();
        }
        Self::from_coeffs(coeffs.into_iter().map(QPoly::new).collect())
    }

    /// Coefficients Q_k(t) of the ∂_t-form Σ Q_k ∂^k, using D^b = Σ S(b,k) t^k ∂^k.
    pub fn to_partial_form(&self) -> Vec<QPoly> {
        let r = self.order();
        let s2 = stirling2(r);
        let mut out = vec![QPoly::zero(); r + 1];
        for (b, qb) in self.coeffs.iter().enumerate() {
            for k in 0..=b {
                if s2[b][k] == 0 {
                    continue;
                }
                let term = qb.shift_up(k).scale(&Rational::from(s2[b][k].clone()));
                out[k] = out[k].add(&term);
            }
        }
        out
    }

    /// Applies the operator to a polynomial in t (D acting as t d/dt).
    pub fn apply_to_poly(&self, f: &QPoly) -> QPoly {
        let mut acc = QPoly::zero();
        let mut g = f.clone();
        for qb in &self.coeffs {
            acc = acc.add(&qb.mul(&g));
            g = g.theta_derivative();
        }
        acc
    }

    /// Indicial data at t = 0.
    pub fn indicial(&self, prec: u32) -> Result<IndicialData> {
        if self.leading().coeff(0) == 0 {
            return Err(FrobError::ZeroLeadingCoeffAtOrigin);
        }
        let i_poly = self.theta_form().p[0].clone();
        IndicialData::from_poly(i_poly, prec)
    }

    /// Finite nonzero singular points (roots of the leading coefficient) and flags for 0 and ∞.
    pub fn singularities(&self, prec: u32) -> Singularities {
        let lead = self.leading();
        let v = lead.valuation();
        let stripped = QPoly::new(lead.coeffs()[v..].to_vec());
        let finite = exact_roots(&stripped, prec);
        let tf = self.theta_form();
        let r = self.order();
        let falling = falling_factorial_poly(r);
        let p0 = tf.p[0].monic();
        let at_zero = v > 0 || p0 != falling;
        let a = tf.p.len() - 1;
        let pa = tf.p[a].reflect().monic();
        let at_infinity = lead.degree() != Some(a) || pa != falling;
        Singularities { finite, at_zero, at_infinity }
    }

    /// The bracket matrix entries ⟨ρ_j, e_i⟩ as polynomials in t; entry [j][i].
    pub fn bracket_matrix(&self) -> BracketMatrix {
        let r = self.order();
        // q_ν multiplies D^{r-ν}
        let q = |nu: usize| self.coeff(r - nu);
        let mut entries = vec![vec![QPoly::zero(); r]; r];
        for j in 0..r {
            for i in 0..r {
                let mut acc = QPoly::zero();
                let total = r - 1 - i;
                for h in 0..=total {
                    let nu = total - h;
                    if h < j {
                        continue;
                    }
                    let mut d = q(nu);
                    for _ in 0..(h - j) {
                        d = d.theta_derivative();
                    }
                    let mut w = binom(h as u32, j as u32);
                    if h % 2 == 1 {
                        w = -w;
                    }
                    acc = acc.add(&d.scale(&w));
                }
                entries[j][i] = acc;
            }
        }
        BracketMatrix { entries }
    }

    /// Canonical JSON: `{"order": r, "coeffs": [[[num,den],...], ...]}` with coeffs[j] the coefficient of D^j.
    pub fn to_json(&self) -> Value {
        let coeffs: Vec<Value> = self.coeffs.iter().map(poly_to_json).collect();
        let mut v = json!({"order": self.order(), "coeffs": coeffs});
        if let Some(m) = &self.left_multiplier {
            v["left_multiplier"] = poly_to_json(m);
        }
        v
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let arr = v["coeffs"].as_array().ok_or_else(|| FrobError::InvalidArgument("missing coeffs".into()))?;
        let mut coeffs = Vec::new();
        for p in arr {
            coeffs.push(poly_from_json(p)?);
        }
        let op = Self::from_coeffs(coeffs);
        if let Some(r) = v["order"].as_u64() {
            if r as usize != op.order() {
                return Err(FrobError::InvalidArgument("order does not match coefficients".into()));
            }
        }
        Ok(op)
    }
}

fn int_to_json(i: &Integer) -> Value {
    match i.to_i64() {
        Some(x) => json!(x),
        None => json!(i.to_string()),
    }
}

fn int_from_json(v: &Value) -> Result<Integer> {
    if let Some(x) = v.as_i64() {
        return Ok(Integer::from(x));
    }
    if let Some(s) = v.as_str() {
        return Integer::from_str_radix(s, 10).map_err(|_| FrobError::InvalidArgument(format!("bad integer {}", s)));
    }
    Err(FrobError::InvalidArgument(format!("bad integer {}", v)))
}

pub fn poly_to_json(p: &QPoly) -> Value {
    Value::Array(p.coeffs().iter().map(|q| json!([int_to_json(q.numer()), int_to_json(q.denom())])).collect())
}

pub fn poly_from_json(v: &Value) -> Result<QPoly> {
    let arr = v.as_array().ok_or_else(|| FrobError::InvalidArgument("polynomial must be an array".into()))?;
    let mut c = Vec::new();
    for pair in arr {
        let pr = pair.as_array().filter(|a| a.len() == 2).ok_or_else(|| FrobError::InvalidArgument("coefficient must be [num, den]".into()))?;
        let den = int_from_json(&pr[1])?;
        if den == 0 {
            return Err(FrobError::InvalidArgument("zero denominator".into()));
        }
        c.push(Rational::from((int_from_json(&pr[0])?, den)));
    }
    Ok(QPoly::new(c))
}

/// x(x-1)…(x-r+1).
pub fn falling_factorial_poly(r: usize) -> QPoly {
    let mut p = QPoly::one();
    for k in 0..r {
        p = p.mul(&QPoly::new(vec![Rational::from(-(k as i64)), Rational::from(1)]));
    }
    p
}

/// Σ_j t^j p_j(D).
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaForm {
    pub p: Vec<QPoly>,
}

impl ThetaForm {
    /// Largest t-power a.
    pub fn a(&self) -> usize {
        self.p.len() - 1
    }

    pub fn to_json(&self) -> Value {
        json!({"a": self.a(), "p": self.p.iter().map(poly_to_json).collect::<Vec<_>>()})
    }
}

/// Indicial polynomial, its roots and the admissible exponent set.
#[derive(Clone, Debug)]
pub struct IndicialData {
    pub poly: QPoly,
    pub roots: Vec<PolyRoot>,
    /// Indices into `roots` of admissible exponents.
    pub admissible: Vec<usize>,
}

impl IndicialData {
    pub fn from_poly(poly: QPoly, prec: u32) -> Result<Self> {
        let roots = exact_roots(&poly, prec);
        let mut admissible = Vec::new();
        let tol = -(prec as f64) / 2.0;
        for (i, r) in roots.iter().enumerate() {
            let mut ok = true;
            for (j, o) in roots.iter().enumerate() {
                match (&r.exact, &o.exact) {
                    (Some(a), Some(b)) => {
                        let d = Rational::from(b - a);
                        if d > 0 && d.denom() == &1 {
                            ok = false;
                        }
                    }
                    (Some(_), None) | (None, Some(_)) => {}
                    (None, None) => {
                        if i == j {
                            continue;
                        }
                        let d = Complex::with_val(prec, &o.value - &r.value);
                        let n = d.real().to_f64().round();
                        if n < 1.0 {
                            continue;
                        }
                        let off = Complex::with_val(prec, &d - n);
                        if crate::arith::cabs_log2(&off) < tol {
                            // confirm exactly: gcd(I(s), I(s+n)) must vanish at this root
                            let shifted = poly.taylor_shift(&Rational::from(n as i64));
                            let g = QPoly::gcd(&poly, &shifted);
                            let gv = g.eval_c(&r.value);
                            if g.degree().unwrap_or(0) > 0 && crate::arith::cabs_log2(&gv) < tol {
                                ok = false;
                            } else {
                                return Err(FrobError::AmbiguousExponentLattice(
                                    crate::arith::fmt_complex(&r.value, 20),
                                    crate::arith::fmt_complex(&o.value, 20),
                                ));
                            }
                        }
                    }
                }
            }
            if ok {
                admissible.push(i);
            }
        }
        Ok(IndicialData { poly, roots, admissible })
    }

    /// Multiplicity of an exact exponent (0 if not a root).
    pub fn multiplicity_of(&self, rho: &Rational) -> usize {
        self.roots.iter().find(|r| r.exact.as_ref() == Some(rho)).map(|r| r.multiplicity).unwrap_or(0)
    }

    pub fn is_admissible(&self, rho: &Rational) -> bool {
        self.admissible.iter().any(|&i| self.roots[i].exact.as_ref() == Some(rho))
    }

    pub fn to_json(&self, prec_digits: usize) -> Value {
        let roots: Vec<Value> = self
            .roots
            .iter()
            .map(|r| {
                json!({
                    "value": r.exact.as_ref().map(|q| q.to_string()).unwrap_or_else(|| crate::arith::fmt_complex(&r.value, prec_digits)),
                    "exact": r.exact.is_some(),
                    "multiplicity": r.multiplicity,
                })
            })
            .collect();
        let adm: Vec<String> = self
            .admissible
            .iter()
            .map(|&i| self.roots[i].exact.as_ref().map(|q| q.to_string()).unwrap_or_else(|| crate::arith::fmt_complex(&self.roots[i].value, prec_digits)))
            .collect();
        json!({"I": self.poly.to_string_var("s"), "roots": roots, "R_set": adm})
    }
}

/// Singular points of an operator.
#[derive(Clone, Debug)]
pub struct Singularities {
    /// Nonzero roots of the leading coefficient.
    pub finite: Vec<PolyRoot>,
    pub at_zero: bool,
    pub at_infinity: bool,
}

impl Singularities {
    /// Distance from `z` to the nearest finite nonzero singularity (and optionally 0).
    pub fn distance_from(&self, z: &Complex, include_zero: bool) -> f64 {
        let mut d = f64::INFINITY;
        for r in &self.finite {
            let w = Complex::with_val(64, &r.value - z);
            d = d.min(crate::arith::cabs_f64(&w));
        }
        if include_zero {
            d = d.min(crate::arith::cabs_f64(z));
        }
        d
    }

    /// Nearest finite nonzero singularity to the origin.
    pub fn nearest_to_origin(&self) -> Option<&PolyRoot> {
        self.finite.iter().min_by(|a, b| crate::arith::cabs_f64(&a.value).partial_cmp(&crate::arith::cabs_f64(&b.value)).unwrap())
    }
}

/// Bracket coefficients ⟨ρ_j, e_i⟩, stored as entries[j][i].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BracketMatrix {
    #[serde(skip)]
    pub entries: Vec<Vec<QPoly>>,
}

impl BracketMatrix {
    pub fn to_json(&self) -> Value {
        Value::Array(self.entries.iter().map(|row| Value::Array(row.iter().map(poly_to_json).collect())).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64) -> Rational {
        Rational::from(a)
    }

    fn apery() -> CanonicalOp {
        // D^3 - t(34D^3+51D^2+27D+5) + t^2(D+1)^3
        CanonicalOp::from_coeffs(vec![
            QPoly::from_i64(&[0, -5, 1]),
            QPoly::from_i64(&[0, -27, 3]),
            QPoly::from_i64(&[0, -51, 3]),
            QPoly::from_i64(&[1, -34, 1]),
        ])
    }

    #[test]
    fn weyl_rule() {
        let dt = CanonicalOp::d().mul(&CanonicalOp::t());
        assert_eq!(dt.coeff(1), QPoly::from_i64(&[0, 1]));
        assert_eq!(dt.coeff(0), QPoly::from_i64(&[0, 1]));
    }

    #[test]
    fn apery_theta_form_and_indicial() {
        let l = apery();
        let tf = l.theta_form();
        assert_eq!(tf.p[0], QPoly::from_i64(&[0, 0, 0, 1]));
        assert_eq!(tf.p[1], QPoly::from_i64(&[-5, -27, -51, -34]));
        assert_eq!(tf.p[2], QPoly::from_i64(&[1, 3, 3, 1]));
        assert_eq!(CanonicalOp::from_theta_form(&tf), l);
        let ind = l.indicial(128).unwrap();
        assert_eq!(ind.roots.len(), 1);
        assert_eq!(ind.multiplicity_of(&q(0)), 3);
        assert!(ind.is_admissible(&q(0)));
    }

    #[test]
    fn apery_is_anti_self_adjoint() {
        let l = apery();
        assert_eq!(l.adjoint(), l.neg());
    }

    #[test]
    fn small_adjoint_example() {
        // D(D+1) - t(D+1)^2  ->  (D-1)D - tD^2
        let d = CanonicalOp::d();
        let one = CanonicalOp::one();
        let l = d.mul(&d.add(&one)).sub(&CanonicalOp::t().mul(&d.add(&one).pow(2)));
        let want = d.sub(&one).mul(&d).sub(&CanonicalOp::t().mul(&d.pow(2)));
        assert_eq!(l.adjoint(), want);
        let ind = l.indicial(64).unwrap();
        assert!(ind.is_admissible(&q(0)));
        assert!(!ind.is_admissible(&q(-1)));
        assert_eq!(ind.admissible.len(), 1);
    }

    #[test]
    fn divide_round_trip() {
        let d = CanonicalOp::d();
        let one = CanonicalOp::one();
        let l0 = d.mul(&d.add(&one)).sub(&CanonicalOp::t().mul(&d.add(&one).pow(2)));
        let l = l0.left_mul_poly(&QPoly::from_i64(&[1, -1]));
        // (1-t)(D(D+1) - t(D+1)^2) = D(D+1) - t(2D+1)(D+1) + t^2(D+1)^2
        let two_d1 = d.scale(&q(2)).add(&one);
        let want = d.mul(&d.add(&one)).sub(&CanonicalOp::t().mul(&two_d1.mul(&d.add(&one)))).add(&CanonicalOp::poly(QPoly::from_i64(&[0, 0, 1])).mul(&d.add(&one).pow(2)));
        assert_eq!(l, want);
        // dividing by (t - 1) undoes (1 - t) up to sign
        assert_eq!(l.left_divide_by_linear(&q(1)).unwrap(), l0.neg());
        assert_eq!(l0.left_mul_poly(&QPoly::from_i64(&[-1, 1])).left_divide_by_linear(&q(1)).unwrap(), l0);
        assert!(l0.left_divide_by_linear(&q(1)).is_err());
    }

    #[test]
    fn singular_points_of_apery() {
        let s = apery().singularities(256);
        assert_eq!(s.finite.len(), 2);
        let near = s.nearest_to_origin().unwrap();
        assert!((near.value.real().to_f64() - 0.029437251522859).abs() < 1e-12);
        assert!(CanonicalOp::d().pow(3).singularities(64).finite.is_empty());
    }

    #[test]
    fn bracket_shape() {
        let b = apery().bracket_matrix();
        let r = 3;
        for j in 0..r {
            for i in 0..r {
                if i + j > r - 1 {
                    assert!(b.entries[j][i].is_zero());
                }
            }
        }
        // (-1)^{r-1} q_0
        assert_eq!(b.entries[r - 1][0], apery().leading());
        let first = CanonicalOp::from_coeffs(vec![QPoly::from_i64(&[2, 1]), QPoly::from_i64(&[1, 3])]);
        assert_eq!(first.bracket_matrix().entries[0][0], QPoly::from_i64(&[1, 3]));
    }

    #[test]
    fn json_round_trip() {
        let l = apery();
        let v = l.to_json();
        assert_eq!(v["order"], 3);
        assert_eq!(CanonicalOp::from_json(&v).unwrap(), l);
    }

    #[test]
    fn partial_form_of_theta_square() {
        // D^2 = t^2 ∂^2 + t ∂
        let p = CanonicalOp::d().pow(2).to_partial_form();
        assert_eq!(p[2], QPoly::from_i64(&[0, 0, 1]));
        assert_eq!(p[1], QPoly::from_i64(&[0, 1]));
    }
}
