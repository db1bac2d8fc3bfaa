//! Integer relations (PSLQ) and recognition of constants over products of zeta values.

use crate::error::{FrobError, Result};
use rug::ops::Pow;
use rug::{Complex, Float, Integer, Rational};
use serde_json::{json, Value};

fn flog2(x: &Float) -> f64 {
    if x.is_zero() {
        f64::NEG_INFINITY
    } else {
        x.clone().abs().log2().to_f64()
    }
}

/// Outcome of a PSLQ run.
#[derive(Clone, Debug, PartialEq)]
pub struct Relation {
    pub coeffs: Vec<Integer>,
    /// log2 of |Σ v_i x_i| / (‖v‖ · max|x_i|).
    pub residual_log2: f64,
    /// Precision margin beyond what a random relation of this height would need.
    pub confidence_bits: i64,
}

/// PSLQ on real `values` at `prec` bits. Returns `None` when no relation with max |v_i| ≤ `max_height` exists
/// at this precision.
pub fn integer_relation(values: &[Float], prec: u32, max_height: f64) -> Result<Option<Relation>> {
    let n = values.len();
    if !(2..=20).contains(&n) {
        return Err(FrobError::InvalidArgument(format!("integer_relation needs 2..20 values, got {}", n)));
    }
    let p = prec;
    let x: Vec<Float> = values.iter().map(|v| Float::with_val(p, v)).collect();
    let xmax = x.iter().map(flog2).fold(f64::NEG_INFINITY, f64::max);
    if !xmax.is_finite() {
        return Ok(None);
    }
    // a zero entry is its own relation
    if let Some(i) = x.iter().position(|v| flog2(v) - xmax < -(p as f64) + 16.0) {
        let mut c = vec![Integer::new(); n];
        c[i] = Integer::from(1);
        return Ok(Some(Relation { coeffs: c, residual_log2: -(p as f64), confidence_bits: p as i64 }));
    }
    let gamma = Float::with_val(p, Float::with_val(p, 4) / 3u32).sqrt();
    // partial norms
    let mut s = vec![Float::new(p); n];
    let mut acc = Float::new(p);
    for k in (0..n).rev() {
        acc += Float::with_val(p, x[k].square_ref());
        s[k] = Float::with_val(p, acc.sqrt_ref());
    }
    let t = s[0].clone();
    let mut y: Vec<Float> = x.iter().map(|v| Float::with_val(p, v / &t)).collect();
    for sk in s.iter_mut() {
        *sk /= &t;
    }
    let mut h = vec![vec![Float::new(p); n - 1]; n];
    for i in 0..n {
        for j in 0..(n - 1).min(i + 1) {
            if i == j {
                h[i][j] = Float::with_val(p, &s[j + 1] / &s[j]);
            } else if i > j {
                let den = Float::with_val(p, &s[j] * &s[j + 1]);
                h[i][j] = -Float::with_val(p, &y[i] * &y[j]) / den;
            }
        }
    }
    let mut a: Vec<Vec<Float>> = (0..n).map(|i| (0..n).map(|j| Float::with_val(p, (i == j) as u32)).collect()).collect();
    let mut b = a.clone();
    let reduce = |i: usize, j: usize, h: &mut Vec<Vec<Float>>, y: &mut Vec<Float>, a: &mut Vec<Vec<Float>>, b: &mut Vec<Vec<Float>>| {
        if h[j][j].is_zero() {
            return;
        }
        let q = Float::with_val(p, &h[i][j] / &h[j][j]).round();
        if q.is_zero() {
            return;
        }
        let yi = y[i].clone();
        y[j] += Float::with_val(p, &q * &yi);
        for k in 0..=j {
            let v = Float::with_val(p, &q * &h[j][k]);
            h[i][k] -= v;
        }
        for k in 0..n {
            let v = Float::with_val(p, &q * &a[j][k]);
            a[i][k] -= v;
            let w = Float::with_val(p, &q * &b[k][i]);
            b[k][j] += w;
        }
    };
    for i in 1..n {
        for j in (0..i).rev() {
            reduce(i, j, &mut h, &mut y, &mut a, &mut b);
        }
    }
    let detect = -(p as f64) + 4.0 * (n as f64) + 20.0;
    let max_iter = 200 * n * (p as usize);
    for _ in 0..max_iter {
        // relation found?
        let (jmin, ymin) = y.iter().enumerate().map(|(j, v)| (j, flog2(v))).fold((0, f64::INFINITY), |acc, v| if v.1 < acc.1 { v } else { acc });
        if ymin < detect {
            let coeffs: Vec<Integer> = (0..n).map(|k| b[k][jmin].to_integer().unwrap_or_default()).collect();
            return finish(&x, coeffs, p, max_height);
        }
        // bound on any relation norm: 1/max|H_jj|
        let hmax = (0..n - 1).map(|j| flog2(&h[j][j])).fold(f64::NEG_INFINITY, f64::max);
        if -hmax > max_height.log2() + 1.0 {
            return Ok(None);
        }
        let amax = a.iter().flatten().map(flog2).fold(f64::NEG_INFINITY, f64::max);
        if amax > p as f64 - 8.0 {
            return Ok(None);
        }
        // choose m
        let mut best = (0usize, f64::NEG_INFINITY);
        let mut gp = Float::with_val(p, 1);
        for i in 0..n - 1 {
            gp *= &gamma;
            let v = flog2(&Float::with_val(p, &gp * &h[i][i]));
            if v > best.1 {
                best = (i, v);
            }
        }
        let m = best.0;
        y.swap(m, m + 1);
        a.swap(m, m + 1);
        h.swap(m, m + 1);
        for row in b.iter_mut() {
            row.swap(m, m + 1);
        }
        if m + 2 < n {
            let t0 = Float::with_val(p, Float::with_val(p, h[m][m].square_ref()) + Float::with_val(p, h[m][m + 1].square_ref())).sqrt();
            let t1 = Float::with_val(p, &h[m][m] / &t0);
            let t2 = Float::with_val(p, &h[m][m + 1] / &t0);
            for row in h.iter_mut().skip(m) {
                let t3 = row[m].clone();
                let t4 = row[m + 1].clone();
                row[m] = Float::with_val(p, &t1 * &t3) + Float::with_val(p, &t2 * &t4);
                row[m + 1] = Float::with_val(p, &t1 * &t4) - Float::with_val(p, &t2 * &t3);
            }
        }
        for i in m + 1..n {
            for j in (0..(i).min(m + 2)).rev() {
                reduce(i, j, &mut h, &mut y, &mut a, &mut b);
            }
        }
    }
    Ok(None)
}

fn finish(x: &[Float], coeffs: Vec<Integer>, p: u32, max_height: f64) -> Result<Option<Relation>> {
    let mut coeffs = coeffs;
    if let Some(first) = coeffs.iter().find(|c| **c != 0) {
        if *first < 0 {
            for c in coeffs.iter_mut() {
                *c = -c.clone();
            }
        }
    }
    let height = coeffs.iter().map(|c| c.clone().abs()).max().unwrap_or_default();
    if height == 0 || height.to_f64() > max_height {
        return Ok(None);
    }
    let (res, norm) = relation_residual(x, &coeffs, p);
    let xmax = x.iter().map(flog2).fold(f64::NEG_INFINITY, f64::max);
    let rel = (res - norm - xmax).max(-(p as f64));
    let n = x.len() as f64;
    let hbits = Float::with_val(64, &height).log2().to_f64().max(1.0);
    let conf = (-rel - n * hbits).floor() as i64;
    if rel > -(p as f64) / 2.0 {
        return Ok(None);
    }
    if conf < 40 {
        return Err(FrobError::PrecisionInsufficient(conf));
    }
    Ok(Some(Relation { coeffs, residual_log2: rel, confidence_bits: conf }))
}

/// (log2 |Σ v_i x_i|, log2 ‖v‖).
pub fn relation_residual(x: &[Float], v: &[Integer], p: u32) -> (f64, f64) {
    let mut acc = Float::new(p);
    let mut nn = Float::new(p);
    for (xi, vi) in x.iter().zip(v) {
        acc += Float::with_val(p, xi * vi);
        nn += Float::with_val(p, Integer::from(vi * vi));
    }
    (flog2(&acc), flog2(&nn.sqrt()))
}

/// A weight-homogeneous monomial Π ζ(k_i) · log(c)^b.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub zetas: Vec<u32>,
    pub log_c: u32,
    /// Name of a caller-supplied constant, if any.
    pub extra: Option<String>,
}

impl Monomial {
    pub fn weight(&self) -> u32 {
        self.zetas.iter().sum::<u32>() + self.log_c
    }

    pub fn name(&self) -> String {
        if let Some(e) = &self.extra {
            return e.clone();
        }
        let mut parts: Vec<String> = Vec::new();
        let mut i = 0;
        while i < self.zetas.len() {
            let k = self.zetas[i];
            let mut e = 1;
            while i + e < self.zetas.len() && self.zetas[i + e] == k {
                e += 1;
            }
            parts.push(if e == 1 { format!("zeta({})", k) } else { format!("zeta({})^{}", k, e) });
            i += e;
        }
        match self.log_c {
            0 => {}
            1 => parts.push("log(c)".into()),
            b => parts.push(format!("log(c)^{}", b)),
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

/// Caller-supplied constant (e.g. a multiple zeta value) with its weight and a value provider.
pub struct ExtraConstant<'a> {
    pub name: String,
    pub weight: u32,
    pub value: &'a dyn Fn(u32) -> Float,
}

/// Partitions of w into parts from {2} ∪ {odd k ≥ 3}, nonincreasing.
fn zeta_partitions(w: u32) -> Vec<Vec<u32>> {
    fn go(rem: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rem == 0 {
            out.push(cur.clone());
            return;
        }
        let mut k = max.min(rem);
        while k >= 2 {
            if k == 2 || k % 2 == 1 {
                cur.push(k);
                go(rem - k, k, cur, out);
                cur.pop();
            }
            k -= 1;
        }
    }
    let mut out = Vec::new();
    go(w, w, &mut Vec::new(), &mut out);
    out
}

/// Weight-w basis: ζ(2)^a·Π ζ(odd) (even zeta values are rational multiples of powers of ζ(2)),
/// optionally multiplied by powers of log c.
pub fn weight_basis(w: u32, with_log_c: bool) -> Vec<Monomial> {
    let mut out = Vec::new();
    let maxb = if with_log_c { w } else { 0 };
    for b in 0..=maxb {
        for z in zeta_partitions(w - b) {
            out.push(Monomial { zetas: z, log_c: b, extra: None });
        }
    }
    out
}

pub fn monomial_value(m: &Monomial, log_c: Option<&Float>, prec: u32) -> Float {
    let mut v = Float::with_val(prec, 1);
    for k in &m.zetas {
        v *= Float::with_val(prec, Float::with_val(prec, *k).zeta_ref());
    }
    if m.log_c > 0 {
        let l = log_c.expect("log c required");
        v *= Float::with_val(prec, l.pow(m.log_c));
    }
    v
}

#[derive(Clone, Debug)]
pub struct RecognitionResult {
    pub value: Float,
    pub weight: u32,
    pub relation: Vec<(String, Rational)>,
    pub residual_log2: f64,
    pub confidence_bits: i64,
    /// Residual of the relation with the basis re-evaluated at twice the precision (log2, relative).
    pub recheck_log2: f64,
}

impl RecognitionResult {
    pub fn coefficient(&self, name: &str) -> Rational {
        self.relation.iter().find(|(n, _)| n == name).map(|x| x.1.clone()).unwrap_or_default()
    }

    pub fn to_json(&self, digits: usize) -> Value {
        json!({
            "value": crate::arith::fmt_float(&self.value, digits),
            "weight": self.weight,
            "relation": self.relation.iter().map(|(m, q)| json!({"monomial": m, "coeff_num": q.numer().to_string(), "coeff_den": q.denom().to_string()})).collect::<Vec<_>>(),
            "residual": format!("{:e}", self.residual_log2.exp2()),
            "confidence_bits": self.confidence_bits,
            "recheck_log2": self.recheck_log2,
        })
    }
}

/// Source of the value to recognize: fixed digits, or a function recomputing it at any precision.
pub enum ValueSource<'a> {
    Fixed(Float),
    Recompute(&'a dyn Fn(u32) -> Float),
}

impl ValueSource<'_> {
    fn at(&self, prec: u32) -> Float {
        match self {
            ValueSource::Fixed(x) => Float::with_val(prec, x),
            ValueSource::Recompute(f) => f(prec),
        }
    }
}

pub const DEFAULT_HEIGHT: f64 = 1e20;

/// Recognizes x as a ℚ-combination of weight-w monomials.
pub fn recognize(x: &ValueSource, w: u32, log_c: Option<&Complex>, extras: &[ExtraConstant], prec: u32) -> Result<Option<RecognitionResult>> {
    let mut basis = weight_basis(w, log_c.is_some());
    let lc = log_c.map(|z| Float::with_val(prec * 2, z.real()));
    for e in extras.iter().filter(|e| e.weight == w) {
        basis.push(Monomial { zetas: vec![], log_c: 0, extra: Some(e.name.clone()) });
    }
    if basis.is_empty() {
        return Ok(None);
    }
    let values_at = |p: u32| -> Vec<Float> {
        let mut v = vec![x.at(p)];
        for m in &basis {
            match &m.extra {
                Some(name) => v.push((extras.iter().find(|e| &e.name == name).unwrap().value)(p)),
                None => v.push(monomial_value(m, lc.as_ref(), p)),
            }
        }
        v
    };
    let vals = values_at(prec);
    let rel = match integer_relation(&vals, prec, DEFAULT_HEIGHT)? {
        Some(r) => r,
        None => return Ok(None),
    };
    if rel.coeffs[0] == 0 {
        return Ok(None);
    }
    // re-check at twice the precision
    let vals2 = values_at(2 * prec);
    let (r2, n2) = relation_residual(&vals2, &rel.coeffs, 2 * prec);
    let xmax2 = vals2.iter().map(flog2).fold(f64::NEG_INFINITY, f64::max);
    let recheck = r2 - n2 - xmax2;
    let needed = match x {
        ValueSource::Recompute(_) => rel.residual_log2 - (prec as f64) / 4.0,
        // fixed digits cannot improve; the basis side must not make it worse
        ValueSource::Fixed(_) => rel.residual_log2 + 8.0,
    };
    if recheck > needed {
        return Ok(None);
    }
    let v0 = Rational::from(&rel.coeffs[0]);
    let relation = basis
        .iter()
        .zip(&rel.coeffs[1..])
        .filter(|(_, c)| **c != 0)
        .map(|(m, c)| (m.name(), -Rational::from(c) / &v0))
        .collect();
    Ok(Some(RecognitionResult { value: vals[0].clone(), weight: w, relation, residual_log2: rel.residual_log2, confidence_bits: rel.confidence_bits, recheck_log2: recheck }))
}

/// Tries weights 1..=max_w in order and returns the first recognition.
pub fn recognize_any(x: &ValueSource, max_w: u32, log_c: Option<&Complex>, prec: u32) -> Result<Option<RecognitionResult>> {
    for w in 1..=max_w {
        if let Some(r) = recognize(x, w, log_c, &[], prec)? {
            return Ok(Some(r));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zeta(k: u32, p: u32) -> Float {
        Float::with_val(p, Float::with_val(p, k).zeta_ref())
    }

    #[test]
    fn finds_simple_relation() {
        let p = 200;
        let pi2 = Float::with_val(p, Float::with_val(p, rug::float::Constant::Pi).square_ref());
        let k2 = -Float::with_val(p, &pi2 / 3u32);
        let r = integer_relation(&[pi2, k2], p, 1e20).unwrap().unwrap();
        assert_eq!(r.coeffs, vec![Integer::from(1), Integer::from(3)]);
        assert!(r.confidence_bits >= 40);
    }

    #[test]
    fn three_term_relation() {
        let p = 256;
        let x = Float::with_val(p, zeta(5, p) * 7u32) / 3u32 - Float::with_val(p, zeta(2, p) * zeta(3, p)) * 17u32 / 3u32;
        let r = integer_relation(&[x, zeta(5, p), Float::with_val(p, zeta(2, p) * zeta(3, p))], p, 1e20).unwrap().unwrap();
        assert_eq!(r.coeffs, vec![Integer::from(3), Integer::from(-7), Integer::from(17)]);
    }

    #[test]
    fn golden_ratio_has_no_small_relation() {
        let p = 170;
        let phi = Float::with_val(p, Float::with_val(p, 5).sqrt() + 1u32) / 2u32;
        let r = integer_relation(&[Float::with_val(p, 1), phi], p, 1e6);
        assert!(matches!(r, Ok(None) | Err(FrobError::PrecisionInsufficient(_))), "{:?}", r);
    }

    #[test]
    fn basis_sizes() {
        let names: Vec<String> = weight_basis(5, false).iter().map(|m| m.name()).collect();
        assert_eq!(names, vec!["zeta(5)", "zeta(3)*zeta(2)"]);
        assert_eq!(weight_basis(4, false).len(), 1);
        assert_eq!(weight_basis(6, false).len(), 2);
        assert!(weight_basis(2, true).iter().all(|m| m.weight() == 2));
    }

    #[test]
    fn recognizes_beauville_kappa3() {
        let p = 200;
        let x = Float::with_val(p, zeta(3, p) * 2u32);
        let r = recognize(&ValueSource::Fixed(x), 3, None, &[], p).unwrap().unwrap();
        assert_eq!(r.coefficient("zeta(3)"), Rational::from(2));
        // 3/4 is not in the span of ζ(2)
        let q = Float::with_val(p, 0.75);
        assert!(!matches!(recognize(&ValueSource::Fixed(q), 2, None, &[], p), Ok(Some(_))));
    }
}
