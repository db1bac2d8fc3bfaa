//! Frobenius jet tables, log-stack series and their evaluation.

use crate::arith::{binom, cabs_log2, fmt_complex, stirling1, Scalar};
use crate::error::{FrobError, Result};
use crate::jet::Jet;
use crate::op::{CanonicalOp, ThetaForm};
use rug::{Complex, Float, Rational};
use serde_json::{json, Value};

/// A local exponent, exact when rational.
#[derive(Clone, Debug, PartialEq)]
pub enum Exponent {
    Exact(Rational),
    Numeric(Complex),
}

impl Exponent {
    pub fn value(&self, prec: u32) -> Complex {
        match self {
            Exponent::Exact(q) => Complex::with_val(prec, q),
            Exponent::Numeric(z) => Complex::with_val(prec, z),
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Exponent::Exact(q) => Some(q),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Exponent::Exact(q) => q.to_string(),
            Exponent::Numeric(z) => fmt_complex(z, 30),
        }
    }
}

/// Σ_n t^{e+n} Σ_j coeffs[n][j]·log^j(t)/j!.
#[derive(Clone, Debug, PartialEq)]
pub struct LogSeries<T: Scalar> {
    pub exponent: T,
    pub coeffs: Vec<Vec<T>>,
}

impl<T: Scalar> LogSeries<T> {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Number of log powers carried.
    pub fn log_width(&self) -> usize {
        self.coeffs.iter().map(|v| v.len()).max().unwrap_or(0)
    }

    fn ctx(&self) -> T::Ctx {
        self.exponent.ctx()
    }

    fn get(&self, n: usize, j: usize) -> T {
        self.coeffs.get(n).and_then(|v| v.get(j)).cloned().unwrap_or_else(|| T::zero(self.ctx()))
    }

    fn shaped(&self, n: usize, w: usize) -> Vec<Vec<T>> {
        let ctx = self.ctx();
        (0..n).map(|_| (0..w).map(|_| T::zero(ctx)).collect()).collect()
    }

    /// θ = t d/dt applied termwise: (e+n)·c + S c with (S c)_j = c_{j+1}.
    pub fn theta(&self) -> Self {
        let w = self.log_width();
        let mut out = self.shaped(self.len(), w);
        for n in 0..self.len() {
            let en = self.exponent.sadd(&T::from_q(&Rational::from(n as u64), self.ctx()));
            for j in 0..w {
                out[n][j] = en.smul(&self.get(n, j)).sadd(&self.get(n, j + 1));
            }
        }
        LogSeries { exponent: self.exponent.clone(), coeffs: out }
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.len().max(o.len());
        let w = self.log_width().max(o.log_width());
        let mut out = self.shaped(n, w);
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.get(i, j).sadd(&o.get(i, j));
            }
        }
        LogSeries { exponent: self.exponent.clone(), coeffs: out }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&T::one(self.ctx()).sneg()))
    }

    pub fn scale(&self, s: &T) -> Self {
        LogSeries { exponent: self.exponent.clone(), coeffs: self.coeffs.iter().map(|r| r.iter().map(|c| c.smul(s)).collect()).collect() }
    }

    /// Multiplication by a polynomial in t, truncated to the current length.
    pub fn mul_poly(&self, p: &crate::poly::QPoly) -> Self {
        let w = self.log_width();
        let mut out = self.shaped(self.len(), w);
        let ctx = self.ctx();
        for (i, a) in p.coeffs().iter().enumerate() {
            if *a == 0 {
                continue;
            }
            let at = T::from_q(a, ctx);
            for n in i..self.len() {
                for j in 0..w {
                    out[n][j] = out[n][j].sadd(&at.smul(&self.get(n - i, j)));
                }
            }
        }
        LogSeries { exponent: self.exponent.clone(), coeffs: out }
    }

    /// Product of two log-stack series; exponents add, log powers combine binomially.
    pub fn mul(&self, o: &Self) -> Self {
        let n = self.len().min(o.len());
        let w = (self.log_width() + o.log_width()).saturating_sub(1).max(1);
        let mut out = self.shaped(n, w);
        let ctx = self.ctx();
        for a in 0..n {
            for b in 0..(n - a) {
                for (i, x) in self.coeffs[a].iter().enumerate() {
                    if x.is_exact_zero() {
                        continue;
                    }
                    for (j, y) in o.coeffs[b].iter().enumerate() {
                        if y.is_exact_zero() {
                            continue;
                        }
                        let c = T::from_q(&binom((i + j) as u32, i as u32), ctx);
                        out[a + b][i + j] = out[a + b][i + j].sadd(&x.smul(y).smul(&c));
                    }
                }
            }
        }
        LogSeries { exponent: self.exponent.sadd(&o.exponent), coeffs: out }
    }

    /// Applies an operator Σ q_b(t) D^b.
    pub fn apply_op(&self, l: &CanonicalOp) -> Self {
        let mut acc = self.scale(&T::zero(self.ctx()));
        let mut d = self.clone();
        for q in l.coeffs() {
            acc = acc.add(&d.mul_poly(q));
            d = d.theta();
        }
        acc
    }

    pub fn truncate(&self, n: usize) -> Self {
        LogSeries { exponent: self.exponent.clone(), coeffs: self.coeffs.iter().take(n).cloned().collect() }
    }

    /// Largest coefficient magnitude (log2) over the first `n` terms.
    pub fn max_mag_log2(&self, n: usize) -> f64 {
        self.coeffs.iter().take(n).flat_map(|r| r.iter().map(|c| c.mag_log2())).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Value of a series at a point with an a-posteriori tail estimate.
#[derive(Clone, Debug)]
pub struct SeriesValue {
    pub values: Vec<Complex>,
    /// Estimated absolute truncation error (log2).
    pub tail_log2: f64,
}

impl LogSeries<Complex> {
    /// θ^i f at t for i < m, using the log branch `log_t`. The tail estimate uses the last 20 terms.
    pub fn theta_values(&self, t: &Complex, log_t: &Complex, m: usize) -> SeriesValue {
        let prec = t.prec().0;
        let w = self.log_width();
        let mut logs = vec![Complex::with_val(prec, 1)];
        for j in 1..w.max(1) {
            let v = Complex::with_val(prec, &logs[j - 1] * log_t) / (j as u32);
            logs.push(v);
        }
        let mut out: Vec<Complex> = (0..m).map(|_| Complex::new(prec)).collect();
        let mut tn = Complex::with_val(prec, 1);
        let mut mags = Vec::with_capacity(self.len());
        let mut v: Vec<Complex> = Vec::with_capacity(w);
        for n in 0..self.len() {
            let en = Complex::with_val(prec, &self.exponent + n as u32);
            v.clear();
            v.extend(self.coeffs[n].iter().map(|c| Complex::with_val(prec, c)));
            v.resize(w, Complex::new(prec));
            let mut termmag = f64::NEG_INFINITY;
            for slot in out.iter_mut() {
                let mut s = Complex::new(prec);
                for j in 0..w {
                    if !crate::arith::is_czero(&v[j]) {
                        s += Complex::with_val(prec, &v[j] * &logs[j]);
                    }
                }
                let term = Complex::with_val(prec, &s * &tn);
                termmag = termmag.max(cabs_log2(&term));
                *slot += term;
                // v <- (e+n) v + S v
                for j in 0..w {
                    let next = if j + 1 < w { v[j + 1].clone() } else { Complex::new(prec) };
                    v[j] = Complex::with_val(prec, &v[j] * &en) + next;
                }
            }
            mags.push(termmag);
            tn *= t;
        }
        let tpow = Complex::with_val(prec, self.exponent.clone() * log_t).exp();
        for o in out.iter_mut() {
            *o *= &tpow;
        }
        let tail = geometric_tail(&mags) + cabs_log2(&tpow);
        SeriesValue { values: out, tail_log2: tail }
    }

    /// Derivatives f^{(k)}(t) for k < m (state vector for transfer matrices).
    pub fn derivative_values(&self, t: &Complex, log_t: &Complex, m: usize) -> SeriesValue {
        let th = self.theta_values(t, log_t, m);
        SeriesValue { values: theta_to_derivatives(&th.values, t), tail_log2: th.tail_log2 + (m as f64) * (-cabs_log2(t)).max(0.0) }
    }
}

/// Converts θ^i f (i < m) into f^{(k)} (k < m) via t^k ∂^k = Σ s(k,i) θ^i.
pub fn theta_to_derivatives(theta: &[Complex], t: &Complex) -> Vec<Complex> {
    let m = theta.len();
    let prec = t.prec().0;
    let s1 = stirling1(m);
    let tinv = Complex::with_val(prec, 1 / t);
    let mut tk = Complex::with_val(prec, 1);
    let mut out = Vec::with_capacity(m);
    for k in 0..m {
        let mut acc = Complex::new(prec);
        for i in 0..=k {
            if s1[k][i] != 0 {
                acc += Complex::with_val(prec, &theta[i] * &s1[k][i]);
            }
        }
        out.push(Complex::with_val(prec, &acc * &tk));
        tk *= &tinv;
    }
    out
}

/// Tail bound from the last terms: geometric ratio estimate, `+inf` when the terms are not decaying.
fn geometric_tail(mags: &[f64]) -> f64 {
    let n = mags.len();
    if n < 2 {
        return f64::INFINITY;
    }
    let w = 20.min(n - 1);
    let hi = mags[n - 1 - w..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let first = mags[n - 1 - w];
    let last = mags[n - 1];
    if !last.is_finite() && !hi.is_finite() {
        return f64::NEG_INFINITY;
    }
    if !first.is_finite() || !last.is_finite() {
        return hi;
    }
    let ratio = ((last - first) / w as f64).exp2();
    if ratio >= 0.9 {
        return f64::INFINITY;
    }
    hi.min(last + 1.0) + (ratio / (1.0 - ratio)).log2()
}

/// Table storage: exact rationals or complex floats.
#[derive(Clone, Debug)]
pub enum TableData {
    Exact(Vec<Vec<Rational>>),
    Float(Vec<Vec<Complex>>),
}

/// c[n][k] = a_n^{(k)}(ρ)/k!, 0 ≤ n ≤ N, 0 ≤ k ≤ K.
#[derive(Clone, Debug)]
pub struct FrobeniusTable {
    pub rho: Exponent,
    pub k: usize,
    pub n: usize,
    pub data: TableData,
    pub prec: u32,
    /// |c_min|: distance from 0 to the nearest nonzero singularity.
    pub radius: f64,
}

/// How to run the recurrence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableMode {
    Auto,
    Exact,
    Float,
}

/// Working precision for floating tables: max(user, 64 + 10K + N/2).
pub fn float_precision(user: u32, k: usize, n: usize) -> u32 {
    user.max(64 + 10 * k as u32 + (n / 2) as u32)
}

fn jet_recurrence<T: Scalar>(tf: &ThetaForm, rho: &T, k: usize, n_max: usize, rho_label: &str, tiny_log2: f64) -> Result<Vec<Jet<T>>> {
    let ctx = rho.ctx();
    let mut a: Vec<Jet<T>> = Vec::with_capacity(n_max + 1);
    a.push(Jet::constant(T::one(ctx), k));
    let deg = tf.a();
    for n in 1..=n_max {
        let mut rhs = Jet::zero(k, ctx);
        for j in 1..=deg.min(n) {
            if tf.p[j].is_zero() {
                continue;
            }
            let x = rho.sadd(&T::from_q(&Rational::from((n - j) as u64), ctx));
            let pj = Jet::poly_at(&tf.p[j], &x, k);
            rhs = rhs.add(&pj.mul(&a[n - j]));
        }
        let x = rho.sadd(&T::from_q(&Rational::from(n as u64), ctx));
        let p0 = Jet::poly_at(&tf.p[0], &x, k);
        if p0.coeffs[0].is_exact_zero() || p0.coeffs[0].mag_log2() < tiny_log2 {
            return Err(FrobError::ExponentNotAdmissible(rho_label.to_string(), n));
        }
        let inv = p0.inv().ok_or_else(|| FrobError::ExponentNotAdmissible(rho_label.to_string(), n))?;
        a.push(rhs.mul(&inv).neg());
    }
    Ok(a)
}

/// Builds the Frobenius jet table of `l` at exponent `rho`.
pub fn frobenius_table(l: &CanonicalOp, rho: &Exponent, k: usize, n: usize, prec: u32, mode: TableMode) -> Result<FrobeniusTable> {
    let tf = l.theta_form();
    let radius = l.singularities(64).nearest_to_origin().map(|r| crate::arith::cabs_f64(&r.value)).unwrap_or(f64::INFINITY);
    let exact = match (mode, rho) {
        (TableMode::Exact, Exponent::Exact(_)) => true,
        (TableMode::Exact, Exponent::Numeric(_)) => return Err(FrobError::InvalidArgument("exact mode needs a rational exponent".into())),
        (TableMode::Float, _) => false,
        (TableMode::Auto, Exponent::Exact(_)) => k * n <= 10 * 2000,
        (TableMode::Auto, Exponent::Numeric(_)) => false,
    };
    let label = rho.label();
    if exact {
        let q = rho.exact().unwrap();
        let a = jet_recurrence::<Rational>(&tf, q, k, n, &label, f64::NEG_INFINITY)?;
        let c = a.into_iter().map(|j| j.coeffs).collect();
        return Ok(FrobeniusTable { rho: rho.clone(), k, n, data: TableData::Exact(c), prec, radius });
    }
    let wp = float_precision(prec, k, n);
    let r = rho.value(wp);
    let a = jet_recurrence::<Complex>(&tf, &r, k, n, &label, -(wp as f64) / 2.0)?;
    let mut c = Vec::with_capacity(n + 1);
    for j in a {
        for v in &j.coeffs {
            if v.real().is_nan() || v.imag().is_nan() || v.real().is_infinite() || v.imag().is_infinite() {
                return Err(FrobError::PrecisionUnderflow(format!("non-finite coefficient at n = {}", c.len())));
            }
        }
        c.push(j.coeffs);
    }
    Ok(FrobeniusTable { rho: rho.clone(), k, n, data: TableData::Float(c), prec: wp, radius })
}

impl FrobeniusTable {
    pub fn is_exact(&self) -> bool {
        matches!(self.data, TableData::Exact(_))
    }

    pub fn exact_coeff(&self, n: usize, k: usize) -> Option<&Rational> {
        match &self.data {
            TableData::Exact(c) => Some(&c[n][k]),
            _ => None,
        }
    }

    pub fn coeff(&self, n: usize, k: usize, prec: u32) -> Complex {
        match &self.data {
            TableData::Exact(c) => Complex::with_val(prec, &c[n][k]),
            TableData::Float(c) => Complex::with_val(prec, &c[n][k]),
        }
    }

    /// Real part as a float (for the ratio-limit method).
    pub fn real_coeff(&self, n: usize, k: usize, prec: u32) -> Float {
        match &self.data {
            TableData::Exact(c) => Float::with_val(prec, &c[n][k]),
            TableData::Float(c) => Float::with_val(prec, c[n][k].real()),
        }
    }

    /// φ_{ρ,k} as a log-stack series truncated at N.
    pub fn series(&self, k: usize, prec: u32) -> LogSeries<Complex> {
        assert!(k <= self.k);
        let coeffs = (0..=self.n).map(|n| (0..=k).map(|j| self.coeff(n, k - j, prec)).collect()).collect();
        LogSeries { exponent: self.rho.value(prec), coeffs }
    }

    /// Exact φ_{ρ,k} series (exact tables only).
    pub fn exact_series(&self, k: usize) -> Option<LogSeries<Rational>> {
        let rho = self.rho.exact()?.clone();
        match &self.data {
            TableData::Exact(c) => Some(LogSeries { exponent: rho, coeffs: (0..=self.n).map(|n| (0..=k).map(|j| c[n][k - j].clone()).collect()).collect() }),
            _ => None,
        }
    }

    pub fn to_json(&self, digits: usize) -> Value {
        let rows: Vec<Value> = (0..=self.n)
            .map(|n| {
                Value::Array(
                    (0..=self.k)
                        .map(|k| match &self.data {
                            TableData::Exact(c) => json!(c[n][k].to_string()),
                            TableData::Float(c) => json!(fmt_complex(&c[n][k], digits)),
                        })
                        .collect(),
                )
            })
            .collect();
        json!({"rho": self.rho.label(), "K": self.k, "N": self.n, "precision": self.prec, "exact": self.is_exact(), "c": rows})
    }
}

/// Evaluated Frobenius function with a truncation estimate.
#[derive(Clone, Debug)]
pub struct FrobValue {
    pub value: Complex,
    pub tail_estimate: f64,
}

/// φ_{ρ,k}(t) with the given log branch.
pub fn eval_frobenius(table: &FrobeniusTable, k: usize, t: &Complex, log_t: &Complex) -> Result<FrobValue> {
    if k > table.k {
        return Err(FrobError::InvalidArgument(format!("k = {} exceeds table order {}", k, table.k)));
    }
    let at = crate::arith::cabs_f64(t);
    if at >= table.radius {
        return Err(FrobError::OutsideConvergenceDisk { t: at, radius: table.radius });
    }
    let prec = t.prec().0;
    let s = table.series(k, prec);
    let v = s.theta_values(t, log_t, 1);
    let val = v.values[0].clone();
    let scale = cabs_log2(&val).max(0.0);
    let tol = scale - prec as f64 + 20.0;
    if !(v.tail_log2 <= tol) {
        return Err(FrobError::TruncationInsufficient(v.tail_log2.exp2()));
    }
    Ok(FrobValue { value: val, tail_estimate: v.tail_log2.exp2() })
}

/// Principal log of a complex number at its own precision.
pub fn principal_log(t: &Complex) -> Complex {
    Complex::with_val(t.prec().0, t.ln_ref())
}

/// Result of a recurrence residual check.
#[derive(Clone, Debug)]
pub struct Residual {
    pub exact_zero: bool,
    pub max_log2: f64,
}

/// Applies L to Σ a_n(s) t^{n+s} and measures the coefficients of t^{n+s} for 1 ≤ n ≤ N - a.
pub fn residual_check(l: &CanonicalOp, table: &FrobeniusTable) -> Residual {
    let tf = l.theta_form();
    let deg = tf.a();
    let upper = table.n.saturating_sub(deg);
    match &table.data {
        TableData::Exact(c) => {
            let rho = table.rho.exact().unwrap();
            let jets: Vec<Jet<Rational>> = c.iter().map(|r| Jet::from_coeffs(r.clone())).collect();
            let mut zero = true;
            let mut mx = f64::NEG_INFINITY;
            for n in 1..=upper {
                let mut acc = Jet::zero(table.k, ());
                for j in 0..=deg.min(n) {
                    let x = Rational::from(rho + (n - j) as u64);
                    acc = acc.add(&Jet::poly_at(&tf.p[j], &x, table.k).mul(&jets[n - j]));
                }
                if acc.coeffs.iter().any(|v| *v != 0) {
                    zero = false;
                    mx = mx.max(acc.max_mag_log2());
                }
            }
            Residual { exact_zero: zero, max_log2: mx }
        }
        TableData::Float(c) => {
            let prec = table.prec;
            let rho = table.rho.value(prec);
            let jets: Vec<Jet<Complex>> = c.iter().map(|r| Jet::from_coeffs(r.clone())).collect();
            let mut mx = f64::NEG_INFINITY;
            for n in 1..=upper {
                let mut acc = Jet::zero(table.k, prec);
                let mut scale = f64::NEG_INFINITY;
                for j in 0..=deg.min(n) {
                    let x = Complex::with_val(prec, &rho + (n - j) as u32);
                    let term = Jet::poly_at(&tf.p[j], &x, table.k).mul(&jets[n - j]);
                    scale = scale.max(term.max_mag_log2());
                    acc = acc.add(&term);
                }
                // relative to the size of the individual terms
                mx = mx.max(acc.max_mag_log2() - scale.max(0.0));
            }
            Residual { exact_zero: mx == f64::NEG_INFINITY, max_log2: mx }
        }
    }
}

/// Lagrange identity check D{ψ,φ} - (ψ·Lφ - (L∨ψ)·φ) through order N.
pub fn bracket_residual<T: Scalar>(l: &CanonicalOp, psi: &LogSeries<T>, phi: &LogSeries<T>, n: usize) -> Residual {
    let psi = psi.truncate(n + 1);
    let phi = phi.truncate(n + 1);
    let lv = l.adjoint();
    let bm = l.bracket_matrix();
    let r = l.order();
    let mut dpsi = vec![psi.clone()];
    let mut dphi = vec![phi.clone()];
    for i in 1..r {
        dpsi.push(dpsi[i - 1].theta());
        dphi.push(dphi[i - 1].theta());
    }
    let mut bracket: Option<LogSeries<T>> = None;
    for j in 0..r {
        for i in 0..r {
            let e = &bm.entries[j][i];
            if e.is_zero() {
                continue;
            }
            let term = dpsi[j].mul(&dphi[i]).mul_poly(e);
            bracket = Some(match bracket {
                None => term,
                Some(b) => b.add(&term),
            });
        }
    }
    let prod0 = psi.mul(&phi);
    let zero = prod0.scale(&T::zero(psi.exponent.ctx()));
    let lhs = bracket.unwrap_or_else(|| zero.clone()).theta();
    let rhs = psi.mul(&phi.apply_op(l)).sub(&psi.apply_op(&lv).mul(&phi));
    let diff = lhs.sub(&rhs);
    let mx = diff.max_mag_log2(n + 1);
    Residual { exact_zero: mx == f64::NEG_INFINITY, max_log2: mx }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_op;

    fn apery() -> CanonicalOp {
        parse_op("D^3 - t*(34*D^3+51*D^2+27*D+5) + t^2*(D+1)^3").unwrap()
    }

    #[test]
    fn apery_numbers() {
        let t = frobenius_table(&apery(), &Exponent::Exact(Rational::new()), 3, 10, 128, TableMode::Exact).unwrap();
        let want = [1, 5, 73, 1445, 33001];
        for (n, w) in want.iter().enumerate() {
            assert_eq!(*t.exact_coeff(n, 0).unwrap(), *w);
        }
        assert_eq!(*t.exact_coeff(0, 1).unwrap(), 0);
        assert!(residual_check(&apery(), &t).exact_zero);
    }

    #[test]
    fn float_matches_exact() {
        let l = apery();
        let e = frobenius_table(&l, &Exponent::Exact(Rational::new()), 4, 60, 256, TableMode::Exact).unwrap();
        let f = frobenius_table(&l, &Exponent::Exact(Rational::new()), 4, 60, 256, TableMode::Float).unwrap();
        for n in 0..=60 {
            for k in 0..=4 {
                let a = e.coeff(n, k, 400);
                let b = f.coeff(n, k, 400);
                let d = Complex::with_val(400, &a - &b);
                if !crate::arith::is_czero(&a) {
                    assert!(cabs_log2(&d) - cabs_log2(&a) < -(256.0 - 20.0), "n={} k={}", n, k);
                }
            }
        }
        assert!(residual_check(&l, &f).max_log2 < -200.0);
    }

    #[test]
    fn legendre_central_binomials() {
        let l = parse_op("D^2 - t*(D+1/2)^2").unwrap();
        let t = frobenius_table(&l, &Exponent::Exact(Rational::new()), 2, 12, 64, TableMode::Exact).unwrap();
        for n in 0..=12u32 {
            let b = rug::Integer::from(rug::Integer::binomial_u(2 * n, n));
            let want = Rational::from((b.clone() * b, rug::Integer::from(rug::Integer::u_pow_u(16, n))));
            assert_eq!(*t.exact_coeff(n as usize, 0).unwrap(), want);
        }
    }

    #[test]
    fn inadmissible_exponent() {
        let l = parse_op("D*(D+1) - t*(D+1)^2").unwrap();
        let r = frobenius_table(&l, &Exponent::Exact(Rational::from(-1)), 1, 5, 64, TableMode::Exact);
        assert!(matches!(r, Err(FrobError::ExponentNotAdmissible(_, 1))));
    }

    #[test]
    fn evaluation_near_origin() {
        let l = apery();
        let t = frobenius_table(&l, &Exponent::Exact(Rational::new()), 2, 200, 256, TableMode::Float).unwrap();
        let x = Complex::with_val(256, (Float::with_val(256, 1) / 100u32, 0));
        let lg = principal_log(&x);
        let v = eval_frobenius(&t, 0, &x, &lg).unwrap();
        let mut direct = Complex::new(256);
        let mut p = Complex::with_val(256, 1);
        for n in 0..=200 {
            direct += Complex::with_val(256, &p * &t.coeff(n, 0, 256));
            p *= &x;
        }
        let d = Complex::with_val(256, &v.value - &direct);
        assert!(cabs_log2(&d) < -230.0);
        assert!((v.value.real().to_f64() - 1.059_186_514_148_376).abs() < 1e-14);
        let far = Complex::with_val(256, (0.05, 0));
        assert!(matches!(eval_frobenius(&t, 0, &far, &principal_log(&far)), Err(FrobError::OutsideConvergenceDisk { .. })));
    }

    #[test]
    fn bracket_identity_exact() {
        let l = apery();
        let t = frobenius_table(&l, &Exponent::Exact(Rational::new()), 2, 12, 64, TableMode::Exact).unwrap();
        let phi = t.exact_series(2).unwrap();
        let psi = t.exact_series(1).unwrap();
        assert!(bracket_residual(&l, &psi, &phi, 10).exact_zero);
        let z = psi.scale(&Rational::new());
        assert!(bracket_residual(&l, &z, &phi, 10).exact_zero);
    }
}
