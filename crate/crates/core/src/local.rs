//! Local solution bases at regular singular points.
//!
//! At t = 0 the local variable is t itself. At a finite singularity c it is u = 1 − t/c, which
//! keeps orientation: a positive loop of t around c is a positive loop of u around 0.
//! The basis is built class by class (exponents modulo ℤ) with the log-stack recurrence
//! P_0(e+n+S)·c_n = −Σ_{j≥1} P_j(e+n−j+S)·c_{n−j}, S the log shift.

use crate::arith::{cabs_log2, is_czero, snap_rational, two_pi_i};
use crate::error::{FrobError, Result};
use crate::frobenius::{principal_log, Exponent, LogSeries};
use crate::linalg::CMat;
use crate::op::{falling_factorial_poly, CanonicalOp};
use crate::poly::{cluster_roots, complex_taylor_shift, exact_roots, numeric_roots, polish_multiple_root, squarefree_part, QPoly};
use rug::{Complex, Rational};

/// Where a local basis lives.
#[derive(Clone, Debug)]
pub enum Center {
    Zero,
    /// u = 1 − t/c.
    Point(Complex),
}

impl Center {
    pub fn local_var(&self, t: &Complex) -> Complex {
        match self {
            Center::Zero => t.clone(),
            Center::Point(c) => {
                let p = t.prec().0;
                Complex::with_val(p, 1 - Complex::with_val(p, t / c))
            }
        }
    }

    /// du/dt.
    pub fn du_dt(&self, prec: u32) -> Complex {
        match self {
            Center::Zero => Complex::with_val(prec, 1),
            Center::Point(c) => Complex::with_val(prec, -1 / Complex::with_val(prec, c)),
        }
    }

    pub fn point(&self, prec: u32) -> Complex {
        match self {
            Center::Zero => Complex::new(prec),
            Center::Point(c) => Complex::with_val(prec, c),
        }
    }
}

/// Σ_j u^j P_j(θ_u) with complex coefficients; `p[j]` ascending in θ.
#[derive(Clone, Debug)]
pub struct LocalOp {
    pub p: Vec<Vec<Complex>>,
    pub prec: u32,
    /// Exact indicial polynomial when available (always at t = 0).
    pub exact_indicial: Option<QPoly>,
}

impl LocalOp {
    pub fn at_zero(l: &CanonicalOp, prec: u32) -> Result<Self> {
        if l.leading().coeff(0) == 0 {
            return Err(FrobError::ZeroLeadingCoeffAtOrigin);
        }
        let tf = l.theta_form();
        Ok(LocalOp { p: tf.p.iter().map(|q| q.to_complex(prec)).collect(), prec, exact_indicial: Some(tf.p[0].clone()) })
    }

    /// Local operator at a nonzero point c in u = 1 − t/c, normalized so P_0 ≠ 0.
    pub fn at_point(l: &CanonicalOp, c: &Complex, prec: u32) -> Result<Self> {
        let q = l.to_partial_form();
        let d = l.order();
        let lead_sqf = squarefree_part(&l.leading());
        let small = -(prec as f64) / 2.0;
        let mut ords = Vec::with_capacity(d + 1);
        for qk in &q {
            if qk.is_zero() {
                ords.push(usize::MAX);
                continue;
            }
            // exact order of vanishing: peel common factors with the leading coefficient that vanish at c
            let mut h = qk.clone();
            let mut e = 0;
            loop {
                let g = QPoly::gcd(&h, &lead_sqf);
                if g.degree().unwrap_or(0) == 0 {
                    break;
                }
                let gv = g.eval_c(c);
                let scale = g.coeffs().iter().map(|x| x.to_f64().abs().log2()).fold(0.0, f64::max);
                if cabs_log2(&gv) - scale > small {
                    break;
                }
                h = h.div_rem(&g).0;
                e += 1;
            }
            ords.push(e);
        }
        let d0 = (0..=d).filter(|&k| ords[k] != usize::MAX).map(|k| k as i64 - ords[k] as i64).max().unwrap();
        if d as i64 - ords[d] as i64 != d0 {
            return Err(FrobError::NotRegularSingular(crate::arith::fmt_complex(c, 20)));
        }
        let d0 = d0 as usize;
        let minus_c = Complex::with_val(prec, -c);
        let minus_inv_c = Complex::with_val(prec, -1 / Complex::with_val(prec, c));
        // coefficient of u^i in Q_k(c(1−u)), times (−1/c)^k
        let mut qhat: Vec<Vec<Complex>> = Vec::with_capacity(d + 1);
        let mut sk = Complex::with_val(prec, 1);
        for (k, qk) in q.iter().enumerate() {
            let mut tay = complex_taylor_shift(&qk.to_complex(prec), &Complex::with_val(prec, c));
            let mut pw = Complex::with_val(prec, 1);
            for (i, v) in tay.iter_mut().enumerate() {
                if ords[k] == usize::MAX || i < ords[k] {
                    *v = Complex::new(prec);
                } else {
                    *v *= &pw;
                    *v *= &sk;
                }
                pw *= &minus_c;
            }
            qhat.push(tay);
            sk *= &minus_inv_c;
        }
        let jmax = qhat.iter().enumerate().map(|(k, v)| (v.len() + d0).saturating_sub(k)).max().unwrap_or(1);
        let mut p: Vec<Vec<Complex>> = vec![vec![Complex::new(prec); d + 1]; jmax];
        for (k, row) in qhat.iter().enumerate() {
            let ff = falling_factorial_poly(k).to_complex(prec);
            for (i, v) in row.iter().enumerate() {
                if is_czero(v) || i + d0 < k {
                    continue;
                }
                let j = i + d0 - k;
                for (a, f) in ff.iter().enumerate() {
                    let t = Complex::with_val(prec, v * f);
                    p[j][a] += t;
                }
            }
        }
        while p.len() > 1 && p.last().unwrap().iter().all(is_czero) {
            p.pop();
        }
        Ok(LocalOp { p, prec, exact_indicial: None })
    }

    pub fn indicial(&self) -> &[Complex] {
        &self.p[0]
    }

    /// Local exponents with multiplicities: exact at t = 0, numeric (snapped to rationals when close) elsewhere.
    pub fn exponents(&self) -> Vec<(Exponent, usize)> {
        let prec = self.prec;
        if let Some(i) = &self.exact_indicial {
            return exact_roots(i, prec)
                .into_iter()
                .map(|r| (r.exact.map(Exponent::Exact).unwrap_or(Exponent::Numeric(r.value)), r.multiplicity))
                .collect();
        }
        let work = prec + 32;
        let coeffs: Vec<Complex> = self.p[0].iter().map(|x| Complex::with_val(work, x)).collect();
        let roots = numeric_roots(&coeffs, work);
        let mut out = Vec::new();
        for (z, m) in cluster_roots(&roots, -(prec as f64) / 4.0) {
            let z = polish_multiple_root(&coeffs, &z, m, work);
            let e = match snap_rational(&z, 10_000, -(prec as f64) / 2.0 + 16.0) {
                Some(q) => Exponent::Exact(q),
                None => Exponent::Numeric(Complex::with_val(prec, &z)),
            };
            out.push((e, m));
        }
        out
    }
}

/// Exponents grouped modulo ℤ: base (smallest real part) and (offset, multiplicity) members.
#[derive(Clone, Debug)]
pub struct ExponentClass {
    pub base: Exponent,
    pub members: Vec<(usize, usize)>,
    pub mu: usize,
}

impl ExponentClass {
    pub fn multiplicity_at(&self, n: usize) -> usize {
        self.members.iter().find(|m| m.0 == n).map(|m| m.1).unwrap_or(0)
    }

    pub fn max_offset(&self) -> usize {
        self.members.iter().map(|m| m.0).max().unwrap_or(0)
    }
}

fn integer_offset(a: &Exponent, b: &Exponent, prec: u32) -> Option<i64> {
    match (a.exact(), b.exact()) {
        (Some(x), Some(y)) => {
            let d = Rational::from(x - y);
            if *d.denom() == 1 {
                d.numer().to_i64()
            } else {
                None
            }
        }
        _ => {
            let d = Complex::with_val(prec, a.value(prec) - b.value(prec));
            let re = d.real().to_f64().round();
            let off = Complex::with_val(prec, &d - re);
            if cabs_log2(&off) < -(prec as f64) / 4.0 {
                Some(re as i64)
            } else {
                None
            }
        }
    }
}

pub fn group_exponents(exps: &[(Exponent, usize)], prec: u32) -> Vec<ExponentClass> {
    let mut sorted: Vec<(Exponent, usize)> = exps.to_vec();
    sorted.sort_by(|a, b| a.0.value(prec).real().partial_cmp(b.0.value(prec).real()).unwrap());
    let mut classes: Vec<ExponentClass> = Vec::new();
    for (e, m) in sorted {
        if let Some(cl) = classes.iter_mut().find(|cl| integer_offset(&e, &cl.base, prec).map(|o| o >= 0).unwrap_or(false)) {
            let off = integer_offset(&e, &cl.base, prec).unwrap() as usize;
            cl.members.push((off, m));
            cl.mu += m;
        } else {
            classes.push(ExponentClass { base: e, members: vec![(0, m)], mu: m });
        }
    }
    classes
}

/// Data of one resonance: P_0(e+n+S) = S^m·U with U = Σ u_l S^l.
#[derive(Clone, Debug)]
pub struct Resonance {
    pub n: usize,
    pub m: usize,
    pub u: Vec<Complex>,
    pub first_param: usize,
}

#[derive(Clone, Debug)]
pub struct ClassSolutions {
    pub class: ExponentClass,
    /// One series per parameter, all written with the class base exponent.
    pub series: Vec<LogSeries<Complex>>,
    pub resonances: Vec<Resonance>,
}

fn apply_shifted(a: &[Complex], v: &[Complex], prec: u32) -> Vec<Complex> {
    // (Σ_i a_i S^i v)_k = Σ_i a_i v_{k+i}
    let mu = v.len();
    (0..mu)
        .map(|k| {
            let mut s = Complex::new(prec);
            for (i, ai) in a.iter().enumerate() {
                if k + i >= mu {
                    break;
                }
                if !is_czero(ai) && !is_czero(&v[k + i]) {
                    s += Complex::with_val(prec, ai * &v[k + i]);
                }
            }
            s
        })
        .collect()
}

fn class_solutions(op: &LocalOp, class: &ExponentClass, terms: usize) -> ClassSolutions {
    let prec = op.prec;
    let mu = class.mu;
    let e = class.base.value(prec);
    // c[n][p] is the log-coefficient vector (length mu) of parameter p at u^{e+n}
    let mut c: Vec<Vec<Vec<Complex>>> = Vec::with_capacity(terms);
    let mut resonances = Vec::new();
    let mut next_param = 0;
    let jmax = op.p.len() - 1;
    for n in 0..terms {
        let mut rhs: Vec<Vec<Complex>> = vec![vec![Complex::new(prec); mu]; mu];
        for j in 1..=jmax.min(n) {
            let x = Complex::with_val(prec, &e + (n - j) as u32);
            let a = complex_taylor_shift(&op.p[j], &x);
            for (pi, rp) in rhs.iter_mut().enumerate() {
                let v = apply_shifted(&a, &c[n - j][pi], prec);
                for (r, w) in rp.iter_mut().zip(v) {
                    *r -= w;
                }
            }
        }
        let m = class.multiplicity_at(n);
        let x = Complex::with_val(prec, &e + n as u32);
        let a = complex_taylor_shift(&op.p[0], &x);
        let u: Vec<Complex> = (m..m + mu).map(|i| a.get(i).cloned().unwrap_or_else(|| Complex::new(prec))).collect();
        let mut level: Vec<Vec<Complex>> = Vec::with_capacity(mu);
        for (pi, rp) in rhs.iter().enumerate() {
            let mut y: Vec<Complex> = vec![Complex::new(prec); mu];
            for k in 0..mu {
                if k < m {
                    if pi >= next_param && pi - next_param == k {
                        y[k] = Complex::with_val(prec, 1);
                    }
                } else {
                    y[k] = rp[k - m].clone();
                }
            }
            // back substitution for U c = y
            let mut cv: Vec<Complex> = vec![Complex::new(prec); mu];
            for k in (0..mu).rev() {
                let mut s = y[k].clone();
                for l in 1..u.len() {
                    if k + l < mu {
                        s -= Complex::with_val(prec, &u[l] * &cv[k + l]);
                    }
                }
                cv[k] = s / &u[0];
            }
            level.push(cv);
        }
        if m > 0 {
            resonances.push(Resonance { n, m, u, first_param: next_param });
            next_param += m;
        }
        c.push(level);
    }
    let series = (0..mu)
        .map(|pi| LogSeries { exponent: e.clone(), coeffs: c.iter().map(|lvl| lvl[pi].clone()).collect() })
        .collect();
    ClassSolutions { class: class.clone(), series, resonances }
}

/// A full local solution basis.
#[derive(Clone, Debug)]
pub struct LocalBasis {
    pub center: Center,
    pub op: LocalOp,
    pub exponents: Vec<(Exponent, usize)>,
    pub classes: Vec<ClassSolutions>,
    pub dim: usize,
    pub terms: usize,
    pub prec: u32,
}

impl LocalBasis {
    pub fn new(l: &CanonicalOp, center: Center, terms: usize, prec: u32) -> Result<Self> {
        let op = match &center {
            Center::Zero => LocalOp::at_zero(l, prec)?,
            Center::Point(c) => LocalOp::at_point(l, c, prec)?,
        };
        let exponents = op.exponents();
        let dim: usize = exponents.iter().map(|e| e.1).sum();
        if dim != l.order() {
            let label = crate::arith::fmt_complex(&center.point(prec), 20);
            return Err(FrobError::NotRegularSingular(label));
        }
        let classes = group_exponents(&exponents, prec).iter().map(|cl| class_solutions(&op, cl, terms)).collect();
        Ok(LocalBasis { center, op, exponents, classes, dim, terms, prec })
    }

    /// Number of series terms so that evaluation at |u| ≤ ratio·radius reaches `prec` bits.
    pub fn terms_for(ratio: f64, prec: u32) -> usize {
        ((prec as f64 + 64.0) / (-ratio.log2())).ceil() as usize + 40
    }

    pub fn functions(&self) -> Vec<&LogSeries<Complex>> {
        self.classes.iter().flat_map(|c| c.series.iter()).collect()
    }

    /// Rows: d^k/dt^k for k < dim; columns: basis functions. Also returns the worst tail estimate (log2).
    pub fn state_matrix(&self, t: &Complex) -> (CMat, f64) {
        let prec = self.prec;
        let u = self.center.local_var(&Complex::with_val(prec, t));
        let lu = principal_log(&u);
        let f = self.center.du_dt(prec);
        let fs = self.functions();
        let mut m = CMat::zeros(self.dim, fs.len(), prec);
        let mut tail = f64::NEG_INFINITY;
        for (j, s) in fs.iter().enumerate() {
            let v = s.derivative_values(&u, &lu, self.dim);
            tail = tail.max(v.tail_log2);
            let mut fk = Complex::with_val(prec, 1);
            for (k, x) in v.values.iter().enumerate() {
                m.set(k, j, Complex::with_val(prec, x * &fk));
                fk *= &f;
            }
        }
        (m, tail)
    }

    /// Coordinates in this basis of a class-local coefficient table (levels indexed by n, each a log vector).
    pub fn class_coords(&self, class: usize, levels: &[Vec<Complex>]) -> Vec<Complex> {
        let prec = self.prec;
        let cs = &self.classes[class];
        let mut out = vec![Complex::new(prec); cs.class.mu];
        for r in &cs.resonances {
            let y = apply_shifted(&r.u, &levels[r.n], prec);
            for k in 0..r.m {
                out[r.first_param + k] = y[k].clone();
            }
        }
        out
    }

    /// Explicit local monodromy (positive loop around the center) in this basis.
    pub fn sigma(&self) -> CMat {
        let prec = self.prec;
        let mut m = CMat::zeros(self.dim, self.dim, prec);
        let tpi = two_pi_i(prec);
        let mut offset = 0;
        for (ci, cs) in self.classes.iter().enumerate() {
            let mu = cs.class.mu;
            let e = cs.class.base.value(prec);
            let scal = Complex::with_val(prec, &e * &tpi).exp();
            // exp(2πiS) coefficients
            let mut ex = vec![Complex::with_val(prec, 1)];
            for l in 1..mu {
                let v = Complex::with_val(prec, &ex[l - 1] * &tpi) / l as u32;
                ex.push(v);
            }
            let ex: Vec<Complex> = ex.iter().map(|x| Complex::with_val(prec, x * &scal)).collect();
            for (p, s) in cs.series.iter().enumerate() {
                let levels: Vec<Vec<Complex>> = (0..=cs.class.max_offset()).map(|n| apply_shifted(&ex, &s.coeffs[n], prec)).collect();
                let coords = self.class_coords(ci, &levels);
                for (i, v) in coords.into_iter().enumerate() {
                    m.set(offset + i, offset + p, v);
                }
            }
            offset += mu;
        }
        m
    }

    /// Combined coefficient table of Σ x_p f_p restricted to one class.
    pub fn combine(&self, class: usize, x: &[Complex]) -> LogSeries<Complex> {
        let prec = self.prec;
        let cs = &self.classes[class];
        let mut acc = cs.series[0].scale(&Complex::new(prec));
        for (s, xi) in cs.series.iter().zip(x) {
            if !is_czero(xi) {
                acc = acc.add(&s.scale(xi));
            }
        }
        acc
    }

    /// Global parameter index range of a class.
    pub fn class_range(&self, class: usize) -> std::ops::Range<usize> {
        let start: usize = self.classes[..class].iter().map(|c| c.class.mu).sum();
        start..start + self.classes[class].class.mu
    }
}

/// Result of the local analysis at a singular point c.
#[derive(Clone, Debug)]
pub struct SingularityReport {
    pub exponents: Vec<(Exponent, usize)>,
    pub variation_rank: usize,
    pub invariant_dim: usize,
    pub invariants_analytic: bool,
    pub log_obstruction: bool,
    /// Power of (t−c) needed to make the invariant solutions analytic.
    pub pole_order: usize,
}

/// Local exponents of `l` at c and the analyticity of σ_c-invariant solutions of its adjoint.
pub fn local_basis_near_singularity(l: &CanonicalOp, c: &Complex, prec: u32) -> Result<SingularityReport> {
    let lt = l.adjoint();
    let exps = LocalOp::at_point(l, c, prec)?.exponents();
    let terms = 60;
    let basis = LocalBasis::new(&lt, Center::Point(c.clone()), terms, prec)?;
    let sig = basis.sigma().sub(&CMat::identity(basis.dim, prec));
    let thr = -(prec as f64) / 2.0;
    let (s, v) = sig.svd();
    let top = s.first().map(|x| if x.is_zero() { f64::NEG_INFINITY } else { x.clone().log2().to_f64() }).unwrap_or(f64::NEG_INFINITY);
    let ranks: Vec<bool> = s.iter().map(|x| !x.is_zero() && top.is_finite() && x.clone().log2().to_f64() > thr).collect();
    let rank = ranks.iter().filter(|&&b| b).count();
    let mut analytic = true;
    let mut logs = false;
    let mut pole = 0usize;
    for (j, nonzero) in ranks.iter().enumerate() {
        if *nonzero {
            continue;
        }
        let x = v.col(j);
        for ci in 0..basis.classes.len() {
            let r = basis.class_range(ci);
            let xs = &x[r.clone()];
            if xs.iter().all(|z| cabs_log2(z) < thr) {
                continue;
            }
            let f = basis.combine(ci, xs);
            let scale = f.max_mag_log2(f.len());
            let e = &basis.classes[ci].class.base;
            for (n, row) in f.coeffs.iter().enumerate() {
                for (k, z) in row.iter().enumerate() {
                    if cabs_log2(z) - scale < thr {
                        continue;
                    }
                    if k > 0 {
                        logs = true;
                        analytic = false;
                    }
                    match integer_offset(e, &Exponent::Exact(Rational::from(-(n as i64))), prec) {
                        Some(v) if v >= 0 => {}
                        Some(v) => {
                            analytic = false;
                            pole = pole.max((-v) as usize);
                        }
                        None => analytic = false,
                    }
                }
            }
        }
    }
    Ok(SingularityReport { exponents: exps, variation_rank: rank, invariant_dim: basis.dim - rank, invariants_analytic: analytic, log_obstruction: logs, pole_order: pole })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_op;

    fn apery() -> CanonicalOp {
        parse_op("D^3 - t*(2*D+1)*(17*D^2+17*D+5) + t^2*(D+1)^3").unwrap()
    }

    #[test]
    fn mum_basis_at_zero() {
        let b = LocalBasis::new(&apery(), Center::Zero, 10, 128).unwrap();
        assert_eq!(b.classes.len(), 1);
        assert_eq!(b.classes[0].class.mu, 3);
        // the log-free parameter is the Apéry series
        let f = &b.classes[0].series[0];
        let v: Vec<f64> = (0..5).map(|n| f.coeffs[n][0].real().to_f64()).collect();
        assert_eq!(v, vec![1.0, 5.0, 73.0, 1445.0, 33001.0]);
        // σ_0 is unipotent with one Jordan block
        let s = b.sigma();
        let n = s.sub(&CMat::identity(3, 128));
        assert_eq!(n.rank(-64.0).0, 2);
    }

    #[test]
    fn polylog_at_one() {
        let l = parse_op("(D+1)*D - t*(D+1)^2").unwrap();
        let c = Complex::with_val(128, 1);
        let b = LocalBasis::new(&l, Center::Point(c.clone()), 30, 128).unwrap();
        let s = b.sigma().sub(&CMat::identity(2, 128));
        assert_eq!(s.rank(-64.0).0, 1);
        let rep = local_basis_near_singularity(&l, &c, 128).unwrap();
        assert_eq!(rep.variation_rank, 1);
        assert!(rep.invariants_analytic);
    }

    #[test]
    fn ordinary_point_exponents() {
        let l = apery();
        let op = LocalOp::at_point(&l, &Complex::with_val(128, 0.5), 128).unwrap();
        let e: Vec<String> = op.exponents().iter().map(|x| format!("{}:{}", x.0.label(), x.1)).collect();
        let mut e = e;
        e.sort();
        assert_eq!(e, vec!["0:1", "1:1", "2:1"]);
    }

    #[test]
    fn hypergeometric_exponents_at_one() {
        // α = (1/3, 1/2, 2/3), β = (1, 1, 1): exponents 0, 1, γ = Σβ − Σα − 1 = 1/2
        let l = parse_op("D^3 - t*(D+1/3)*(D+1/2)*(D+2/3)").unwrap();
        let op = LocalOp::at_point(&l, &Complex::with_val(128, 1), 128).unwrap();
        let mut e: Vec<String> = op.exponents().iter().map(|x| x.0.label()).collect();
        e.sort();
        assert_eq!(e, vec!["0", "1", "1/2"]);
    }

    #[test]
    fn state_matrix_satisfies_equation() {
        let l = apery();
        let c = l.singularities(192).nearest_to_origin().unwrap().value.clone();
        let b = LocalBasis::new(&l, Center::Point(c.clone()), 200, 192).unwrap();
        let t = Complex::with_val(192, &c * Complex::with_val(192, 0.6));
        let (m, tail) = b.state_matrix(&t);
        assert!(tail < -100.0, "{}", tail);
        // one extra derivative row lets us apply the ∂-form directly
        let q = l.to_partial_form();
        let b4 = LocalBasis { dim: 4, ..b.clone() };
        let (m4, _) = b4.state_matrix(&t);
        for j in 0..3 {
            let mut s = Complex::new(192);
            for (k, qk) in q.iter().enumerate() {
                s += Complex::with_val(192, qk.eval_c(&t) * m4.get(k, j));
            }
            assert!(cabs_log2(&s) < -120.0, "{}", cabs_log2(&s));
        }
        let _ = m;
    }
}
