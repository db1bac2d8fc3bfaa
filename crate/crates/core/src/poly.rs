//! Univariate polynomials over ℚ and numeric root finding.

use crate::arith::{cabs_log2, is_czero, snap_rational};
use rug::{Complex, Float, Integer, Rational};
use std::fmt;

/// Dense polynomial with exact rational coefficients, ascending powers.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct QPoly {
    c: Vec<Rational>,
}

impl fmt::Debug for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QPoly({})", self.to_string_var("x"))
    }
}

impl QPoly {
    pub fn new(mut c: Vec<Rational>) -> Self {
        while c.last().is_some_and(|x| *x == 0) {
            c.pop();
        }
        QPoly { c }
    }

    pub fn from_i64(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| Rational::from(x)).collect())
    }

    pub fn zero() -> Self {
        QPoly { c: vec![] }
    }

    pub fn one() -> Self {
        Self::constant(Rational::from(1))
    }

    pub fn constant(q: Rational) -> Self {
        Self::new(vec![q])
    }

    /// `q·x^k`.
    pub fn monomial(q: Rational, k: usize) -> Self {
        let mut c = vec![Rational::new(); k + 1];
        c[k] = q;
        Self::new(c)
    }

    /// `x - a`.
    pub fn linear_root(a: &Rational) -> Self {
        Self::new(vec![Rational::from(-a), Rational::from(1)])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.c
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.c.get(k).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.c.is_empty() {
            None
        } else {
            Some(self.c.len() - 1)
        }
    }

    pub fn leading(&self) -> Rational {
        self.c.last().cloned().unwrap_or_default()
    }

    pub fn add(&self, o: &QPoly) -> QPoly {
        let n = self.c.len().max(o.c.len());
        let mut r = Vec::with_capacity(n);
        for k in 0..n {
            r.push(self.coeff(k) + o.coeff(k));
        }
        QPoly::new(r)
    }

    pub fn sub(&self, o: &QPoly) -> QPoly {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> QPoly {
        QPoly { c: self.c.iter().map(|x| Rational::from(-x)).collect() }
    }

    pub fn scale(&self, q: &Rational) -> QPoly {
        QPoly::new(self.c.iter().map(|x| Rational::from(x * q)).collect())
    }

    pub fn mul(&self, o: &QPoly) -> QPoly {
        if self.is_zero() || o.is_zero() {
            return QPoly::zero();
        }
        let mut r = vec![Rational::new(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                r[i + j] += Rational::from(a * b);
            }
        }
        QPoly::new(r)
    }

    pub fn pow(&self, e: u32) -> QPoly {
        let mut r = QPoly::one();
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    /// Multiplication by x^k.
    pub fn shift_up(&self, k: usize) -> QPoly {
        if self.is_zero() {
            return QPoly::zero();
        }
        let mut c = vec![Rational::new(); k];
        c.extend(self.c.iter().cloned());
        QPoly { c }
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::new();
        for a in self.c.iter().rev() {
            acc *= x;
            acc += a;
        }
        acc
    }

    pub fn eval_c(&self, x: &Complex) -> Complex {
        let p = x.prec().0;
        let mut acc = Complex::new(p);
        for a in self.c.iter().rev() {
            acc *= x;
            acc += a;
        }
        acc
    }

    pub fn derivative(&self) -> QPoly {
        if self.c.len() <= 1 {
            return QPoly::zero();
        }
        QPoly::new(self.c.iter().enumerate().skip(1).map(|(k, a)| Rational::from(a * k as u32)).collect())
    }

    /// Theta derivative x·p'(x).
    pub fn theta_derivative(&self) -> QPoly {
        QPoly::new(self.c.iter().enumerate().map(|(k, a)| Rational::from(a * k as u32)).collect())
    }

    /// p(x + a).
    pub fn taylor_shift(&self, a: &Rational) -> QPoly {
        let mut c = self.c.clone();
        let n = c.len();
        for i in 0..n {
            for j in (i..n.saturating_sub(1)).rev() {
                let t = Rational::from(&c[j + 1] * a);
                c[j] += t;
            }
        }
        QPoly::new(c)
    }

    /// p(-x).
    pub fn reflect(&self) -> QPoly {
        QPoly::new(self.c.iter().enumerate().map(|(k, a)| if k % 2 == 1 { Rational::from(-a) } else { a.clone() }).collect())
    }

    /// p(x)·c^{-deg}-free substitution p(a·x + b).
    pub fn compose_linear(&self, a: &Rational, b: &Rational) -> QPoly {
        let lin = QPoly::new(vec![b.clone(), a.clone()]);
        let mut acc = QPoly::zero();
        for coef in self.c.iter().rev() {
            acc = acc.mul(&lin).add(&QPoly::constant(coef.clone()));
        }
        acc
    }

    pub fn div_rem(&self, d: &QPoly) -> (QPoly, QPoly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let dd = d.c.len() - 1;
        if self.c.len() < d.c.len() {
            return (QPoly::zero(), self.clone());
        }
        let mut r = self.c.clone();
        let mut q = vec![Rational::new(); self.c.len() - dd];
        let lead = d.leading();
        for i in (0..q.len()).rev() {
            let f = Rational::from(&r[i + dd] / &lead);
            if f != 0 {
                for (j, b) in d.c.iter().enumerate() {
                    r[i + j] -= Rational::from(&f * b);
                }
            }
            q[i] = f;
        }
        r.truncate(dd);
        (QPoly::new(q), QPoly::new(r))
    }

    pub fn monic(&self) -> QPoly {
        if self.is_zero() {
            return QPoly::zero();
        }
        let l = Rational::from(1) / self.leading();
        self.scale(&l)
    }

    pub fn gcd(a: &QPoly, b: &QPoly) -> QPoly {
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.is_zero() {
            let (_, r) = x.div_rem(&y);
            x = y;
            y = r;
        }
        x.monic()
    }

    /// Order of vanishing at x = 0.
    pub fn valuation(&self) -> usize {
        self.c.iter().position(|x| *x != 0).unwrap_or(0)
    }

    /// Largest e with f^e | self (self nonzero, f non-constant).
    pub fn multiplicity_of(&self, f: &QPoly) -> usize {
        let mut e = 0;
        let mut cur = self.clone();
        while !cur.is_zero() {
            let (q, r) = cur.div_rem(f);
            if !r.is_zero() {
                break;
            }
            e += 1;
            cur = q;
        }
        e
    }

    /// Square-free decomposition (Yun): pairs (factor, multiplicity) with monic squarefree factors.
    pub fn squarefree(&self) -> Vec<(QPoly, usize)> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let f = self.monic();
        let fp = f.derivative();
        let a0 = QPoly::gcd(&f, &fp);
        let mut b = f.div_rem(&a0).0;
        let mut c = fp.div_rem(&a0).0;
        let mut d = c.sub(&b.derivative());
        let mut i = 1;
        loop {
            let a = QPoly::gcd(&b, &d);
            if a.degree().unwrap_or(0) > 0 {
                out.push((a.clone(), i));
            }
            b = b.div_rem(&a).0;
            if b.degree().unwrap_or(0) == 0 {
                break;
            }
            c = d.div_rem(&a).0;
            d = c.sub(&b.derivative());
            i += 1;
        }
        out
    }

    pub fn to_complex(&self, prec: u32) -> Vec<Complex> {
        self.c.iter().map(|q| Complex::with_val(prec, q)).collect()
    }

    /// Human-readable form such as `t^2 - 34*t + 1`, re-parseable by the operator parser.
    pub fn to_string_var(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (k, a) in self.c.iter().enumerate().rev() {
            if *a == 0 {
                continue;
            }
            let neg = *a < 0;
            let mag = Rational::from(a.abs_ref());
            if s.is_empty() {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let coef = if mag.denom() == &1 { mag.numer().to_string() } else { format!("({})", mag) };
            match k {
                0 => s.push_str(&coef),
                _ => {
                    if mag != 1 {
                        s.push_str(&coef);
                        s.push('*');
                    }
                    s.push_str(var);
                    if k > 1 {
                        s.push_str(&format!("^{}", k));
                    }
                }
            }
        }
        s
    }
}

/// A root of an exact polynomial, with multiplicity and an exact value when rational.
#[derive(Clone, Debug)]
pub struct PolyRoot {
    pub value: Complex,
    pub exact: Option<Rational>,
    pub multiplicity: usize,
    /// Radius of a disk around `value` known to contain the root and no other root.
    pub isolation_radius: f64,
}

/// Roots of an exact polynomial with multiplicities: square-free split, exact rational detection, numeric isolation.
pub fn exact_roots(p: &QPoly, prec: u32) -> Vec<PolyRoot> {
    let mut out = Vec::new();
    for (f, m) in p.squarefree() {
        let mut rest = f.clone();
        // rational roots: snap numeric approximations and verify exactly
        let approx = numeric_roots(&rest.to_complex(prec.max(128)), prec.max(128));
        let bound = lcm_of_denominators(&rest) * rest.leading().numer().clone().abs();
        let max_den = bound.to_u64().unwrap_or(u64::MAX).clamp(1, 1 << 40);
        for z in &approx {
            if let Some(q) = snap_rational(z, max_den, -(prec.max(128) as f64) / 2.0) {
                if rest.eval(&q) == 0 {
                    rest = rest.div_rem(&QPoly::linear_root(&q)).0;
                    out.push(PolyRoot { value: Complex::with_val(prec, &q), exact: Some(q), multiplicity: m, isolation_radius: 0.0 });
                }
            }
        }
        if rest.degree().unwrap_or(0) > 0 {
            let work = prec + 32;
            let zs = numeric_roots(&rest.to_complex(work), work);
            for z in zs {
                out.push(PolyRoot { value: Complex::with_val(prec, &z), exact: None, multiplicity: m, isolation_radius: 0.0 });
            }
        }
    }
    // isolation radii: Newton inclusion bound n|f/f'| on the square-free part, capped by half the separation
    let sqf = squarefree_part(p);
    let n = sqf.degree().unwrap_or(0) as f64;
    let dsqf = sqf.derivative();
    let vals: Vec<Complex> = out.iter().map(|r| r.value.clone()).collect();
    for (i, r) in out.iter_mut().enumerate() {
        if r.exact.is_some() {
            r.isolation_radius = 0.0;
            continue;
        }
        let fv = sqf.eval_c(&r.value);
        let dv = dsqf.eval_c(&r.value);
        let inc = (cabs_log2(&fv) - cabs_log2(&dv)).exp2() * n;
        let mut sep = f64::INFINITY;
        for (j, w) in vals.iter().enumerate() {
            if i != j {
                let d = Complex::with_val(64, &r.value - w);
                sep = sep.min(cabs_log2(&d).exp2());
            }
        }
        r.isolation_radius = if inc < sep / 2.0 { inc.max(f64::MIN_POSITIVE) } else { f64::NAN };
    }
    out
}

pub fn squarefree_part(p: &QPoly) -> QPoly {
    let mut r = QPoly::one();
    for (f, _) in p.squarefree() {
        r = r.mul(&f);
    }
    r
}

fn lcm_of_denominators(p: &QPoly) -> Integer {
    let mut l = Integer::from(1);
    for c in p.coeffs() {
        l.lcm_mut(c.denom());
    }
    l
}

fn horner_c(c: &[Complex], z: &Complex) -> (Complex, Complex) {
    let p = z.prec().0;
    let mut f = Complex::new(p);
    let mut df = Complex::new(p);
    for a in c.iter().rev() {
        df *= z;
        df += &f;
        f *= z;
        f += a;
    }
    (f, df)
}

/// All complex roots of a polynomial with complex coefficients (ascending), by Aberth–Ehrlich iteration.
/// Multiple roots converge linearly; callers needing them should cluster (see [`cluster_roots`]).
pub fn numeric_roots(coeffs: &[Complex], prec: u32) -> Vec<Complex> {
    let mut c: Vec<Complex> = coeffs.to_vec();
    while c.len() > 1 && is_czero(c.last().unwrap()) {
        c.pop();
    }
    let n = c.len().saturating_sub(1);
    if n == 0 {
        return vec![];
    }
    // strip zero roots
    let z0 = c.iter().position(|x| !is_czero(x)).unwrap();
    let mut roots: Vec<Complex> = (0..z0).map(|_| Complex::new(prec)).collect();
    let c: Vec<Complex> = c[z0..].iter().map(|x| Complex::with_val(prec, x)).collect();
    let n = c.len() - 1;
    if n == 0 {
        return roots;
    }
    let lead = c[n].clone();
    let c: Vec<Complex> = c.iter().map(|x| Complex::with_val(prec, x / &lead)).collect();
    if n == 1 {
        roots.push(Complex::with_val(prec, -&c[0]));
        return roots;
    }
    // starting radius from Fujiwara-type bound
    let mut rad = 0f64;
    for (k, a) in c.iter().enumerate().take(n) {
        let v = cabs_log2(a);
        if v.is_finite() {
            rad = rad.max((v / (n - k) as f64).exp2());
        }
    }
    let rad = (rad * 1.0).max(1e-3);
    let mut z: Vec<Complex> = (0..n)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64) + 0.4;
            Complex::with_val(prec, (rad * ang.cos(), rad * ang.sin()))
        })
        .collect();
    let tol = -(prec as f64) + 12.0;
    let mut done = vec![false; n];
    for _iter in 0..(500 + 4 * prec as usize) {
        let mut all = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (f, df) = horner_c(&c, &z[i]);
            if is_czero(&f) {
                done[i] = true;
                continue;
            }
            let ratio = Complex::with_val(prec, &f / &df);
            let mut s = Complex::new(prec);
            for j in 0..n {
                if j != i {
                    let d = Complex::with_val(prec, &z[i] - &z[j]);
                    if !is_czero(&d) {
                        s += Complex::with_val(prec, 1 / d);
                    }
                }
            }
            let denom = Complex::with_val(prec, 1 - Complex::with_val(prec, &ratio * &s));
            let w = Complex::with_val(prec, &ratio / &denom);
            let step = cabs_log2(&w);
            let mag = cabs_log2(&z[i]).max(0.0);
            z[i] -= &w;
            if step - mag < tol {
                done[i] = true;
            } else {
                all = false;
            }
        }
        if all {
            break;
        }
    }
    roots.extend(z);
    roots
}

/// Groups numeric roots whose mutual distance is below `2^tol_log2`, returning (mean, multiplicity).
pub fn cluster_roots(roots: &[Complex], tol_log2: f64) -> Vec<(Complex, usize)> {
    let mut used = vec![false; roots.len()];
    let mut out = Vec::new();
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        let p = roots[i].prec().0;
        let mut members = vec![i];
        used[i] = true;
        let mut changed = true;
        while changed {
            changed = false;
            for j in 0..roots.len() {
                if used[j] {
                    continue;
                }
                if members.iter().any(|&m| cabs_log2(&Complex::with_val(p, &roots[m] - &roots[j])) < tol_log2) {
                    members.push(j);
                    used[j] = true;
                    changed = true;
                }
            }
        }
        let mut mean = Complex::new(p);
        for &m in &members {
            mean += &roots[m];
        }
        mean /= members.len() as u32;
        out.push((mean, members.len()));
    }
    out
}

/// Refines an m-fold root of a complex polynomial by Newton iteration on the (m-1)-th derivative.
pub fn polish_multiple_root(coeffs: &[Complex], z: &Complex, m: usize, prec: u32) -> Complex {
    let mut c: Vec<Complex> = coeffs.iter().map(|x| Complex::with_val(prec, x)).collect();
    for _ in 1..m {
        c = c.iter().enumerate().skip(1).map(|(k, a)| Complex::with_val(prec, a * k as u32)).collect();
    }
    let mut z = Complex::with_val(prec, z);
    for _ in 0..64 {
        let (f, df) = horner_c(&c, &z);
        if is_czero(&df) {
            break;
        }
        let w = Complex::with_val(prec, &f / &df);
        let small = cabs_log2(&w) - cabs_log2(&z).max(0.0) < -(prec as f64) + 4.0;
        z -= w;
        if small {
            break;
        }
    }
    z
}

/// Taylor coefficients of a complex polynomial at `x`: p(x + u) = Σ out[i] u^i.
pub fn complex_taylor_shift(c: &[Complex], x: &Complex) -> Vec<Complex> {
    let mut c: Vec<Complex> = c.to_vec();
    let n = c.len();
    for i in 0..n {
        for j in (i..n.saturating_sub(1)).rev() {
            let t = Complex::with_val(c[j].prec().0, &c[j + 1] * x);
            c[j] += t;
        }
    }
    c
}

/// Evaluates a rational polynomial's Taylor data p^{(i)}(x)/i! for i ≤ k at a float point.
pub fn float_eval(c: &[Rational], x: &Float) -> Float {
    let mut acc = Float::new(x.prec());
    for a in c.iter().rev() {
        acc *= x;
        acc += a;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> Rational {
        Rational::from((a, b))
    }

    #[test]
    fn arithmetic_and_division() {
        let a = QPoly::from_i64(&[1, -34, 1]);
        let b = QPoly::from_i64(&[-1, 1]);
        let p = a.mul(&b);
        let (qq, r) = p.div_rem(&b);
        assert_eq!(qq, a);
        assert!(r.is_zero());
        assert_eq!(p.eval(&q(1, 1)), 0);
    }

    #[test]
    fn taylor_shift_matches_substitution() {
        let a = QPoly::from_i64(&[5, 27, 51, 34]);
        let s = a.taylor_shift(&q(1, 2));
        for x in [q(0, 1), q(3, 7), q(-2, 1)] {
            assert_eq!(s.eval(&x), a.eval(&Rational::from(&x + q(1, 2))));
        }
        assert_eq!(a.compose_linear(&q(-1, 1), &q(1, 2)).eval(&q(1, 3)), a.eval(&q(1, 6)));
    }

    #[test]
    fn squarefree_of_cubes() {
        // s^3 (s+1)^2 (2s-1)
        let p = QPoly::from_i64(&[0, 1]).pow(3).mul(&QPoly::from_i64(&[1, 1]).pow(2)).mul(&QPoly::from_i64(&[-1, 2]));
        let sf = p.squarefree();
        let mut mult: Vec<usize> = sf.iter().map(|(_, m)| *m).collect();
        mult.sort();
        assert_eq!(mult, vec![1, 2, 3]);
        let roots = exact_roots(&p, 128);
        let mut ex: Vec<(Rational, usize)> = roots.iter().map(|r| (r.exact.clone().unwrap(), r.multiplicity)).collect();
        ex.sort();
        assert_eq!(ex, vec![(q(-1, 1), 2), (q(0, 1), 3), (q(1, 2), 1)]);
    }

    #[test]
    fn irrational_roots_isolated() {
        let p = QPoly::from_i64(&[1, -34, 1]);
        let roots = exact_roots(&p, 256);
        assert_eq!(roots.len(), 2);
        let sqrt2 = Float::with_val(256, 2).sqrt();
        let want = Float::with_val(256, 17 - Float::with_val(256, &sqrt2 * 12));
        let found = roots.iter().any(|r| {
            let d = Float::with_val(256, r.value.real() - &want);
            d.is_zero() || d.abs().log2().to_f64() < -240.0
        });
        assert!(found);
        for r in &roots {
            assert!(r.isolation_radius.is_finite() && r.isolation_radius < 1e-60);
        }
    }

    #[test]
    fn clusters_double_root() {
        let p = QPoly::from_i64(&[1, -2, 1]).mul(&QPoly::from_i64(&[3, 1]));
        let c = p.to_complex(200);
        let r = numeric_roots(&c, 200);
        let cl = cluster_roots(&r, -40.0);
        assert_eq!(cl.len(), 2);
        let (z, m) = cl.iter().find(|(_, m)| *m == 2).unwrap().clone();
        assert_eq!(m, 2);
        let z = polish_multiple_root(&c, &z, 2, 200);
        let d = Complex::with_val(200, &z - 1);
        assert!(cabs_log2(&d) < -180.0);
    }

    #[test]
    fn printing() {
        assert_eq!(QPoly::from_i64(&[1, -34, 1]).to_string_var("t"), "t^2 - 34*t + 1");
        assert_eq!(QPoly::new(vec![q(1, 2), q(-1, 1)]).to_string_var("D"), "-D + (1/2)");
    }
}
