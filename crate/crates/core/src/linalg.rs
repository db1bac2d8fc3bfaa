//! Small dense complex matrices at MPC precision.

use crate::arith::{cabs_log2, is_czero};
use crate::error::{FrobError, Result};
use rug::{Complex, Float};

#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    pub prec: u32,
    pub data: Vec<Complex>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize, prec: u32) -> Self {
        CMat { rows, cols, prec, data: vec![Complex::new(prec); rows * cols] }
    }

    pub fn identity(n: usize, prec: u32) -> Self {
        let mut m = Self::zeros(n, n, prec);
        for i in 0..n {
            m.data[i * n + i] = Complex::with_val(prec, 1);
        }
        m
    }

    /// Builds from columns.
    pub fn from_cols(cols: &[Vec<Complex>], prec: u32) -> Self {
        let c = cols.len();
        let r = cols.first().map(|v| v.len()).unwrap_or(0);
        let mut m = Self::zeros(r, c, prec);
        for (j, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                m.data[i * c + j] = Complex::with_val(prec, v);
            }
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> &Complex {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex) {
        self.data[i * self.cols + j] = v;
    }

    pub fn col(&self, j: usize) -> Vec<Complex> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn mul(&self, o: &CMat) -> CMat {
        assert_eq!(self.cols, o.rows);
        let p = self.prec.max(o.prec);
        let mut out = CMat::zeros(self.rows, o.cols, p);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if is_czero(a) {
                    continue;
                }
                for j in 0..o.cols {
                    let t = Complex::with_val(p, a * o.get(k, j));
                    out.data[i * o.cols + j] += t;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex]) -> Vec<Complex> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut s = Complex::new(self.prec);
                for (k, x) in v.iter().enumerate() {
                    s += Complex::with_val(self.prec, self.get(i, k) * x);
                }
                s
            })
            .collect()
    }

    pub fn add(&self, o: &CMat) -> CMat {
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&o.data) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, o: &CMat) -> CMat {
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&o.data) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, s: &Complex) -> CMat {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= s;
        }
        out
    }

    /// Largest entry magnitude (log2).
    pub fn max_abs_log2(&self) -> f64 {
        self.data.iter().map(cabs_log2).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Inverse by Gauss–Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<CMat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let p = self.prec;
        let mut a = self.clone();
        let mut inv = CMat::identity(n, p);
        for col in 0..n {
            let piv = (col..n).max_by(|&x, &y| cabs_log2(a.get(x, col)).partial_cmp(&cabs_log2(a.get(y, col))).unwrap()).unwrap();
            if is_czero(a.get(piv, col)) {
                return Err(FrobError::Numerical("singular matrix".into()));
            }
            if piv != col {
                for j in 0..n {
                    a.data.swap(piv * n + j, col * n + j);
                    inv.data.swap(piv * n + j, col * n + j);
                }
            }
            let d = Complex::with_val(p, 1 / a.get(col, col));
            for j in 0..n {
                a.data[col * n + j] *= &d;
                inv.data[col * n + j] *= &d;
            }
            for i in 0..n {
                if i == col {
                    continue;
                }
                let f = a.get(i, col).clone();
                if is_czero(&f) {
                    continue;
                }
                for j in 0..n {
                    let t = Complex::with_val(p, &f * a.get(col, j));
                    a.data[i * n + j] -= t;
                    let t = Complex::with_val(p, &f * inv.get(col, j));
                    inv.data[i * n + j] -= t;
                }
            }
        }
        Ok(inv)
    }

    pub fn solve(&self, b: &[Complex]) -> Result<Vec<Complex>> {
        Ok(self.inverse()?.mul_vec(b))
    }

    /// One-sided Jacobi SVD: singular values (descending) and the matching right singular vectors.
    pub fn svd(&self) -> (Vec<Float>, CMat) {
        let p = self.prec;
        let (m, n) = (self.rows, self.cols);
        let mut a = self.clone();
        let mut v = CMat::identity(n, p);
        let eps_log2 = -(p as f64) + 8.0;
        for _sweep in 0..80 {
            let mut rotated = false;
            for i in 0..n {
                for j in (i + 1)..n {
                    let mut alpha = Float::new(p);
                    let mut beta = Float::new(p);
                    let mut gamma = Complex::new(p);
                    for r in 0..m {
                        let x = a.get(r, i);
                        let y = a.get(r, j);
                        alpha += Float::with_val(p, x.norm_ref());
                        beta += Float::with_val(p, y.norm_ref());
                        gamma += Complex::with_val(p, Complex::with_val(p, x.conj_ref()) * y);
                    }
                    let g = Float::with_val(p, gamma.abs_ref());
                    if g.is_zero() {
                        continue;
                    }
                    let ab = Float::with_val(p, &alpha * &beta).sqrt();
                    if ab.is_zero() || (g.clone().log2().to_f64() - ab.clone().log2().to_f64()) < eps_log2 {
                        continue;
                    }
                    rotated = true;
                    let zeta = Float::with_val(p, &beta - &alpha) / Float::with_val(p, &g * 2u32);
                    let root = Float::with_val(p, Float::with_val(p, zeta.square_ref()) + 1u32).sqrt();
                    let mut t = Float::with_val(p, 1) / Float::with_val(p, zeta.clone().abs() + &root);
                    if zeta.is_sign_negative() {
                        t = -t;
                    }
                    let c = Float::with_val(p, 1) / Float::with_val(p, Float::with_val(p, t.square_ref()) + 1u32).sqrt();
                    let s = Float::with_val(p, &c * &t);
                    // phase e^{-iφ} with γ = |γ| e^{iφ}
                    let ph = Complex::with_val(p, gamma.conj_ref()) / &g;
                    for r in 0..m {
                        let x = a.get(r, i).clone();
                        let y = Complex::with_val(p, a.get(r, j) * &ph);
                        let nx = Complex::with_val(p, &x * &c) - Complex::with_val(p, &y * &s);
                        let ny = Complex::with_val(p, &x * &s) + Complex::with_val(p, &y * &c);
                        a.set(r, i, nx);
                        a.set(r, j, ny);
                    }
                    for r in 0..n {
                        let x = v.get(r, i).clone();
                        let y = Complex::with_val(p, v.get(r, j) * &ph);
                        let nx = Complex::with_val(p, &x * &c) - Complex::with_val(p, &y * &s);
                        let ny = Complex::with_val(p, &x * &s) + Complex::with_val(p, &y * &c);
                        v.set(r, i, nx);
                        v.set(r, j, ny);
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let mut sv: Vec<(Float, usize)> = (0..n)
            .map(|j| {
                let mut s = Float::new(p);
                for r in 0..m {
                    s += Float::with_val(p, a.get(r, j).norm_ref());
                }
                (s.sqrt(), j)
            })
            .collect();
        sv.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
        let mut vs = CMat::zeros(n, n, p);
        for (newj, (_, oldj)) in sv.iter().enumerate() {
            for r in 0..n {
                vs.set(r, newj, v.get(r, *oldj).clone());
            }
        }
        (sv.into_iter().map(|x| x.0).collect(), vs)
    }

    /// Numerical rank with singular values below `2^thresh_log2 · σ_max` treated as zero.
    pub fn rank(&self, thresh_log2: f64) -> (usize, Vec<f64>) {
        let (s, _) = self.svd();
        let logs: Vec<f64> = s.iter().map(|x| if x.is_zero() { f64::NEG_INFINITY } else { x.clone().log2().to_f64() }).collect();
        let top = logs.first().cloned().unwrap_or(f64::NEG_INFINITY);
        if !top.is_finite() {
            return (0, logs);
        }
        (logs.iter().filter(|&&l| l - top > thresh_log2).count(), logs)
    }

    /// Logarithm of a unipotent matrix: Σ (-1)^{k+1} X^k / k with X = M - I.
    pub fn log_unipotent(&self) -> CMat {
        let n = self.rows;
        let x = self.sub(&CMat::identity(n, self.prec));
        let mut acc = CMat::zeros(n, n, self.prec);
        let mut pw = x.clone();
        for k in 1..=n {
            let mut term = pw.scale(&Complex::with_val(self.prec, 1));
            for d in term.data.iter_mut() {
                *d /= k as u32;
                if k % 2 == 0 {
                    *d = Complex::with_val(self.prec, -&*d);
                }
            }
            acc = acc.add(&term);
            pw = pw.mul(&x);
        }
        acc
    }
}

pub fn vec_norm_log2(v: &[Complex]) -> f64 {
    v.iter().map(cabs_log2).fold(f64::NEG_INFINITY, f64::max)
}

pub fn vec_sub(a: &[Complex], b: &[Complex]) -> Vec<Complex> {
    a.iter().zip(b).map(|(x, y)| Complex::with_val(x.prec().0, x - y)).collect()
}

pub fn vec_scale(a: &[Complex], s: &Complex) -> Vec<Complex> {
    a.iter().map(|x| Complex::with_val(x.prec().0, x * s)).collect()
}

/// Hermitian inner product Σ conj(a_i) b_i.
pub fn dot_h(a: &[Complex], b: &[Complex]) -> Complex {
    let p = a.first().map(|x| x.prec().0).unwrap_or(64);
    let mut s = Complex::new(p);
    for (x, y) in a.iter().zip(b) {
        s += Complex::with_val(p, Complex::with_val(p, x.conj_ref()) * y);
    }
    s
}

/// Least-squares coefficient λ minimizing |v - λ d|.
pub fn project_onto(v: &[Complex], d: &[Complex]) -> Complex {
    let num = dot_h(d, v);
    let den = dot_h(d, d);
    Complex::with_val(num.prec().0, &num / &den)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[(f64, f64)]], p: u32) -> CMat {
        let r = rows.len();
        let c = rows[0].len();
        let mut out = CMat::zeros(r, c, p);
        for i in 0..r {
            for j in 0..c {
                out.set(i, j, Complex::with_val(p, rows[i][j]));
            }
        }
        out
    }

    #[test]
    fn inverse_round_trip() {
        let a = m(&[&[(2.0, 1.0), (1.0, 0.0)], &[(0.0, -1.0), (3.0, 0.5)]], 200);
        let i = a.mul(&a.inverse().unwrap());
        assert!(i.sub(&CMat::identity(2, 200)).max_abs_log2() < -190.0);
    }

    #[test]
    fn svd_rank_one() {
        // outer product u v^T has rank 1
        let u = [(1.0, 0.5), (2.0, 0.0), (0.0, -1.0)];
        let v = [(3.0, 0.0), (0.0, 1.0), (1.0, 1.0)];
        let mut a = CMat::zeros(3, 3, 256);
        for i in 0..3 {
            for j in 0..3 {
                let x = Complex::with_val(256, u[i]) * Complex::with_val(256, v[j]);
                a.set(i, j, x);
            }
        }
        let (r, logs) = a.rank(-128.0);
        assert_eq!(r, 1, "{:?}", logs);
        let (_, vs) = a.svd();
        // last right singular vector lies in the kernel
        let k = a.mul_vec(&vs.col(2));
        assert!(vec_norm_log2(&k) < -200.0);
    }

    #[test]
    fn unipotent_log() {
        // exp(N) with N = [[0,1],[0,0]] is [[1,1],[0,1]]
        let a = m(&[&[(1.0, 0.0), (1.0, 0.0)], &[(0.0, 0.0), (1.0, 0.0)]], 128);
        let l = a.log_unipotent();
        assert_eq!(*l.get(0, 1), Complex::with_val(128, 1));
        assert!(crate::arith::is_czero(l.get(0, 0)));
    }
}
