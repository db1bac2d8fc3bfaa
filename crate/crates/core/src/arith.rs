//! Scalar plumbing shared by the exact and floating code paths.

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float, Integer, Rational};
use std::fmt::Debug;

/// Field elements used by jets and tables: exact rationals or MPC complex numbers.
pub trait Scalar: Clone + Debug + Send + Sync + 'static {
    /// Construction context (precision for floats, unit for rationals).
    type Ctx: Copy + Debug + Send + Sync;

    fn ctx(&self) -> Self::Ctx;
    fn zero(ctx: Self::Ctx) -> Self;
    fn one(ctx: Self::Ctx) -> Self;
    fn from_q(q: &Rational, ctx: Self::Ctx) -> Self;
    fn sadd(&self, o: &Self) -> Self;
    fn ssub(&self, o: &Self) -> Self;
    fn smul(&self, o: &Self) -> Self;
    fn sdiv(&self, o: &Self) -> Self;
    fn sneg(&self) -> Self;
    fn is_exact_zero(&self) -> bool;
    fn to_complex(&self, prec: u32) -> Complex;
    /// log2 of the magnitude; `-inf` for zero.
    fn mag_log2(&self) -> f64;
}

impl Scalar for Rational {
    type Ctx = ();
    fn ctx(&self) {}
    fn zero(_: ()) -> Self {
        Rational::new()
    }
    fn one(_: ()) -> Self {
        Rational::from(1)
    }
    fn from_q(q: &Rational, _: ()) -> Self {
        q.clone()
    }
    fn sadd(&self, o: &Self) -> Self {
        Rational::from(self + o)
    }
    fn ssub(&self, o: &Self) -> Self {
        Rational::from(self - o)
    }
    fn smul(&self, o: &Self) -> Self {
        Rational::from(self * o)
    }
    fn sdiv(&self, o: &Self) -> Self {
        Rational::from(self / o)
    }
    fn sneg(&self) -> Self {
        Rational::from(-self)
    }
    fn is_exact_zero(&self) -> bool {
        *self == 0
    }
    fn to_complex(&self, prec: u32) -> Complex {
        Complex::with_val(prec, self)
    }
    fn mag_log2(&self) -> f64 {
        if *self == 0 {
            return f64::NEG_INFINITY;
        }
        Float::with_val(64, self).abs().log2().to_f64()
    }
}

impl Scalar for Complex {
    type Ctx = u32;
    fn ctx(&self) -> u32 {
        self.prec().0
    }
    fn zero(p: u32) -> Self {
        Complex::new(p)
    }
    fn one(p: u32) -> Self {
        Complex::with_val(p, 1)
    }
    fn from_q(q: &Rational, p: u32) -> Self {
        Complex::with_val(p, q)
    }
    fn sadd(&self, o: &Self) -> Self {
        Complex::with_val(self.prec().0, self + o)
    }
    fn ssub(&self, o: &Self) -> Self {
        Complex::with_val(self.prec().0, self - o)
    }
    fn smul(&self, o: &Self) -> Self {
        Complex::with_val(self.prec().0, self * o)
    }
    fn sdiv(&self, o: &Self) -> Self {
        Complex::with_val(self.prec().0, self / o)
    }
    fn sneg(&self) -> Self {
        Complex::with_val(self.prec().0, -self)
    }
    fn is_exact_zero(&self) -> bool {
        self.real().is_zero() && self.imag().is_zero()
    }
    fn to_complex(&self, prec: u32) -> Complex {
        Complex::with_val(prec, self)
    }
    fn mag_log2(&self) -> f64 {
        cabs_log2(self)
    }
}

pub fn c0(prec: u32) -> Complex {
    Complex::new(prec)
}

pub fn cq(prec: u32, q: &Rational) -> Complex {
    Complex::with_val(prec, q)
}

pub fn ci(prec: u32, v: i64) -> Complex {
    Complex::with_val(prec, v)
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

/// 2πi at the given precision.
pub fn two_pi_i(prec: u32) -> Complex {
    let mut p = pi(prec);
    p *= 2;
    Complex::with_val(prec, (0, p))
}

pub fn cabs(z: &Complex) -> Float {
    Float::with_val(z.prec().0, z.abs_ref())
}

pub fn cabs_f64(z: &Complex) -> f64 {
    Float::with_val(64, z.abs_ref()).to_f64()
}

/// log2 |z| without overflow; `-inf` for zero.
pub fn cabs_log2(z: &Complex) -> f64 {
    if z.real().is_zero() && z.imag().is_zero() {
        return f64::NEG_INFINITY;
    }
    let a = Float::with_val(64, z.abs_ref());
    a.log2().to_f64()
}

pub fn is_czero(z: &Complex) -> bool {
    z.real().is_zero() && z.imag().is_zero()
}

/// Parses a decimal string (possibly `a/b`, possibly with a trailing `i` part such as `1.5-0.25i`) into an exact rational pair.
pub fn parse_exact_complex(s: &str) -> Option<(Rational, Rational)> {
    let s = s.trim().replace(' ', "");
    if s.is_empty() {
        return None;
    }
    if let Some(body) = s.strip_suffix('i') {
        // split at the last sign that is not at position 0 and not after an exponent marker
        let bytes = body.as_bytes();
        let mut split = None;
        for i in (1..bytes.len()).rev() {
            if (bytes[i] == b'+' || bytes[i] == b'-') && bytes[i - 1] != b'e' && bytes[i - 1] != b'E' {
                split = Some(i);
                break;
            }
        }
        let (re, im) = match split {
            Some(i) => (&body[..i], &body[i..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => "1",
            "-" => "-1",
            x => x,
        };
        return Some((parse_exact_real(re)?, parse_exact_real(im)?));
    }
    Some((parse_exact_real(&s)?, Rational::new()))
}

/// Parses `12`, `-3/4`, `0.125`, `1e-3`, `2.5e2` exactly.
pub fn parse_exact_real(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a = parse_exact_real(a)?;
        let b = parse_exact_real(b)?;
        if b == 0 {
            return None;
        }
        return Some(a / b);
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (ip, fp) = match mant.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mant, ""),
    };
    if ip.is_empty() && fp.is_empty() {
        return None;
    }
    if !ip.chars().all(|c| c.is_ascii_digit()) || !fp.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{}{}", ip, fp);
    let num = Integer::from_str_radix(if digits.is_empty() { "0" } else { &digits }, 10).ok()?;
    let scale = exp - fp.len() as i32;
    let ten = Integer::from(10);
    let mut q = Rational::from(num);
    if scale >= 0 {
        q *= Integer::from((&ten).pow(scale as u32));
    } else {
        q /= Integer::from((&ten).pow((-scale) as u32));
    }
    if neg {
        q = -q;
    }
    Some(q)
}

pub fn parse_complex(s: &str, prec: u32) -> Option<Complex> {
    let (re, im) = parse_exact_complex(s)?;
    Some(Complex::with_val(prec, (Float::with_val(prec, &re), Float::with_val(prec, &im))))
}

/// Decimal rendering with `digits` significant digits.
pub fn fmt_float(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix(10, Some(digits))
}

pub fn fmt_complex(z: &Complex, digits: usize) -> String {
    let re = fmt_float(z.real(), digits);
    if z.imag().is_zero() {
        return re;
    }
    let im = fmt_float(z.imag(), digits);
    if im.starts_with('-') {
        format!("{}{}i", re, im)
    } else {
        format!("{}+{}i", re, im)
    }
}

/// Number of decimal digits that a given binary precision carries.
pub fn digits_for(prec: u32) -> usize {
    ((prec as f64) * std::f64::consts::LOG10_2).floor() as usize
}

/// Best rational approximation by continued fractions with bounded denominator.
pub fn rational_approx(x: &Float, max_den: &Integer) -> Rational {
    let prec = x.prec();
    let mut y = x.clone();
    let (mut p0, mut q0, mut p1, mut q1) = (Integer::from(0), Integer::from(1), Integer::from(1), Integer::from(0));
    for _ in 0..200 {
        let a = Float::with_val(prec, y.floor_ref());
        let ai = a.to_integer().unwrap_or_default();
        let p2 = Integer::from(&ai * &p1) + &p0;
        let q2 = Integer::from(&ai * &q1) + &q0;
        if q2 > *max_den {
            break;
        }
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let frac = Float::with_val(prec, &y - &a);
        if frac.is_zero() || frac.clone().abs().log2().to_f64() < -(prec as f64) + 8.0 {
            break;
        }
        y = Float::with_val(prec, 1 / frac);
    }
    if q1 == 0 {
        return Rational::from(x.to_integer().unwrap_or_default());
    }
    Rational::from((p1, q1))
}

/// Snaps a complex number to a rational when it lies within `2^tol_log2` of one with denominator ≤ `max_den`.
pub fn snap_rational(z: &Complex, max_den: u64, tol_log2: f64) -> Option<Rational> {
    let prec = z.prec().0;
    if !z.imag().is_zero() && z.imag().clone().abs().log2().to_f64() > tol_log2 {
        return None;
    }
    let q = rational_approx(z.real(), &Integer::from(max_den));
    let d = Float::with_val(prec, z.real() - &q);
    if d.is_zero() || d.abs().log2().to_f64() <= tol_log2 {
        Some(q)
    } else {
        None
    }
}

/// Binomial coefficient as a rational.
pub fn binom(n: u32, k: u32) -> Rational {
    Rational::from(Integer::from(Integer::binomial_u(n, k)))
}

pub fn factorial(n: u32) -> Integer {
    Integer::from(Integer::factorial(n))
}

/// Stirling numbers of the second kind S(n, k) for 0 ≤ k ≤ n ≤ max.
pub fn stirling2(max: usize) -> Vec<Vec<Integer>> {
    let mut s = vec![vec![Integer::new(); max + 1]; max + 1];
    s[0][0] = Integer::from(1);
    for n in 1..=max {
        for k in 1..=n {
            let v = Integer::from(&s[n - 1][k] * k as u32) + &s[n - 1][k - 1];
            s[n][k] = v;
        }
    }
    s
}

/// Signed Stirling numbers of the first kind s(n, k): x(x-1)…(x-n+1) = Σ s(n,k) x^k.
pub fn stirling1(max: usize) -> Vec<Vec<Integer>> {
    let mut s = vec![vec![Integer::new(); max + 1]; max + 1];
    s[0][0] = Integer::from(1);
    for n in 1..=max {
        for k in 1..=n {
            let v = Integer::from(&s[n - 1][k - 1]) - Integer::from(&s[n - 1][k] * (n as u32 - 1));
            s[n][k] = v;
        }
    }
    s
}

/// Precision loss guard: returns `Err` text when a value lost all significant bits.
pub fn lost_bits(value: &Complex, scale_log2: f64, prec: u32) -> bool {
    let v = cabs_log2(value);
    v.is_finite() && scale_log2 - v > prec as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_decimals_exactly() {
        assert_eq!(parse_exact_real("0.125").unwrap(), Rational::from((1, 8)));
        assert_eq!(parse_exact_real("-3/4").unwrap(), Rational::from((-3, 4)));
        assert_eq!(parse_exact_real("2.5e2").unwrap(), Rational::from(250));
        assert_eq!(parse_exact_real("1e-3").unwrap(), Rational::from((1, 1000)));
        let (re, im) = parse_exact_complex("1.5-0.25i").unwrap();
        assert_eq!(re, Rational::from((3, 2)));
        assert_eq!(im, Rational::from((-1, 4)));
        let (re, im) = parse_exact_complex("-2i").unwrap();
        assert_eq!(re, 0);
        assert_eq!(im, -2);
        assert!(parse_exact_real("abc").is_none());
    }

    #[test]
    fn stirling_tables() {
        let s2 = stirling2(5);
        assert_eq!(s2[5][2], 15);
        assert_eq!(s2[4][4], 1);
        let s1 = stirling1(4);
        // x(x-1)(x-2)(x-3) = x^4 - 6x^3 + 11x^2 - 6x
        assert_eq!(s1[4][1], -6);
        assert_eq!(s1[4][2], 11);
        assert_eq!(s1[4][3], -6);
    }

    #[test]
    fn continued_fraction_snap() {
        let z = Complex::with_val(200, (Float::with_val(200, 7) / 3u32, 0));
        assert_eq!(snap_rational(&z, 1000, -150.0), Some(Rational::from((7, 3))));
        let p = Complex::with_val(200, pi(200));
        assert_eq!(snap_rational(&p, 1000, -150.0), None);
    }
}
