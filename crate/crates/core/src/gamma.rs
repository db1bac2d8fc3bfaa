//! Motivic gamma generator Γ(s) = R(e^{−2πis}) ∫_0^c δ(t) t^{s−1} dt.
//!
//! δ solves the adjoint operator and spans the image of σ_c − 1 on its solutions. The integral is
//! split at p = c/2: on [0, p] the local expansion of δ at 0 is integrated term by term in closed form
//! (this also continues the integral meromorphically in s); on [p, c] a double-exponential rule in
//! u = 1 − t/c integrates the local expansion at c.

use crate::arith::{cabs_f64, cabs_log2, fmt_complex, is_czero, snap_rational, two_pi_i};
use crate::error::{FrobError, Result};
use crate::frobenius::{principal_log, LogSeries};
use crate::jet::Jet;
use crate::linalg::{vec_norm_log2, CMat};
use crate::local::{local_basis_near_singularity, Center, LocalBasis};
use crate::monodromy::{complex_json, singular_points, PathSpec};
use crate::op::CanonicalOp;
use crate::poly::QPoly;
use crate::quad::DeRule;
use crate::special::gamma_c;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::{Complex, Float, Rational};
use serde_json::{json, Value};

#[derive(Clone, Debug)]
pub struct QuadratureSpec {
    pub scheme: String,
    pub max_nodes: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { scheme: "double-exponential".into(), max_nodes: 1 << 20 }
    }
}

#[derive(Clone, Debug)]
pub struct GammaConfig {
    /// Solution-side operator; the integrand solves its adjoint.
    pub op: CanonicalOp,
    pub c: Complex,
    pub path: PathSpec,
    pub prec: u32,
    pub quadrature: QuadratureSpec,
}

impl GammaConfig {
    pub fn new(op: &CanonicalOp, c: &Complex, prec: u32) -> Self {
        let path = PathSpec::direct(op, c, prec + 64);
        GammaConfig { op: op.clone(), c: c.clone(), path, prec, quadrature: QuadratureSpec::default() }
    }
}

/// Monic R(T), ascending coefficients.
#[derive(Clone, Debug)]
pub struct RPolynomial {
    pub coeffs: Vec<Complex>,
    /// Exact coefficients when all of them snap to small rationals.
    pub exact: Option<Vec<Rational>>,
    pub degree: usize,
    /// log2 of the smallest singular value at each Krylov step.
    pub krylov_log2: Vec<f64>,
}

impl RPolynomial {
    pub fn eval(&self, t: &Complex) -> Complex {
        let p = t.prec().0;
        let mut acc = Complex::new(p);
        for c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    /// R(e^{−2πis}).
    pub fn at_s(&self, s: &Complex) -> Complex {
        let p = s.prec().0;
        let e = Complex::with_val(p, -(two_pi_i(p) * s)).exp();
        self.eval(&e)
    }

    pub fn to_json(&self, digits: usize) -> Value {
        let c: Vec<Value> = match &self.exact {
            Some(q) => q.iter().map(|x| json!(x.to_string())).collect(),
            None => self.coeffs.iter().map(|z| complex_json(z, digits)).collect(),
        };
        json!({"coeffs": c, "degree": self.degree, "exact": self.exact.is_some()})
    }
}

/// δ and its local expansions at 0 and c.
#[derive(Clone, Debug)]
pub struct Integrand {
    pub work: u32,
    pub c: Complex,
    pub adjoint: CanonicalOp,
    /// Expansion at 0 per exponent class (nonzero classes only).
    pub at_zero: Vec<LogSeries<Complex>>,
    /// Expansion at c in u = 1 − t/c.
    pub at_c: Vec<LogSeries<Complex>>,
    /// Coordinates of δ in the local basis of the adjoint at 0.
    pub zero_coords: Vec<Complex>,
    pub sigma_zero: CMat,
    /// Worst real exponent of δ at c.
    pub gamma_min: f64,
    /// Power of (t − c) multiplied into the integrand to make invariant solutions analytic at c.
    pub adjustment: usize,
    pub variation_rank: usize,
}

fn local_ratio(l: &CanonicalOp, c: &Complex, prec: u32) -> Result<(f64, f64)> {
    let pts = singular_points(l, prec);
    let ac = cabs_f64(c);
    let mut r0 = f64::INFINITY;
    let mut rc = ac;
    for s in &pts {
        let a = cabs_f64(s);
        if a > 0.0 {
            r0 = r0.min(a);
        }
        let d = cabs_f64(&Complex::with_val(64, s - c));
        if d > 1e-30 {
            rc = rc.min(d);
        }
    }
    let (q0, qc) = (0.5 * ac / r0, 0.5 * ac / rc);
    if q0 > 0.75 || qc > 0.75 {
        return Err(FrobError::ConvergenceDomainViolated(format!("local expansions do not reach c/2 (ratios {:.3}, {:.3})", q0, qc)));
    }
    Ok((q0, qc))
}

/// Lowest-order coefficient (smallest Re(e+n), then highest log power) of a family of series.
fn leading_coefficient(series: &[LogSeries<Complex>], rel_log2: f64) -> Option<(f64, Complex)> {
    let scale = series.iter().map(|s| s.max_mag_log2(s.len())).fold(f64::NEG_INFINITY, f64::max);
    let mut best: Option<(f64, usize, Complex)> = None;
    for s in series {
        let e = s.exponent.real().to_f64();
        for (n, row) in s.coeffs.iter().enumerate() {
            if let Some(j) = (0..row.len()).rev().find(|&j| cabs_log2(&row[j]) - scale > rel_log2) {
                let key = e + n as f64;
                let better = match &best {
                    None => true,
                    Some((k, bj, _)) => key < *k - 1e-9 || ((key - *k).abs() <= 1e-9 && j > *bj),
                };
                if better {
                    best = Some((key, j, row[j].clone()));
                }
                break;
            }
        }
    }
    best.map(|(k, _, z)| (k, z))
}

impl Integrand {
    pub fn new(l: &CanonicalOp, c: &Complex, prec: u32) -> Result<Self> {
        let work = prec + 64;
        let c = Complex::with_val(work, c);
        let (q0, qc) = local_ratio(l, &c, work)?;
        let adjoint = l.adjoint();
        let rep = local_basis_near_singularity(l, &c, work)?;
        let adjustment = if rep.invariants_analytic { 0 } else { rep.pole_order };
        let bc = LocalBasis::new(&adjoint, Center::Point(c.clone()), LocalBasis::terms_for(qc, work), work)?;
        let var = bc.sigma().sub(&CMat::identity(bc.dim, work));
        let thr = -(prec as f64) / 2.0;
        let (rank, _) = var.rank(thr);
        if rank != 1 {
            return Err(FrobError::NotReflectionPoint(rank));
        }
        let best = (0..bc.dim).max_by(|&a, &b| vec_norm_log2(&var.col(a)).partial_cmp(&vec_norm_log2(&var.col(b))).unwrap()).unwrap();
        let mut y = var.col(best);
        let keep = |v: &[Complex], top: f64| v.iter().any(|z| cabs_log2(z) - top > thr);
        let top = vec_norm_log2(&y);
        let mut at_c: Vec<LogSeries<Complex>> = (0..bc.classes.len()).filter(|&ci| keep(&y[bc.class_range(ci)], top)).map(|ci| bc.combine(ci, &y[bc.class_range(ci)])).collect();
        // normalize by the leading coefficient at c
        let (gamma_min, lead) = leading_coefficient(&at_c, thr).ok_or(FrobError::LeadingCoefficientZero)?;
        let inv = Complex::with_val(work, 1 / &lead);
        for s in at_c.iter_mut() {
            *s = s.scale(&inv);
        }
        for z in y.iter_mut() {
            *z *= &inv;
        }
        let g_eff = gamma_min + adjustment as f64;
        if g_eff <= -1.0 + 1e-9 {
            return Err(FrobError::ConvergenceDomainViolated(format!("integrand grows like |t-c|^{:.4} at c", g_eff)));
        }
        // connect to the basis at 0 at p = c/2
        let b0 = LocalBasis::new(&adjoint, Center::Zero, LocalBasis::terms_for(q0, work), work)?;
        let p = Complex::with_val(work, &c / 2u32);
        let (w0, _) = b0.state_matrix(&p);
        let (wc, _) = bc.state_matrix(&p);
        let state = wc.mul_vec(&y);
        let x = w0.solve(&state)?;
        let top0 = vec_norm_log2(&x);
        let mut at_zero: Vec<LogSeries<Complex>> = (0..b0.classes.len()).filter(|&ci| keep(&x[b0.class_range(ci)], top0)).map(|ci| b0.combine(ci, &x[b0.class_range(ci)])).collect();
        if adjustment > 0 {
            // (t − c)^a at 0 and (−c u)^a at c
            let mut poly = vec![Complex::with_val(work, 1)];
            for _ in 0..adjustment {
                let mut next = vec![Complex::new(work); poly.len() + 1];
                for (i, a) in poly.iter().enumerate() {
                    next[i + 1] += a;
                    next[i] -= Complex::with_val(work, a * &c);
                }
                poly = next;
            }
            at_zero = at_zero.iter().map(|s| mul_series_poly(s, &poly)).collect();
            let f = cpow(&Complex::with_val(work, -&c), adjustment);
            at_c = at_c
                .iter()
                .map(|s| {
                    let mut t = s.scale(&f);
                    t.exponent += adjustment as u32;
                    t
                })
                .collect();
        }
        Ok(Integrand { work, c, adjoint, at_zero, at_c, zero_coords: x, sigma_zero: b0.sigma(), gamma_min: g_eff, adjustment, variation_rank: rank })
    }

    /// δ(c(1 − u)) for real u in (0, 1/2].
    pub fn value_near_c(&self, u: &Float) -> Complex {
        let p = self.work;
        let uc = Complex::with_val(p, u);
        let lu = Complex::with_val(p, Float::with_val(p, u.ln_ref()));
        let mut acc = Complex::new(p);
        for s in &self.at_c {
            acc += &s.theta_values(&uc, &lu, 1).values[0];
        }
        acc
    }

    /// Exponents e + n (n ≥ 0) of the expansion at 0; the Mellin integral has poles at s = −(e + n).
    pub fn pole_bases(&self) -> Vec<Complex> {
        self.at_zero.iter().map(|s| Complex::with_val(self.work, -&s.exponent)).collect()
    }
}

fn mul_series_poly(s: &LogSeries<Complex>, poly: &[Complex]) -> LogSeries<Complex> {
    let p = s.exponent.prec().0;
    let w = s.log_width().max(1);
    let n = s.len();
    let mut out = vec![vec![Complex::new(p); w]; n];
    for (i, a) in poly.iter().enumerate() {
        for m in 0..n.saturating_sub(i) {
            for j in 0..s.coeffs[m].len() {
                out[m + i][j] += Complex::with_val(p, a * &s.coeffs[m][j]);
            }
        }
    }
    LogSeries { exponent: s.exponent.clone(), coeffs: out }
}

/// Minimal monic R with R(σ_0)δ = 0, from the Krylov sequence of δ under the explicit σ_0.
pub fn r_from_krylov(sigma: &CMat, x: &[Complex], prec: u32) -> Result<RPolynomial> {
    let work = sigma.prec;
    let thr = -(prec as f64) / 2.0;
    let mut vs = vec![x.to_vec()];
    let mut logs = Vec::new();
    for k in 1..=sigma.rows {
        let next = sigma.mul_vec(&vs[k - 1]);
        vs.push(next);
        let norms: Vec<Float> = vs.iter().map(|v| Float::with_val(work, vec_norm_log2(v)).exp2()).collect();
        let cols: Vec<Vec<Complex>> = vs.iter().zip(&norms).map(|(v, n)| v.iter().map(|z| Complex::with_val(work, z / n)).collect()).collect();
        let m = CMat::from_cols(&cols, work);
        let (s, v) = m.svd();
        let top = s[0].clone().log2().to_f64();
        let low = s.last().unwrap();
        let low = if low.is_zero() { f64::NEG_INFINITY } else { low.clone().log2().to_f64() - top };
        logs.push(low);
        if (low - thr).abs() < 10.0 {
            return Err(FrobError::RankDetectionAmbiguous(low.exp2(), thr.exp2()));
        }
        if low < thr {
            let null = v.col(k);
            let mut coeffs: Vec<Complex> = null.iter().zip(&norms).map(|(z, n)| Complex::with_val(work, z / n)).collect();
            let lead = coeffs[k].clone();
            for z in coeffs.iter_mut() {
                *z /= &lead;
            }
            let exact: Option<Vec<Rational>> = coeffs.iter().map(|z| snap_rational(z, 10000, thr)).collect();
            let coeffs = match &exact {
                Some(q) => q.iter().map(|r| Complex::with_val(work, r)).collect(),
                None => coeffs,
            };
            return Ok(RPolynomial { coeffs, exact, degree: k, krylov_log2: logs });
        }
    }
    Err(FrobError::Numerical("Krylov sequence did not become dependent".into()))
}

/// R(T) for the reflection point c of the adjoint of `l`.
pub fn r_polynomial(l: &CanonicalOp, c: &Complex, path: &PathSpec, prec: u32) -> Result<RPolynomial> {
    check_path(path, c)?;
    let ig = Integrand::new(l, c, prec)?;
    r_from_krylov(&ig.sigma_zero, &ig.zero_coords, prec)
}

fn check_path(path: &PathSpec, c: &Complex) -> Result<()> {
    if let Some(t) = &path.loop_target {
        if cabs_f64(&Complex::with_val(64, t - c)) > 1e-12 * cabs_f64(c).max(1.0) {
            return Err(FrobError::InvalidArgument("path loop target differs from c".into()));
        }
    }
    Ok(())
}

/// (λ, m) with κ(s) = λ e^{2πim(s−ρ)} G(s).
#[derive(Clone, Debug)]
pub struct Normalization {
    pub lambda: Complex,
    pub m: i64,
    /// Distance of the fitted m from the nearest integer.
    pub m_defect: f64,
    pub index: usize,
}

impl Normalization {
    pub fn apply(&self, g: &Jet<Complex>) -> Jet<Complex> {
        let p = g.coeffs[0].prec().0;
        let k = g.order();
        let a = Complex::with_val(p, two_pi_i(p) * self.m);
        let mut e = Vec::with_capacity(k + 1);
        let mut term = Complex::with_val(p, 1);
        for i in 0..=k {
            e.push(term.clone());
            term = term * &a / (i as u32 + 1);
        }
        Jet::from_coeffs(e).mul(g).scale(&self.lambda)
    }

    pub fn to_json(&self, digits: usize) -> Value {
        json!({"lambda": complex_json(&self.lambda, digits), "m": self.m, "m_defect": self.m_defect})
    }
}

/// Fits λ and m from the first two coefficients of κ at the first index where both jets are nonzero.
pub fn fit_normalization(kappa: &Jet<Complex>, g: &Jet<Complex>, tol_log2: f64) -> Result<Normalization> {
    let p = g.coeffs[0].prec().0;
    let scale = kappa.max_mag_log2();
    let d = (0..kappa.coeffs.len()).find(|&i| cabs_log2(&kappa.coeffs[i]) - scale > tol_log2).ok_or_else(|| FrobError::NormalizationImpossible("κ jet vanishes".into()))?;
    if d + 1 > g.order() || cabs_log2(&g.coeffs[d]) - g.max_mag_log2() < tol_log2 {
        return Err(FrobError::NormalizationImpossible("gamma jet cannot be matched".into()));
    }
    let lambda = Complex::with_val(p, &kappa.coeffs[d] / &g.coeffs[d]);
    let mr = (Complex::with_val(p, &kappa.coeffs[d + 1] / &lambda) - &g.coeffs[d + 1]) / (two_pi_i(p) * &g.coeffs[d]);
    let mf = mr.real().to_f64();
    let m = mf.round() as i64;
    let defect = ((mf - m as f64).powi(2) + mr.imag().to_f64().powi(2)).sqrt();
    Ok(Normalization { lambda, m, m_defect: defect, index: d })
}

/// λ e^{2πims} relating `ours` to `reference` sample values: λ from the first sample, m ∈ [−4, 4] from the second.
pub fn fit_pointwise(samples: &[(Complex, Complex, Complex)]) -> (Complex, i64) {
    let (s0, a0, r0) = &samples[0];
    let p = a0.prec().0;
    let ratio0 = Complex::with_val(p, r0 / a0);
    let mut best = (f64::INFINITY, Complex::new(p), 0);
    for m in -4i64..=4 {
        let lambda = Complex::with_val(p, &ratio0 * Complex::with_val(p, -(two_pi_i(p) * s0) * m).exp());
        let mut err = f64::NEG_INFINITY;
        for (s, a, r) in samples.iter().skip(1).take(2) {
            let pred = Complex::with_val(p, &lambda * a) * Complex::with_val(p, two_pi_i(p) * s * m).exp();
            err = err.max(cabs_log2(&Complex::with_val(p, &pred - r)) - cabs_log2(r));
        }
        if err < best.0 {
            best = (err, lambda, m);
        }
    }
    (best.1, best.2)
}

#[derive(Clone, Debug)]
pub struct GammaValue {
    pub s: Complex,
    pub value: Complex,
    /// ∫_0^c δ t^{s−1} dt.
    pub mellin: Complex,
    pub prefactor: Complex,
    pub est_error_log2: f64,
}

impl GammaValue {
    pub fn to_json(&self, model: &GammaModel, digits: usize) -> Value {
        json!({
            "s": complex_json(&self.s, digits),
            "value": complex_json(&self.value, digits),
            "est_error": format!("{:e}", self.est_error_log2.exp2()),
            "prefactor": {"R_coeffs": model.r.to_json(digits)["coeffs"], "I_coeffs": model.indicial.coeffs().iter().map(|q| q.to_string()).collect::<Vec<_>>()},
            "normalization": model.normalization.as_ref().map(|n| n.to_json(digits)).unwrap_or(json!({"lambda": {"re": "1", "im": "0"}, "m": 0})),
        })
    }
}

/// Prepared gamma generator for one configuration.
pub struct GammaModel {
    pub config: GammaConfig,
    pub integrand: Integrand,
    pub r: RPolynomial,
    pub indicial: QPoly,
    pub normalization: Option<Normalization>,
    pub tail_error_log2: f64,
    rule: DeRule,
    log_p: Complex,
    log_c: Complex,
}

impl GammaModel {
    pub fn new(config: &GammaConfig) -> Result<Self> {
        check_path(&config.path, &config.c)?;
        let integrand = Integrand::new(&config.op, &config.c, config.prec)?;
        let r = r_from_krylov(&integrand.sigma_zero, &integrand.zero_coords, config.prec)?;
        let work = integrand.work;
        let mut rule = DeRule::new(&Float::with_val(work, 0.5), integrand.gamma_min, work)?;
        let ig = &integrand;
        let g = |u: &Float| ig.value_near_c(u);
        let refs: Vec<Complex> = vec![Complex::with_val(work, 1), Complex::with_val(work, (3, 2))];
        let factors: Vec<_> = refs
            .iter()
            .map(|s| {
                let s = s.clone();
                move |u: &Float| one_minus_u_pow(u, &s)
            })
            .collect();
        let tail_error_log2 = rule.adapt(&g, &factors, config.quadrature.max_nodes)?;
        let p = Complex::with_val(work, &integrand.c / 2u32);
        let log_p = principal_log(&p);
        let log_c = principal_log(&integrand.c);
        let indicial = config.op.theta_form().p[0].clone();
        Ok(GammaModel { config: config.clone(), integrand, r, indicial, normalization: None, tail_error_log2, rule, log_p, log_c })
    }

    pub fn work(&self) -> u32 {
        self.integrand.work
    }

    /// Closed-form ∫_0^{c/2} term by term; returns (value, truncation estimate log2).
    fn head(&self, s: &Complex) -> Result<(Complex, f64)> {
        let p = self.work();
        let guard = -(self.config.prec as f64) / 2.0;
        let mut acc = Complex::new(p);
        let mut last = f64::NEG_INFINITY;
        for f in &self.integrand.at_zero {
            let w = f.log_width().max(1);
            let mut lpf = vec![Complex::with_val(p, 1)];
            for k in 1..w {
                let v = Complex::with_val(p, &lpf[k - 1] * &self.log_p) / k as u32;
                lpf.push(v);
            }
            let s0 = Complex::with_val(p, s + &f.exponent);
            let mut pw = Complex::with_val(p, &s0 * &self.log_p).exp();
            let pc = Complex::with_val(p, &self.integrand.c / 2u32);
            let nterms = f.len();
            for n in 0..nterms {
                let row = &f.coeffs[n];
                if row.iter().all(is_czero) {
                    pw *= &pc;
                    continue;
                }
                let sigma = Complex::with_val(p, &s0 + n as u32);
                if cabs_log2(&sigma) < guard {
                    return Err(FrobError::ConvergenceDomainViolated(fmt_complex(s, 20)));
                }
                let inv = Complex::with_val(p, 1 / &sigma);
                let mut ip = vec![inv.clone()];
                for i in 1..w {
                    let v = -Complex::with_val(p, &ip[i - 1] * &inv);
                    ip.push(v);
                }
                let mut term = Complex::new(p);
                for (j, cj) in row.iter().enumerate() {
                    if is_czero(cj) {
                        continue;
                    }
                    let mut h = Complex::new(p);
                    for i in 0..=j {
                        h += Complex::with_val(p, &lpf[j - i] * &ip[i]);
                    }
                    term += Complex::with_val(p, cj * &h);
                }
                term *= &pw;
                if n + 20 >= nterms {
                    last = last.max(cabs_log2(&term));
                }
                acc += term;
                pw *= &pc;
            }
        }
        Ok((acc, last + 1.0))
    }

    /// ∫_0^c δ(t) t^{s−1} dt (continued meromorphically through the head), with an error estimate.
    pub fn mellin(&self, s: &Complex) -> Result<(Complex, f64)> {
        let p = self.work();
        let s = Complex::with_val(p, s);
        let (h, herr) = self.head(&s)?;
        let sum = self.rule.sum(self.rule.level, &|u: &Float| one_minus_u_pow(u, &s));
        let cs = Complex::with_val(p, &s * &self.log_c).exp();
        let tail = Complex::with_val(p, &sum * &cs);
        let total = Complex::with_val(p, &h + &tail);
        let mag = cabs_log2(&h).max(cabs_log2(&tail));
        let err = herr.max(self.tail_error_log2 + cabs_log2(&tail)).max(mag - self.config.prec as f64 - 8.0);
        Ok((total, err))
    }

    /// Γ(s) = λ e^{2πims} R(e^{−2πis}) ∫_0^c δ t^{s−1} dt.
    pub fn eval(&self, s: &Complex) -> Result<GammaValue> {
        let p = self.work();
        let s = Complex::with_val(p, s);
        let (j, err) = self.mellin(&s)?;
        let mut pre = self.r.at_s(&s);
        if let Some(n) = &self.normalization {
            let rho_shift = Complex::with_val(p, two_pi_i(p) * &s * n.m).exp();
            pre = pre * &n.lambda * rho_shift;
        }
        let value = Complex::with_val(p, &pre * &j);
        let err = err + cabs_log2(&pre);
        Ok(GammaValue { s, value, mellin: j, prefactor: pre, est_error_log2: err })
    }

    /// Poles of the Mellin integral nearest to `rho`, excluding `rho` itself.
    /// Returns (radius, pole distance).
    fn cauchy_radius(&self, rho: &Complex) -> (f64, f64) {
        let p = self.work();
        let mut d = f64::INFINITY;
        for b in self.integrand.pole_bases() {
            // poles at b − n, n ≥ 0
            let diff = Complex::with_val(p, &b - rho);
            let re = diff.real().to_f64();
            let im = diff.imag().to_f64();
            let n0 = re.floor().max(0.0) as i64;
            for n in (n0 - 2).max(0)..=n0 + 2 {
                let dd = ((re - n as f64).powi(2) + im * im).sqrt();
                if dd > 1e-20 {
                    d = d.min(dd);
                }
            }
        }
        ((0.5 * d).min(0.125), d)
    }

    /// Taylor coefficients of I(s)·∫_0^c δ t^{s−1} dt at ρ (64-node Cauchy integral). Returns the jet and an error estimate.
    pub fn taylor(&self, rho: &Complex, k: usize) -> Result<(Jet<Complex>, f64)> {
        let p = self.work();
        let nodes = 64usize;
        let (r, dist) = self.cauchy_radius(rho);
        let rr = Float::with_val(p, r);
        let tpi = two_pi_i(p);
        let pts: Vec<Complex> = (0..nodes).map(|j| Complex::with_val(p, Complex::with_val(p, &tpi * j as u32) / nodes as u32).exp() * &rr).collect();
        let vals: Vec<Result<(Complex, f64)>> = pts
            .par_iter()
            .map(|z| {
                let s = Complex::with_val(p, rho + z);
                let (j, e) = self.mellin(&s)?;
                let i = self.indicial.eval_c(&s);
                let el = e + cabs_log2(&i);
                Ok((j * i, el))
            })
            .collect();
        let mut fs = Vec::with_capacity(nodes);
        let mut worst = f64::NEG_INFINITY;
        let mut fmax = f64::NEG_INFINITY;
        for v in vals {
            let (f, e) = v?;
            worst = worst.max(e);
            fmax = fmax.max(cabs_log2(&f));
            fs.push(f);
        }
        let mut coeffs = Vec::with_capacity(k + 1);
        for i in 0..=k {
            let mut acc = Complex::new(p);
            for (z, f) in pts.iter().zip(&fs) {
                let zi = cpow(z, i);
                acc += Complex::with_val(p, f / zi);
            }
            coeffs.push(Complex::with_val(self.config.prec, acc / nodes as u32));
        }
        // node errors amplified by r^{−k}; aliasing from the nearest pole
        let alias = if dist.is_finite() { nodes as f64 * (r / dist).log2() } else { -(p as f64) };
        let err = (worst - (k as f64) * r.log2()).max(fmax + alias - (k as f64) * r.log2());
        Ok((Jet::from_coeffs(coeffs), err))
    }

    /// Sets (λ, m) by matching the first two nonzero coefficients of a κ jet at ρ.
    pub fn normalize_to(&mut self, kappa: &Jet<Complex>, rho: &Complex) -> Result<Normalization> {
        let (g, _) = self.taylor(rho, kappa.order())?;
        let mut n = fit_normalization(kappa, &g, -(self.config.prec as f64) / 2.0)?;
        // λ absorbs e^{2πimρ}
        let p = self.work();
        let shift = Complex::with_val(p, two_pi_i(p) * rho * n.m).exp();
        let lambda_s = Complex::with_val(p, &n.lambda / &shift);
        self.normalization = Some(Normalization { lambda: lambda_s, ..n.clone() });
        n.lambda = Complex::with_val(self.config.prec, &n.lambda);
        Ok(n)
    }

    /// Relative residual of Σ_j p_j(−s−j) Γ(s+j) at `samples` random points within 1/4 of s0.
    pub fn difference_check(&self, s0: &Complex, samples: usize, seed: u64) -> Result<f64> {
        let p = self.work();
        let pts = sample_points(s0, samples, seed, p);
        let f = |s: &Complex| self.eval(s).map(|g| g.value);
        let mut worst = 0.0f64;
        for s in &pts {
            worst = worst.max(difference_residual(&self.integrand.adjoint, &f, s)?);
        }
        Ok(worst)
    }
}

fn cpow(z: &Complex, n: usize) -> Complex {
    let mut acc = Complex::with_val(z.prec(), 1);
    for _ in 0..n {
        acc *= z;
    }
    acc
}

fn one_minus_u_pow(u: &Float, s: &Complex) -> Complex {
    let p = u.prec();
    let l = Float::with_val(p, -u).ln_1p();
    Complex::with_val(p, Complex::with_val(p, s - 1u32) * l).exp()
}

/// Random points s0 + z, |z| ≤ 1/4.
pub fn sample_points(s0: &Complex, samples: usize, seed: u64, prec: u32) -> Vec<Complex> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let a: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let r: f64 = 0.25 * rng.gen::<f64>().sqrt();
            Complex::with_val(prec, s0 + Complex::with_val(prec, (r * a.cos(), r * a.sin())))
        })
        .collect()
}

/// |Σ_j p_j(−s−j) f(s+j)| / max_j |p_j(−s−j) f(s+j)| where Σ t^j p_j(D) annihilates the integrand.
pub fn difference_residual<F: Fn(&Complex) -> Result<Complex>>(integrand_op: &CanonicalOp, f: &F, s: &Complex) -> Result<f64> {
    let p = s.prec().0;
    let tf = integrand_op.theta_form();
    let mut acc = Complex::new(p);
    let mut top = f64::NEG_INFINITY;
    for (j, pj) in tf.p.iter().enumerate() {
        if pj.is_zero() {
            continue;
        }
        let sj = Complex::with_val(p, s + j as u32);
        let arg = Complex::with_val(p, -&sj);
        let term = Complex::with_val(p, pj.eval_c(&arg) * f(&sj)?);
        top = top.max(cabs_log2(&term));
        acc += term;
    }
    Ok((cabs_log2(&acc) - top).exp2())
}

/// Taylor coefficients of a function at ρ by the 64-node Cauchy rule on radius r.
pub fn cauchy_jet<F: Fn(&Complex) -> Complex + Sync>(f: &F, rho: &Complex, r: f64, k: usize, prec: u32) -> Jet<Complex> {
    let nodes = 64u32;
    let tpi = two_pi_i(prec);
    let rr = Float::with_val(prec, r);
    let pts: Vec<Complex> = (0..nodes).map(|j| Complex::with_val(prec, Complex::with_val(prec, &tpi * j) / nodes).exp() * &rr).collect();
    let fs: Vec<Complex> = pts.par_iter().map(|z| f(&Complex::with_val(prec, rho + z))).collect();
    Jet::from_coeffs(
        (0..=k)
            .map(|i| {
                let mut acc = Complex::new(prec);
                for (z, v) in pts.iter().zip(&fs) {
                    acc += Complex::with_val(prec, v / cpow(z, i));
                }
                acc / nodes
            })
            .collect(),
    )
}

/// 2(1 − e^{2πis}) Γ(s)Γ(1/2)/Γ(s+1/2).
pub fn baby_closed_form(s: &Complex) -> Complex {
    let p = s.prec().0;
    let e = Complex::with_val(p, two_pi_i(p) * s).exp();
    let half = Complex::with_val(p, 0.5);
    let b = gamma_c(s) * gamma_c(&half) / gamma_c(&Complex::with_val(p, s + &half));
    Complex::with_val(p, 1 - e) * b * 2u32
}

/// −2πi ((e^{2πis} − 1)/s)^n.
pub fn polylog_closed_form(n: u32, s: &Complex) -> Complex {
    let p = s.prec().0;
    let e = Complex::with_val(p, two_pi_i(p) * s).exp();
    let q = Complex::with_val(p, (e - 1u32) / s);
    -(two_pi_i(p) * cpow(&q, n as usize))
}

pub fn gamma_eval(config: &GammaConfig, s: &Complex) -> Result<GammaValue> {
    GammaModel::new(config)?.eval(s)
}

/// Jet of I(s)Γ(s)/R(e^{−2πis}) at ρ, before normalization.
pub fn gamma_taylor(config: &GammaConfig, rho: &Complex, k: usize) -> Result<Jet<Complex>> {
    Ok(GammaModel::new(config)?.taylor(rho, k)?.0)
}

pub fn difference_equation_check(config: &GammaConfig, s0: &Complex, samples: usize) -> Result<f64> {
    GammaModel::new(config)?.difference_check(s0, samples, 7)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_op;

    #[test]
    fn baby_mellin_is_beta() {
        let l = parse_op("D - t*(D+1/2)").unwrap();
        let prec = 192;
        let cfg = GammaConfig::new(&l, &Complex::with_val(prec, 1), prec);
        let m = GammaModel::new(&cfg).unwrap();
        assert_eq!(m.r.exact, Some(vec![Rational::from(-1), Rational::from(1)]));
        let s = Complex::with_val(prec, 2.3);
        let (j, _) = m.mellin(&s).unwrap();
        // δ normalized to u^{−1/2} at c = 1, i.e. δ = (1 − t)^{−1/2}
        let half = Complex::with_val(prec, 0.5);
        let beta = gamma_c(&s) * gamma_c(&half) / gamma_c(&Complex::with_val(prec, &s + &half));
        let d = cabs_log2(&Complex::with_val(prec, &j - &beta)) - cabs_log2(&beta);
        assert!(d < -150.0, "{}", d);
    }

    #[test]
    fn polylog2_continuation_and_r() {
        let l = parse_op("(D+1)*D^2 - t*(D+1)^3").unwrap();
        let prec = 160;
        let cfg = GammaConfig::new(&l, &Complex::with_val(prec, 1), prec);
        let m = GammaModel::new(&cfg).unwrap();
        assert_eq!(m.r.degree, 2);
        // δ ∝ log t: s²·∫ log t · t^{s−1} dt is constant, also at Re s < 0 via continuation
        let (j2, _) = m.mellin(&Complex::with_val(prec, 2)).unwrap();
        let reference = Complex::with_val(prec, j2 * 4u32);
        for s in [Complex::with_val(prec, (1.7, 0.4)), Complex::with_val(prec, (-0.3, 0.2))] {
            let (j, _) = m.mellin(&s).unwrap();
            let v = Complex::with_val(prec, j * Complex::with_val(prec, s.square_ref()));
            let d = cabs_log2(&Complex::with_val(prec, &v - &reference));
            assert!(d < -120.0, "{}", d);
        }
    }
}
