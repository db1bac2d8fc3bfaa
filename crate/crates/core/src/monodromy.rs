//! Numerical analytic continuation by Taylor recentering, monodromy loops and Frobenius constants.

use crate::arith::{cabs_f64, cabs_log2, fmt_complex, is_czero};
use crate::error::{FrobError, Result};
use crate::frobenius::{frobenius_table, principal_log, Exponent, TableMode};
use crate::jet::Jet;
use crate::linalg::{project_onto, vec_norm_log2, vec_sub, vec_scale, CMat};
use crate::local::{Center, LocalBasis};
use crate::op::CanonicalOp;
use crate::poly::complex_taylor_shift;
use rayon::prelude::*;
use rug::{Complex, Rational};
use serde_json::{json, Value};

pub use crate::local::{local_basis_near_singularity, SingularityReport};

/// A polygonal path; the optional loop target is encircled at the last vertex.
#[derive(Clone, Debug)]
pub struct PathSpec {
    pub vertices: Vec<Complex>,
    pub loop_target: Option<Complex>,
    pub ccw: bool,
    pub clearance: f64,
}

impl PathSpec {
    /// Straight path from the anchor 0.1·|c_min| toward c, stopping on the loop circle around c.
    pub fn direct(l: &CanonicalOp, c: &Complex, prec: u32) -> Self {
        let sing = l.singularities(prec);
        let cmin = sing.nearest_to_origin().map(|r| cabs_f64(&r.value)).unwrap_or(1.0);
        let dir = Complex::with_val(prec, c / Complex::with_val(prec, c.abs_ref()));
        let t0 = Complex::with_val(prec, &dir * (0.1 * cmin));
        let r = loop_radius(l, c, prec);
        let entry = Complex::with_val(prec, c - Complex::with_val(prec, &dir * r));
        PathSpec { vertices: vec![t0, entry], loop_target: Some(c.clone()), ccw: true, clearance: 1e-3 * cabs_f64(c) }
    }

    pub fn validate(&self, l: &CanonicalOp, prec: u32) -> Result<()> {
        let pts = singular_points(l, prec);
        for w in self.vertices.windows(2) {
            for s in &pts {
                if segment_distance(&w[0], &w[1], s) < self.clearance {
                    return Err(FrobError::PathTooCloseToSingularity(fmt_complex(s, 20)));
                }
            }
        }
        for v in &self.vertices {
            for s in &pts {
                if cabs_f64(&Complex::with_val(64, v - s)) < self.clearance {
                    return Err(FrobError::PathTooCloseToSingularity(fmt_complex(s, 20)));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self, digits: usize) -> Value {
        let v: Vec<Value> = self
            .vertices
            .iter()
            .map(|z| json!({"re": crate::arith::fmt_float(z.real(), digits), "im": crate::arith::fmt_float(z.imag(), digits)}))
            .collect();
        json!({
            "vertices": v,
            "loop_target": self.loop_target.as_ref().map(|c| fmt_complex(c, digits)),
            "ccw": self.ccw,
            "clearance": self.clearance,
        })
    }
}

/// 0.5 × distance from c to the nearest other singularity, 0 included.
pub fn loop_radius(l: &CanonicalOp, c: &Complex, prec: u32) -> f64 {
    let mut d = cabs_f64(c);
    for s in singular_points(l, prec) {
        let w = cabs_f64(&Complex::with_val(64, &s - c));
        if w > 1e-30 {
            d = d.min(w);
        }
    }
    0.5 * d
}

/// Finite singular points of the ∂-form: 0 and the roots of the leading coefficient.
pub fn singular_points(l: &CanonicalOp, prec: u32) -> Vec<Complex> {
    let mut v = vec![Complex::new(prec)];
    v.extend(l.singularities(prec).finite.into_iter().map(|r| r.value));
    v
}

fn segment_distance(a: &Complex, b: &Complex, s: &Complex) -> f64 {
    let (ax, ay) = (a.real().to_f64(), a.imag().to_f64());
    let (bx, by) = (b.real().to_f64(), b.imag().to_f64());
    let (sx, sy) = (s.real().to_f64(), s.imag().to_f64());
    let (dx, dy) = (bx - ax, by - ay);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 { 0.0 } else { (((sx - ax) * dx + (sy - ay) * dy) / len2).clamp(0.0, 1.0) };
    let (px, py) = (ax + t * dx - sx, ay + t * dy - sy);
    (px * px + py * py).sqrt()
}

/// Maps the state (f, f', …, f^{(d−1)}) at `from` to the state at `to`.
#[derive(Clone, Debug)]
pub struct TransferMatrix {
    pub m: CMat,
    pub from: Complex,
    pub to: Complex,
    /// Heuristic relative error bound (log2): unit roundoff per step, doubled per recentering.
    pub est_error_log2: f64,
}

impl TransferMatrix {
    pub fn identity(d: usize, at: &Complex, prec: u32) -> Self {
        TransferMatrix { m: CMat::identity(d, prec), from: at.clone(), to: at.clone(), est_error_log2: f64::NEG_INFINITY }
    }

    /// `other` after `self`.
    pub fn then(&self, other: &TransferMatrix) -> Self {
        let m = other.m.mul(&self.m);
        let e = log2_add(self.est_error_log2, other.est_error_log2) + 1.0;
        TransferMatrix { m, from: self.from.clone(), to: other.to.clone(), est_error_log2: e }
    }
}

fn log2_add(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if !m.is_finite() {
        return m;
    }
    m + ((a - m).exp2() + (b - m).exp2()).log2()
}

/// The ∂-form Σ Q_k(t) ∂^k as complex polynomials, with the singular points.
struct PartialOp {
    q: Vec<Vec<Complex>>,
    sing: Vec<Complex>,
}

impl PartialOp {
    fn new(l: &CanonicalOp, prec: u32) -> Self {
        PartialOp { q: l.to_partial_form().iter().map(|p| p.to_complex(prec)).collect(), sing: singular_points(l, prec) }
    }

    fn order(&self) -> usize {
        self.q.len() - 1
    }

    fn dist(&self, z: &Complex) -> f64 {
        self.sing.iter().map(|s| cabs_f64(&Complex::with_val(64, z - s))).fold(f64::INFINITY, f64::min)
    }

    /// One Taylor step from z to z + h: columns are the images of unit states.
    fn step(&self, z: &Complex, h: &Complex, prec: u32) -> CMat {
        let d = self.order();
        let qs: Vec<Vec<Complex>> = self.q.iter().map(|p| complex_taylor_shift(p, z)).collect();
        let lead = qs[d][0].clone();
        let hmag = cabs_log2(h);
        let cols: Vec<Vec<Complex>> = (0..d)
            .into_par_iter()
            .map(|col| {
                let mut y: Vec<Complex> = vec![Complex::new(prec); d];
                // y_j = f^{(j)}(z)/j!
                let mut fact = Complex::with_val(prec, 1);
                for j in 0..d {
                    if j == col {
                        y[j] = Complex::with_val(prec, 1 / &fact);
                    }
                    fact *= (j + 1) as u32;
                }
                let mut peak = f64::NEG_INFINITY;
                let mut quiet = 0;
                let cap = 8 * prec as usize + 400;
                let mut nn = 0usize;
                loop {
                    // coefficient of h^nn gives y_{nn+d}
                    let mut s = Complex::new(prec);
                    for (k, qk) in qs.iter().enumerate() {
                        for (i, qki) in qk.iter().enumerate() {
                            if (k == d && i == 0) || i > nn || is_czero(qki) {
                                continue;
                            }
                            let idx = nn - i + k;
                            if is_czero(&y[idx]) {
                                continue;
                            }
                            // (nn−i+1)…(nn−i+k)
                            let mut w = Complex::with_val(prec, qki * &y[idx]);
                            for f in (nn - i + 1)..=(nn - i + k) {
                                w *= f as u32;
                            }
                            s += w;
                        }
                    }
                    let mut den = lead.clone();
                    for f in (nn + 1)..=(nn + d) {
                        den *= f as u32;
                    }
                    let next = Complex::with_val(prec, -s / den);
                    let mag = cabs_log2(&next) + (nn + d) as f64 * hmag + (d as f64) * ((nn + d) as f64).log2();
                    y.push(next);
                    if mag.is_finite() {
                        peak = peak.max(mag);
                    }
                    if !mag.is_finite() || mag < peak - (prec as f64) - 10.0 {
                        quiet += 1;
                    } else {
                        quiet = 0;
                    }
                    nn += 1;
                    if quiet > d + 2 || y.len() > cap {
                        break;
                    }
                }
                // derivatives at z + h
                let mut out = Vec::with_capacity(d);
                for j in 0..d {
                    let mut acc = Complex::new(prec);
                    let mut hp = Complex::with_val(prec, 1);
                    for n in j..y.len() {
                        if !is_czero(&y[n]) {
                            let mut w = Complex::with_val(prec, &y[n] * &hp);
                            for f in (n - j + 1)..=n {
                                w *= f as u32;
                            }
                            acc += w;
                        }
                        hp *= h;
                    }
                    out.push(acc);
                }
                out
            })
            .collect();
        CMat::from_cols(&cols, prec)
    }
}

/// Continuation from `a` to `b` along the straight segment.
pub fn transfer(l: &CanonicalOp, a: &Complex, b: &Complex, prec: u32) -> Result<TransferMatrix> {
    let work = prec + 64;
    let pop = PartialOp::new(l, work);
    transfer_with(&pop, a, b, work)
}

fn transfer_with(pop: &PartialOp, a: &Complex, b: &Complex, work: u32) -> Result<TransferMatrix> {
    let d = pop.order();
    let a = Complex::with_val(work, a);
    let b = Complex::with_val(work, b);
    for s in &pop.sing {
        if segment_distance(&a, &b, s) < 1e-30 {
            return Err(FrobError::PathTooCloseToSingularity(fmt_complex(s, 20)));
        }
    }
    let mut tm = TransferMatrix::identity(d, &a, work);
    let mut z = a.clone();
    let mut steps = 0u32;
    loop {
        let rest = Complex::with_val(work, &b - &z);
        let rl = cabs_f64(&rest);
        if rl == 0.0 || cabs_log2(&rest) < -(work as f64) {
            break;
        }
        let r = pop.dist(&z);
        let hl = rl.min(0.5 * r);
        if hl < 1e-40 {
            return Err(FrobError::StepUnderflow(fmt_complex(&z, 20)));
        }
        let h = if hl >= rl { rest } else { Complex::with_val(work, &rest * (hl / rl)) };
        let step = pop.step(&z, &h, work);
        let next = Complex::with_val(work, &z + &h);
        let st = TransferMatrix { est_error_log2: -(work as f64) + 10.0, m: step, from: z.clone(), to: next.clone() };
        tm = tm.then(&st);
        z = next;
        steps += 1;
        if steps > 100_000 {
            return Err(FrobError::StepUnderflow(fmt_complex(&z, 20)));
        }
    }
    tm.to = b;
    Ok(tm)
}

fn transfer_path(pop: &PartialOp, pts: &[Complex], work: u32) -> Result<TransferMatrix> {
    let d = pop.order();
    let mut tm = TransferMatrix::identity(d, &pts[0], work);
    for w in pts.windows(2) {
        tm = tm.then(&transfer_with(pop, &w[0], &w[1], work)?);
    }
    Ok(tm)
}

fn loop_points(base: &Complex, around: &Complex, radius: f64, ccw: bool, work: u32) -> Vec<Complex> {
    let dv = Complex::with_val(work, base - around);
    let dl = cabs_f64(&dv);
    let entry = Complex::with_val(work, around + Complex::with_val(work, &dv * (radius / dl)));
    let mut pts = vec![base.clone(), entry.clone()];
    let rel = Complex::with_val(work, &entry - around);
    let sgn = if ccw { 1.0 } else { -1.0 };
    for k in 1..=16 {
        let ang = Complex::with_val(work, (0, sgn * 2.0 * std::f64::consts::PI * k as f64 / 16.0));
        // exact angles matter only at the closing vertex
        let v = if k == 16 { entry.clone() } else { Complex::with_val(work, around + Complex::with_val(work, &rel * ang.exp())) };
        pts.push(v);
    }
    pts.push(base.clone());
    pts
}

/// Monodromy around `around` based at `base`, on a 16-gon of the given radius.
pub fn monodromy_loop(l: &CanonicalOp, base: &Complex, around: &Complex, radius: f64, prec: u32) -> Result<TransferMatrix> {
    let work = prec + 64;
    let pop = PartialOp::new(l, work);
    monodromy_loop_with(&pop, base, around, radius, true, work)
}

fn monodromy_loop_with(pop: &PartialOp, base: &Complex, around: &Complex, radius: f64, ccw: bool, work: u32) -> Result<TransferMatrix> {
    let inside = pop.sing.iter().filter(|s| cabs_f64(&Complex::with_val(64, Complex::with_val(64, &**s) - around)) < radius).count();
    let on_circle = pop.sing.iter().any(|s| (cabs_f64(&Complex::with_val(64, Complex::with_val(64, s) - around)) - radius).abs() < 1e-12 * radius.max(1e-300));
    if inside > 1 || on_circle {
        return Err(FrobError::PathTooCloseToSingularity(fmt_complex(around, 20)));
    }
    let dl = cabs_f64(&Complex::with_val(64, base - around));
    if dl < radius * (1.0 - 1e-12) {
        return Err(FrobError::InvalidArgument("loop base lies inside the loop circle".into()));
    }
    let pts = loop_points(base, around, radius, ccw, work);
    let mut t = transfer_path(pop, &pts, work)?;
    t.to = base.clone();
    Ok(t)
}

/// σ_c and Frobenius constants along a path.
#[derive(Clone, Debug)]
pub struct MonodromyData {
    /// σ_c in the local basis at 0 of the extended operator.
    pub sigma: CMat,
    pub delta_coords: Vec<Complex>,
    pub kappa: Jet<Complex>,
    pub variation_rank: usize,
    pub singular_values_log2: Vec<f64>,
    /// Largest |(σ_c−1)φ_n − κ_n δ| relative to |δ| (log2).
    pub residual_log2: f64,
    /// Heuristic error bound on the κ values (log2).
    pub est_error_log2: f64,
    pub extended_order: usize,
    pub anchor: Complex,
    /// State-space monodromy at the anchor.
    pub state_sigma: CMat,
}

impl MonodromyData {
    pub fn to_json(&self, digits: usize) -> Value {
        let k: Vec<Value> = self.kappa.coeffs.iter().map(|z| complex_json(z, digits)).collect();
        let dc: Vec<Value> = self.delta_coords.iter().map(|z| complex_json(z, digits)).collect();
        let sig: Vec<Vec<Value>> = (0..self.sigma.rows).map(|i| (0..self.sigma.cols).map(|j| complex_json(self.sigma.get(i, j), digits)).collect()).collect();
        json!({
            "kappa": k,
            "variation_rank": self.variation_rank,
            "singular_values_log2": self.singular_values_log2,
            "residual_log2": self.residual_log2,
            "est_error_log2": self.est_error_log2,
            "delta_coords": dc,
            "sigma": sig,
            "extended_order": self.extended_order,
            "anchor": fmt_complex(&self.anchor, 30),
        })
    }
}

pub fn complex_json(z: &Complex, digits: usize) -> Value {
    json!({"re": crate::arith::fmt_float(z.real(), digits), "im": crate::arith::fmt_float(z.imag(), digits)})
}

/// Extended operator (D−ρ)^{max(0, K+1−m)}·L.
pub fn extended_operator(l: &CanonicalOp, rho: &Rational, k: usize) -> Result<(CanonicalOp, usize)> {
    let m = l.indicial(64)?.multiplicity_of(rho);
    let j = (k + 1).saturating_sub(m);
    Ok((l.left_compose(&CanonicalOp::d_minus(rho, j as u32)), j))
}

/// State vectors (f, f', …) at t of φ_{ρ,k} for k ≤ kmax, with d derivative rows.
pub fn frobenius_states(l: &CanonicalOp, rho: &Exponent, kmax: usize, t: &Complex, d: usize, ratio: f64, prec: u32) -> Result<Vec<Vec<Complex>>> {
    let n = LocalBasis::terms_for(ratio, prec);
    let table = frobenius_table(l, rho, kmax, n, prec, TableMode::Float)?;
    let lt = principal_log(t);
    let mut out = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax {
        let s = table.series(k, prec);
        let v = s.derivative_values(t, &lt, d);
        out.push(v.values);
    }
    Ok(out)
}

/// Frobenius constants κ_{ρ,0..K} via numerical monodromy around c.
pub fn kappa_via_monodromy(l: &CanonicalOp, rho: &Rational, k: usize, path: &PathSpec, prec: u32) -> Result<MonodromyData> {
    kappa_via_monodromy_with_base(l, rho, k, path, prec, None)
}

/// As [`kappa_via_monodromy`]; `base` names the solution φ_{ρ*,0} of a right factor whose variation is δ.
pub fn kappa_via_monodromy_with_base(l: &CanonicalOp, rho: &Rational, k: usize, path: &PathSpec, prec: u32, base: Option<(&CanonicalOp, &Rational)>) -> Result<MonodromyData> {
    let work = prec + 64;
    let idata = l.indicial(work)?;
    if !idata.is_admissible(rho) {
        return Err(FrobError::ExponentNotAdmissible(rho.to_string(), 0));
    }
    let (lt, _) = extended_operator(l, rho, k)?;
    let d = lt.order();
    let c = path.loop_target.clone().ok_or_else(|| FrobError::InvalidArgument("path has no loop target".into()))?;
    path.validate(&lt, work)?;
    let pop = PartialOp::new(&lt, work);
    let t0 = Complex::with_val(work, &path.vertices[0]);
    let sing = l.singularities(work);
    let cmin = sing.nearest_to_origin().map(|r| cabs_f64(&r.value)).unwrap_or(1.0);
    let ratio = cabs_f64(&t0) / cmin;
    if ratio >= 0.5 {
        return Err(FrobError::OutsideConvergenceDisk { t: cabs_f64(&t0), radius: cmin });
    }
    // σ_c on states at t0
    let forward = transfer_path(&pop, &path.vertices, work)?;
    let last = path.vertices.last().unwrap();
    let lp = monodromy_loop_with(&pop, last, &c, loop_radius(l, &c, work).min(cabs_f64(&Complex::with_val(64, last - &c))), path.ccw, work)?;
    let back = forward.m.inverse()?;
    let sigma_state = back.mul(&lp.m).mul(&forward.m);
    // relative error of σ amplified by the conditioning of the forward transfer
    let cond = forward.m.max_abs_log2().max(0.0) + back.max_abs_log2().max(0.0);
    let est = log2_add(forward.est_error_log2, lp.est_error_log2) + cond;
    let var = sigma_state.sub(&CMat::identity(d, work));
    let thr = -(prec as f64) / 2.0;
    let (rank, svals) = var.rank(thr);
    if rank != 1 {
        return Err(FrobError::NotReflectionPoint(rank));
    }
    let rho_e = Exponent::Exact(rho.clone());
    let phis = frobenius_states(l, &rho_e, k, &t0, d, ratio, work)?;
    let delta = match base {
        None => var.mul_vec(&phis[0]),
        Some((bl, brho)) => {
            let bs = frobenius_states(bl, &Exponent::Exact(brho.clone()), 0, &t0, d, ratio, work)?;
            var.mul_vec(&bs[0])
        }
    };
    let dn = vec_norm_log2(&delta);
    if dn < thr + var.max_abs_log2() {
        return Err(FrobError::NormalizationImpossible(format!("variation of the base solution vanishes (2^{:.1})", dn)));
    }
    let mut kap = Vec::with_capacity(k + 1);
    let mut resid = f64::NEG_INFINITY;
    for phi in &phis {
        let v = var.mul_vec(phi);
        let kk = project_onto(&v, &delta);
        let r = vec_sub(&v, &vec_scale(&delta, &kk));
        resid = resid.max(vec_norm_log2(&r) - dn);
        kap.push(kk);
    }
    // σ_c in the local basis at 0
    let lb = LocalBasis::new(&lt, Center::Zero, LocalBasis::terms_for(ratio, work), work)?;
    let (w, _) = lb.state_matrix(&t0);
    let winv = w.inverse()?;
    let sigma = winv.mul(&sigma_state).mul(&w);
    let delta_coords = winv.mul_vec(&delta);
    Ok(MonodromyData {
        sigma,
        delta_coords,
        kappa: Jet::from_coeffs(kap.into_iter().map(|z| Complex::with_val(prec, z)).collect()),
        variation_rank: rank,
        singular_values_log2: svals,
        residual_log2: resid,
        est_error_log2: est + var.max_abs_log2() - dn,
        extended_order: d,
        anchor: t0,
        state_sigma: sigma_state,
    })
}

/// σ_0 computed by a numerical loop around 0 based at `base`.
pub fn sigma_zero_numeric(l: &CanonicalOp, base: &Complex, prec: u32) -> Result<TransferMatrix> {
    let work = prec + 64;
    let pop = PartialOp::new(l, work);
    let r = cabs_f64(base);
    transfer_path(&pop, &loop_points(base, &Complex::new(work), r, true, work)[1..], work)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_op;

    fn apery() -> CanonicalOp {
        parse_op("D^3 - t*(2*D+1)*(17*D^2+17*D+5) + t^2*(D+1)^3").unwrap()
    }

    #[test]
    fn transfer_trivial_and_inverse() {
        let l = apery();
        let a = Complex::with_val(128, 0.005);
        let b = Complex::with_val(128, (0.02, 0.003));
        let id = transfer(&l, &a, &a, 128).unwrap();
        assert!(id.m.sub(&CMat::identity(3, 192)).max_abs_log2() < -150.0);
        let f = transfer(&l, &a, &b, 128).unwrap();
        let g = transfer(&l, &b, &a, 128).unwrap();
        let p = g.m.mul(&f.m);
        assert!(p.sub(&CMat::identity(3, 192)).max_abs_log2() < -120.0);
    }

    #[test]
    fn transfer_matches_series() {
        let l = apery();
        let prec = 160;
        let a = Complex::with_val(prec + 64, 0.005);
        let b = Complex::with_val(prec + 64, 0.02);
        let tm = transfer(&l, &a, &b, prec).unwrap();
        let cmin = 0.0294;
        let sa = frobenius_states(&l, &Exponent::Exact(Rational::new()), 2, &a, 3, 0.005 / cmin, prec + 64).unwrap();
        let sb = frobenius_states(&l, &Exponent::Exact(Rational::new()), 2, &b, 3, 0.02 / cmin, prec + 64).unwrap();
        for k in 0..3 {
            let moved = tm.m.mul_vec(&sa[k]);
            let err = vec_norm_log2(&vec_sub(&moved, &sb[k])) - vec_norm_log2(&sb[k]);
            assert!(err < -(prec as f64) + 30.0, "k={} err={}", k, err);
        }
    }

    #[test]
    fn loop_around_ordinary_point_is_trivial() {
        let l = apery();
        let base = Complex::with_val(192, 0.3);
        let t = monodromy_loop(&l, &base, &Complex::with_val(192, 0.5), 0.1, 128).unwrap();
        assert!(t.m.sub(&CMat::identity(3, 192)).max_abs_log2() < -100.0);
    }

    #[test]
    fn polylog_variation_rank_one() {
        let l = parse_op("(D+1)*D - t*(D+1)^2").unwrap();
        let base = Complex::with_val(192, 0.5);
        let t = monodromy_loop(&l, &base, &Complex::with_val(192, 1), 0.25, 128).unwrap();
        assert_eq!(t.m.sub(&CMat::identity(2, 192)).rank(-64.0).0, 1);
    }
}
