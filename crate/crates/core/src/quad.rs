//! Double-exponential quadrature on [0, b] with nested levels.
//!
//! Nodes u = b/(1 + e^{−π sinh τ}) cluster at both ends, so u^γ log^k u singularities at 0
//! (γ > −1) are integrated at the full working precision.

use crate::arith::cabs_log2;
use crate::error::{FrobError, Result};
use rayon::prelude::*;
use rug::float::Constant;
use rug::{Complex, Float};

#[derive(Clone, Debug)]
pub struct DeNode {
    pub u: Float,
    /// du/dτ.
    pub w: Float,
    pub value: Complex,
    pub level: usize,
}

/// Nodes and cached integrand values of a nested tanh-sinh type rule on [0, b].
#[derive(Clone, Debug)]
pub struct DeRule {
    pub b: Float,
    pub prec: u32,
    pub nodes: Vec<DeNode>,
    pub level: usize,
    t_left: f64,
    t_right: f64,
}

fn h_at(level: usize, prec: u32) -> Float {
    Float::with_val(prec, 0.5) >> level as i32
}

impl DeRule {
    /// `gamma_min` is the worst exponent of the integrand at u = 0; it sets the left cut-off.
    pub fn new(b: &Float, gamma_min: f64, prec: u32) -> Result<Self> {
        if gamma_min <= -1.0 {
            return Err(FrobError::ConvergenceDomainViolated(format!("endpoint exponent {:.4} <= -1", gamma_min)));
        }
        let target = prec as f64 * std::f64::consts::LN_2 + 20.0;
        let t_left = ((target / (1.0 + gamma_min)) / std::f64::consts::PI).asinh();
        let t_right = (target / std::f64::consts::PI).asinh();
        Ok(DeRule { b: Float::with_val(prec, b), prec, nodes: Vec::new(), level: 0, t_left, t_right })
    }

    fn node(&self, tau: &Float, level: usize) -> (Float, Float, usize) {
        let p = self.prec;
        let pi = Float::with_val(p, Constant::Pi);
        let x = Float::with_val(p, tau.sinh_ref()) * &pi;
        let e = Float::with_val(p, (-x).exp());
        let one_e = Float::with_val(p, 1 + &e);
        let u = Float::with_val(p, &self.b / &one_e);
        let w = Float::with_val(p, &self.b * &pi) * Float::with_val(p, tau.cosh_ref()) * &e / Float::with_val(p, one_e.square_ref());
        (u, w, level)
    }

    /// Adds the nodes of the next level (all of level 0 on the first call).
    pub fn refine<G: Fn(&Float) -> Complex + Sync>(&mut self, g: &G) {
        let p = self.prec;
        let level = if self.nodes.is_empty() { 0 } else { self.level + 1 };
        let h = h_at(level, p);
        let hf = h.to_f64();
        let kl = (self.t_left / hf).ceil() as i64;
        let kr = (self.t_right / hf).ceil() as i64;
        let ks: Vec<i64> = (-kl..=kr).filter(|k| level == 0 || k.rem_euclid(2) == 1).collect();
        let new: Vec<DeNode> = ks
            .par_iter()
            .map(|&k| {
                let tau = Float::with_val(p, &h * k);
                let (u, w, lv) = self.node(&tau, level);
                let value = g(&u);
                DeNode { u, w, value, level: lv }
            })
            .collect();
        self.nodes.extend(new);
        self.level = level;
    }

    /// h_ℓ Σ w·g(u)·factor(u) over the nodes up to `level`.
    pub fn sum<H: Fn(&Float) -> Complex + Sync>(&self, level: usize, factor: &H) -> Complex {
        let p = self.prec;
        let h = h_at(level, p);
        let parts: Vec<Complex> = self
            .nodes
            .par_iter()
            .filter(|n| n.level <= level)
            .map(|n| Complex::with_val(p, &n.value * &n.w) * factor(&n.u))
            .collect();
        let mut acc = Complex::new(p);
        for x in parts {
            acc += x;
        }
        acc * h
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Refines until consecutive levels agree to about half the precision; returns the error estimate (log2).
    pub fn adapt<G, H>(&mut self, g: &G, factors: &[H], max_nodes: usize) -> Result<f64>
    where
        G: Fn(&Float) -> Complex + Sync,
        H: Fn(&Float) -> Complex + Sync,
    {
        if self.nodes.is_empty() {
            self.refine(g);
        }
        loop {
            self.refine(g);
            let mut worst = f64::NEG_INFINITY;
            for f in factors {
                let a = self.sum(self.level, f);
                let b = self.sum(self.level - 1, f);
                let d = cabs_log2(&Complex::with_val(self.prec, &a - &b)) - cabs_log2(&a).max(0.0);
                worst = worst.max(d);
            }
            // the rule converges quadratically: the error of the finer level is about the square of the gap
            if worst < -(self.prec as f64) / 2.0 - 10.0 {
                return Ok((2.0 * worst).max(-(self.prec as f64) + 8.0));
            }
            if self.nodes.len() * 2 > max_nodes {
                return Err(FrobError::QuadratureStagnation(worst));
            }
        }
    }
}

/// ∫_0^b g(u) du.
pub fn de_integrate<G: Fn(&Float) -> Complex + Sync>(g: &G, b: &Float, gamma_min: f64, prec: u32) -> Result<(Complex, f64)> {
    let mut r = DeRule::new(b, gamma_min, prec)?;
    let one = |_: &Float| Complex::with_val(prec, 1);
    let err = r.adapt(g, &[one], 1 << 20)?;
    Ok((r.sum(r.level, &one), err))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_half_endpoint() {
        // ∫_0^1 u^{-1/2} du = 2
        let p = 256;
        let (v, err) = de_integrate(&|u: &Float| Complex::with_val(p, Float::with_val(p, u.recip_sqrt_ref())), &Float::with_val(p, 1), -0.5, p).unwrap();
        let d = Complex::with_val(p, &v - 2);
        assert!(cabs_log2(&d) < -230.0, "{} {}", cabs_log2(&d), err);
    }

    #[test]
    fn log_endpoint() {
        // ∫_0^{1/2} log u du = (log(1/2) − 1)/2
        let p = 200;
        let (v, _) = de_integrate(&|u: &Float| Complex::with_val(p, Float::with_val(p, u.ln_ref())), &Float::with_val(p, 0.5), 0.0, p).unwrap();
        let l2 = Float::with_val(p, Float::with_val(p, 0.5).ln() - 1) / 2u32;
        assert!(cabs_log2(&Complex::with_val(p, &v - &l2)) < -180.0);
    }
}
