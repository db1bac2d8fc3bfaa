//! Shipped operators with their reflection points and known closed forms.

use crate::error::{FrobError, Result};
use crate::gamma::{baby_closed_form, polylog_closed_form};
use crate::limits::hypergeometric_operator;
use crate::op::CanonicalOp;
use crate::parser::parse_op;
use rug::{Complex, Float, Rational};

pub const NAMES: [&str; 8] = ["apery", "beauville", "polylog1", "polylog2", "polylog3", "gauss-legendre", "baby-beta", "gauss-generic"];

/// Closed-form gamma generator of an entry, when known.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GammaClosed {
    Baby,
    Polylog(u32),
}

impl GammaClosed {
    pub fn eval(&self, s: &Complex) -> Complex {
        match self {
            GammaClosed::Baby => baby_closed_form(s),
            GammaClosed::Polylog(n) => polylog_closed_form(*n, s),
        }
    }
}

/// A closed-form Frobenius constant: Σ q_i · Π ζ(k).
#[derive(Clone, Debug)]
pub struct KappaClosed {
    pub terms: Vec<(Rational, Vec<u32>)>,
}

impl KappaClosed {
    fn new(terms: &[((i64, i64), &[u32])]) -> Self {
        KappaClosed { terms: terms.iter().map(|((a, b), z)| (Rational::from((*a, *b)), z.to_vec())).collect() }
    }

    pub fn value(&self, prec: u32) -> Float {
        let mut acc = Float::new(prec);
        for (q, zs) in &self.terms {
            let mut v = Float::with_val(prec, q);
            for k in zs {
                v *= Float::with_val(prec, Float::with_val(prec, *k).zeta_ref());
            }
            acc += v;
        }
        acc
    }

    pub fn label(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|(q, zs)| {
                let z: Vec<String> = zs.iter().map(|k| format!("zeta({})", k)).collect();
                if z.is_empty() {
                    q.to_string()
                } else {
                    format!("({})*{}", q, z.join("*"))
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: String,
    pub description: String,
    pub op: CanonicalOp,
    pub rho: Rational,
    /// Reflection point used for κ and Γ.
    pub c: Complex,
    pub c_label: String,
    /// Published κ_0, κ_1, … where known.
    pub kappa_closed: Vec<KappaClosed>,
    pub gamma_closed: Option<GammaClosed>,
    pub hypergeometric: Option<(Vec<Rational>, Vec<Rational>)>,
}

fn sqrt_int(n: u32, prec: u32) -> Float {
    Float::with_val(prec, n).sqrt()
}

fn polylog(n: u32, prec: u32) -> CatalogEntry {
    let src = format!("(D+1)*D^{} - t*(D+1)^{}", n, n + 1);
    CatalogEntry {
        name: format!("polylog{}", n),
        description: format!("adjoint (up to sign) of ((1-t)D - 1)D^{}, the operator of Li_{}; the integrand of its gamma function is a multiple of log(t)^{}", n, n, n - 1),
        op: parse_op(&src).unwrap(),
        rho: Rational::new(),
        c: Complex::with_val(prec, 1),
        c_label: "1".into(),
        kappa_closed: Vec::new(),
        gamma_closed: Some(GammaClosed::Polylog(n)),
        hypergeometric: None,
    }
}

/// Hypergeometric Π(D+β_j−1) − tΠ(D+α_j) with reflection point 1.
pub fn gauss_generic(alphas: &[Rational], betas: &[Rational], prec: u32) -> CatalogEntry {
    let a: Vec<String> = alphas.iter().map(|x| x.to_string()).collect();
    let b: Vec<String> = betas.iter().map(|x| x.to_string()).collect();
    CatalogEntry {
        name: "gauss-generic".into(),
        description: format!("hypergeometric operator with alpha = ({}), beta = ({})", a.join(", "), b.join(", ")),
        op: hypergeometric_operator(alphas, betas),
        rho: Rational::new(),
        c: Complex::with_val(prec, 1),
        c_label: "1".into(),
        kappa_closed: Vec::new(),
        gamma_closed: None,
        hypergeometric: Some((alphas.to_vec(), betas.to_vec())),
    }
}

pub fn entry(name: &str, prec: u32) -> Result<CatalogEntry> {
    let q = |a: i64, b: i64| Rational::from((a, b));
    Ok(match name {
        "apery" => CatalogEntry {
            name: name.into(),
            description: "Apery operator for zeta(3)".into(),
            op: parse_op("D^3 - t*(2*D+1)*(17*D^2+17*D+5) + t^2*(D+1)^3").unwrap(),
            rho: Rational::new(),
            c: Complex::with_val(prec, 17 - Float::with_val(prec, sqrt_int(2, prec) * 12u32)),
            c_label: "17-12*sqrt(2)".into(),
            kappa_closed: vec![
                KappaClosed::new(&[((1, 1), &[])]),
                KappaClosed::new(&[]),
                KappaClosed::new(&[((-2, 1), &[2])]),
                KappaClosed::new(&[((17, 6), &[3])]),
                KappaClosed::new(&[((2, 1), &[4])]),
                KappaClosed::new(&[((7, 5), &[5]), ((-17, 3), &[2, 3])]),
            ],
            gamma_closed: None,
            hypergeometric: None,
        },
        "beauville" => CatalogEntry {
            name: name.into(),
            description: "Apery-like operator for zeta(2) (Beauville family)".into(),
            op: parse_op("D^2 - t*(11*D^2+11*D+3) - t^2*(D+1)^2").unwrap(),
            rho: Rational::new(),
            c: Complex::with_val(prec, Float::with_val(prec, sqrt_int(5, prec) * 5u32) - 11u32) / 2u32,
            c_label: "(-11+5*sqrt(5))/2".into(),
            kappa_closed: vec![
                KappaClosed::new(&[((1, 1), &[])]),
                KappaClosed::new(&[]),
                KappaClosed::new(&[((-7, 5), &[2])]),
                KappaClosed::new(&[((2, 1), &[3])]),
                KappaClosed::new(&[((1, 2), &[4])]),
                KappaClosed::new(&[((1, 1), &[5]), ((-3, 1), &[2, 3])]),
            ],
            gamma_closed: None,
            hypergeometric: None,
        },
        "polylog1" => polylog(1, prec),
        "polylog2" => polylog(2, prec),
        "polylog3" => polylog(3, prec),
        "gauss-legendre" => {
            let mut e = gauss_generic(&[q(1, 2), q(1, 2)], &[q(1, 1), q(1, 1)], prec);
            e.name = name.into();
            e.description = "Legendre family of elliptic curves, 2F1(1/2,1/2;1|t)".into();
            e
        }
        "baby-beta" => CatalogEntry {
            name: name.into(),
            description: "rank one operator of (1-t)^(-1/2); its gamma function is a beta integral".into(),
            op: parse_op("D - t*(D+1/2)").unwrap(),
            rho: Rational::new(),
            c: Complex::with_val(prec, 1),
            c_label: "1".into(),
            kappa_closed: Vec::new(),
            gamma_closed: Some(GammaClosed::Baby),
            hypergeometric: None,
        },
        "gauss-generic" => gauss_generic(&[q(1, 3), q(2, 3)], &[q(1, 1), q(1, 1)], prec),
        _ => return Err(FrobError::UnknownCatalog(name.into())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::cabs_f64;

    #[test]
    fn reflection_points_are_singular() {
        for name in NAMES {
            let e = entry(name, 128).unwrap();
            let lead = e.op.leading();
            let v = lead.eval_c(&e.c);
            assert!(cabs_f64(&v) < 1e-30, "{}", name);
        }
        assert!(entry("nope", 64).is_err());
    }

    #[test]
    fn closed_kappa_values() {
        let e = entry("apery", 128).unwrap();
        let k2 = e.kappa_closed[2].value(128).to_f64();
        assert!((k2 + std::f64::consts::PI.powi(2) / 3.0).abs() < 1e-14);
        let k4 = e.kappa_closed[4].value(128).to_f64();
        assert!((k4 - std::f64::consts::PI.powi(4) / 45.0).abs() < 1e-14);
    }
}
