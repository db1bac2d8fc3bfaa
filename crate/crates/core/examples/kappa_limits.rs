//! Limit method: λ_k from coefficient ratios, compared with the hypergeometric closed form 1/A(s).
use frobkit::limits::{hypergeometric_kappa, hypergeometric_operator, kappa_limits};
use rug::{Complex, Rational};

fn main() {
    let prec = 256;
    let q = |a: i64, b: i64| Rational::from((a, b));
    let (alphas, betas) = (vec![q(1, 2), q(1, 2)], vec![q(1, 1), q(1, 1)]);
    let l = hypergeometric_operator(&alphas, &betas);
    println!("L = {}", l);
    let rep = kappa_limits(&l, &Rational::new(), 4, 1000, 8, prec).unwrap();
    let oracle = hypergeometric_kappa(&alphas, &betas, &Rational::new(), 4, prec).unwrap();
    for k in 0..=4 {
        let a = &rep.kappa_ratios[k];
        let b = Complex::with_val(prec, &oracle.coeffs[k] / &oracle.coeffs[0]);
        let d = Complex::with_val(prec, a - &b);
        println!("kappa_{}/kappa_0 = {:>32}  oracle {:>32}  diff {:.1e}", k, a.real().to_string_radix(10, Some(25)), b.real().to_string_radix(10, Some(25)), frobkit::arith::cabs_f64(&d));
    }
    println!("verified: {:?}", rep.verified);
    println!("unverified: {:?}", rep.unverified);
}
