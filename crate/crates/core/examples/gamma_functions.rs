//! Gamma functions by Mellin transform: the beta integral, then the Taylor jet that reproduces κ.
use frobkit::arith::{cabs_f64, two_pi_i};
use frobkit::catalog::entry;
use frobkit::gamma::{fit_pointwise, GammaConfig, GammaModel};
use frobkit::monodromy::{kappa_via_monodromy, PathSpec};
use rug::{Complex, Rational};

fn main() {
    let prec = 256;
    let w = prec + 64;
    let baby = entry("baby-beta", w).unwrap();
    let m = GammaModel::new(&GammaConfig::new(&baby.op, &baby.c, prec)).unwrap();
    println!("baby-beta: R = {:?}", m.r.exact);
    let pts: Vec<Complex> = [(0.7, 0.2), (1.9, -0.4), (3.25, 0.1)].iter().map(|&z| Complex::with_val(w, z)).collect();
    let samples: Vec<_> = pts.iter().map(|s| (s.clone(), m.eval(s).unwrap().value, baby.gamma_closed.unwrap().eval(s))).collect();
    let (lambda, mm) = fit_pointwise(&samples);
    for (s, ours, closed) in &samples {
        let pred = Complex::with_val(w, &lambda * ours) * Complex::with_val(w, two_pi_i(w) * s * mm).exp();
        println!("  s = {:<12} closed form {:>40}  diff {:.1e}", s.to_string_radix(10, Some(4)), closed.to_string_radix(10, Some(15)), cabs_f64(&Complex::with_val(w, &pred - closed)));
    }

    let e = entry("beauville", w).unwrap();
    let cfg = GammaConfig::new(&e.op, &e.c, prec);
    let mut gm = GammaModel::new(&cfg).unwrap();
    println!("beauville: R = {:?}", gm.r.exact);
    let md = kappa_via_monodromy(&e.op, &Rational::new(), 4, &PathSpec::direct(&e.op, &e.c, w), prec).unwrap();
    let zero = Complex::with_val(w, 0);
    let (g, _) = gm.taylor(&zero, 4).unwrap();
    let n = gm.normalize_to(&md.kappa, &zero).unwrap();
    let pred = n.apply(&g);
    println!("  lambda = {}, m = {}", n.lambda.to_string_radix(10, Some(20)), n.m);
    for k in 0..=4 {
        let d = Complex::with_val(w, &pred.coeffs[k] - &md.kappa.coeffs[k]);
        println!("  k = {}: gamma side {:>30}  kappa {:>30}  diff {:.1e}", k, pred.coeffs[k].real().to_string_radix(10, Some(20)), md.kappa.coeffs[k].real().to_string_radix(10, Some(20)), cabs_f64(&d));
    }
    println!("  difference equation residual {:.1e}", gm.difference_check(&Complex::with_val(w, 3), 3, 7).unwrap());
}
