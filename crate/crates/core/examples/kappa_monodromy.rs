//! Frobenius constants of the Apery operator by numerical monodromy around 17 − 12√2.
use frobkit::catalog::entry;
use frobkit::monodromy::{kappa_via_monodromy, PathSpec};
use rug::{Complex, Rational};
use std::time::Instant;

fn main() {
    let prec = 256;
    let e = entry("apery", prec + 64).unwrap();
    let path = PathSpec::direct(&e.op, &e.c, prec + 64);
    let t = Instant::now();
    let md = kappa_via_monodromy(&e.op, &Rational::new(), 5, &path, prec).unwrap();
    println!("variation rank {}, {:?}", md.variation_rank, t.elapsed());
    for (k, z) in md.kappa.coeffs.iter().enumerate() {
        let closed = e.kappa_closed[k].value(prec);
        let diff = Complex::with_val(prec, z - &closed);
        println!("kappa_{} = {:>45}   closed form {:<28} diff {:.2e}", k, z.real().to_string_radix(10, Some(40)), e.kappa_closed[k].label(), frobkit::arith::cabs_f64(&diff));
    }
    println!("estimated error 2^{:.0}", md.est_error_log2);
}
