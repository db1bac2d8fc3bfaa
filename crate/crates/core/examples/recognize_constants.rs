//! Recognize Frobenius constants as rational combinations of zeta products.
use frobkit::catalog::entry;
use frobkit::monodromy::{kappa_via_monodromy, PathSpec};
use frobkit::recognition::{recognize, ValueSource};
use rug::{Float, Rational};

fn main() {
    let prec = 256;
    for name in ["apery", "beauville"] {
        let e = entry(name, prec + 64).unwrap();
        let md = kappa_via_monodromy(&e.op, &Rational::new(), 5, &PathSpec::direct(&e.op, &e.c, prec + 64), prec).unwrap();
        println!("{}", name);
        for k in 2..=5 {
            let x = Float::with_val(200, md.kappa.coeffs[k].real());
            match recognize(&ValueSource::Fixed(x), k as u32, None, &[], 200).unwrap() {
                Some(r) => {
                    let terms: Vec<String> = r.relation.iter().filter(|(_, q)| *q != 0).map(|(m, q)| format!("({})*{}", q, m)).collect();
                    println!("  kappa_{} = {}   [{} bits]", k, terms.join(" + "), r.confidence_bits);
                }
                None => println!("  kappa_{}: no relation", k),
            }
        }
    }
}
