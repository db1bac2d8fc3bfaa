//! Every shipped operator with its reflection point and local exponents there.
use frobkit::catalog::{entry, NAMES};
use frobkit::local::local_basis_near_singularity;

fn main() {
    let prec = 192;
    for name in NAMES {
        let e = entry(name, prec).unwrap();
        let rep = local_basis_near_singularity(&e.op, &e.c, prec).unwrap();
        let exps: Vec<String> = rep.exponents.iter().map(|(x, m)| if *m > 1 { format!("{}^{}", x.label(), m) } else { x.label() }).collect();
        println!("{:<15} c = {:<20} exponents at c: {:<18} variation rank {}  {}", name, e.c_label, exps.join(", "), rep.variation_rank, e.op);
    }
}
