//! The rational basis η_k of the extended solution space of D^{n+1}L for the Apery operator.
use frobkit::catalog::entry;
use frobkit::monodromy::PathSpec;
use frobkit::qstructure::eta_checks;

fn main() {
    let prec = 256;
    let e = entry("apery", prec + 64).unwrap();
    let path = PathSpec::direct(&e.op, &e.c, prec + 64);
    let rep = eta_checks(&e.op, 1, &path, prec).unwrap();
    for (k, a) in rep.alpha.iter().enumerate() {
        println!("alpha_{} = {}", k, a.real().to_string_radix(10, Some(30)));
    }
    println!("N eta_k - eta_(k-1), log2: {:?}", rep.log_shift_residual_log2.iter().map(|x| x.round()).collect::<Vec<_>>());
    println!("(sigma_c - 1) eta_k - [k=0] delta, log2: {:?}", rep.sigma_c_residual_log2.iter().map(|x| x.round()).collect::<Vec<_>>());
    let mu: Vec<String> = rep.mu_rational.iter().map(|q| q.as_ref().map(|x| x.to_string()).unwrap_or("?".into())).collect();
    println!("delta = sum mu_k eta_k with mu = {:?}", mu);
}
