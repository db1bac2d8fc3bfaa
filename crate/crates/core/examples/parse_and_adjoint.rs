//! Parse an operator, show its theta form, adjoint and indicial data.
use frobkit::parser::parse_op;

fn main() {
    let src = std::env::args().nth(1).unwrap_or_else(|| "D^3 - t*(2*D+1)*(17*D^2+17*D+5) + t^2*(D+1)^3".into());
    let l = parse_op(&src).expect("parse");
    println!("L        = {}", l);
    for (j, p) in l.theta_form().p.iter().enumerate() {
        println!("p_{}(D)   = {}", j, p.to_string_var("D"));
    }
    let a = l.adjoint();
    println!("adjoint  = {}", a);
    println!("involution holds: {}", a.adjoint() == l);
    let ind = l.indicial(128).expect("indicial");
    println!("I(s)     = {}", ind.poly.to_string_var("s"));
    println!("{}", serde_json::to_string(&ind.to_json(20)).unwrap());
}
