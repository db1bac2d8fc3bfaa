//! Exact Frobenius coefficients of the Apery operator and a value of φ_{0,0}.
use frobkit::frobenius::{eval_frobenius, frobenius_table, principal_log, residual_check, Exponent, TableMode};
use frobkit::parser::parse_op;
use rug::{Complex, Rational};

fn main() {
    let l = parse_op("D^3 - t*(2*D+1)*(17*D^2+17*D+5) + t^2*(D+1)^3").unwrap();
    let table = frobenius_table(&l, &Exponent::Exact(Rational::new()), 2, 200, 256, TableMode::Exact).unwrap();
    print!("a_n:");
    for n in 0..8 {
        print!(" {}", table.exact_coeff(n, 0).unwrap());
    }
    println!();
    println!("a_5^(1) = {}, a_5^(2)/2 = {}", table.exact_coeff(5, 1).unwrap(), table.exact_coeff(5, 2).unwrap());
    let r = residual_check(&l, &table);
    println!("recurrence residual exactly zero: {}", r.exact_zero);
    let t = Complex::with_val(256, 0.01);
    let v = eval_frobenius(&table, 0, &t, &principal_log(&t)).unwrap();
    println!("phi_(0,0)(0.01) = {}", v.value.real().to_string_radix(10, Some(40)));
}
