use frobkit::arith::{binom, cabs_log2};
use frobkit::catalog::entry;
use frobkit::frobenius::{frobenius_table, Exponent, TableMode};
use frobkit::gamma::{GammaConfig, GammaModel};
use frobkit::limits::{hypergeometric_kappa, hypergeometric_operator, kappa_limits};
use frobkit::monodromy::{kappa_via_monodromy, PathSpec};
use frobkit::parser::parse_op;
use frobkit::qstructure::invert_kappa;
use frobkit::recognition::{recognize, ValueSource};
use rug::{Complex, Float, Rational};

fn rel_log2(a: &Complex, b: &Complex) -> f64 {
    cabs_log2(&Complex::with_val(a.prec().0, a - b)) - cabs_log2(b).max(0.0)
}

#[test]
fn apery_numbers_match_binomial_sum() {
    let e = entry("apery", 128).unwrap();
    let t = frobenius_table(&e.op, &Exponent::Exact(Rational::new()), 0, 60, 64, TableMode::Exact).unwrap();
    for n in 0..=60u32 {
        let mut s = Rational::new();
        for k in 0..=n {
            let b = binom(n, k) * binom(n + k, k);
            s += Rational::from(&b * &b);
        }
        assert_eq!(t.exact_coeff(n as usize, 0).unwrap(), &s, "n = {}", n);
    }
}

#[test]
fn beauville_numbers_match_binomial_sum() {
    let e = entry("beauville", 128).unwrap();
    let t = frobenius_table(&e.op, &Exponent::Exact(Rational::new()), 0, 40, 64, TableMode::Exact).unwrap();
    for n in 0..=40u32 {
        let mut s = Rational::new();
        for k in 0..=n {
            s += binom(n, k) * binom(n, k) * binom(n + k, k);
        }
        assert_eq!(t.exact_coeff(n as usize, 0).unwrap(), &s, "n = {}", n);
    }
}

#[test]
fn hypergeometric_first_derivative_is_a_harmonic_sum() {
    // a_n(s) = Π (s+α)_n/(s+β)_n, so a_n'(0)/a_n(0) = Σ_j Σ_{m<n} 1/(α_j+m) − 1/(β_j+m)
    let q = |a: i64, b: i64| Rational::from((a, b));
    let (al, be) = (vec![q(1, 3), q(1, 2), q(3, 4)], vec![q(1, 1), q(5, 6), q(1, 1)]);
    let l = hypergeometric_operator(&al, &be);
    let t = frobenius_table(&l, &Exponent::Exact(Rational::new()), 1, 25, 64, TableMode::Exact).unwrap();
    let mut a = Rational::from(1);
    let mut h = Rational::new();
    for n in 0..=25usize {
        assert_eq!(t.exact_coeff(n, 0).unwrap(), &a);
        assert_eq!(t.exact_coeff(n, 1).unwrap(), &Rational::from(&a * &h));
        for j in 0..3 {
            let m = Rational::from(n as i64);
            a *= Rational::from(&al[j] + &m) / Rational::from(&be[j] + &m);
            h += Rational::from(1) / Rational::from(&al[j] + &m) - Rational::from(1) / Rational::from(&be[j] + &m);
        }
    }
}

#[test]
fn legendre_monodromy_matches_gamma_ratio_oracle() {
    let prec = 192;
    let e = entry("gauss-legendre", prec + 64).unwrap();
    let (al, be) = e.hypergeometric.clone().unwrap();
    let oracle = hypergeometric_kappa(&al, &be, &Rational::new(), 4, prec).unwrap();
    let md = kappa_via_monodromy(&e.op, &Rational::new(), 4, &PathSpec::direct(&e.op, &e.c, prec + 64), prec).unwrap();
    let lim = kappa_limits(&e.op, &Rational::new(), 4, 600, 8, prec).unwrap();
    for k in 0..=4 {
        let o = Complex::with_val(prec, &oracle.coeffs[k] / &oracle.coeffs[0]);
        let m = Complex::with_val(prec, &md.kappa.coeffs[k] / &md.kappa.coeffs[0]);
        assert!(rel_log2(&m, &o) < -150.0, "monodromy k = {}", k);
        assert!(rel_log2(&lim.kappa_ratios[k], &o) < -60.0, "limit k = {}", k);
    }
}

#[test]
fn apery_kappa_closed_forms_and_computed_kappa5() {
    let prec = 192;
    let e = entry("apery", prec + 64).unwrap();
    let md = kappa_via_monodromy(&e.op, &Rational::new(), 5, &PathSpec::direct(&e.op, &e.c, prec + 64), prec).unwrap();
    for k in 0..=4 {
        let c = Complex::with_val(prec, e.kappa_closed[k].value(prec));
        assert!(cabs_log2(&Complex::with_val(prec, &md.kappa.coeffs[k] - &c)) < -150.0, "k = {}", k);
    }
    // the computed κ_5 is (7/3)ζ(5) − (17/3)ζ(2)ζ(3)
    let z = |k: u32| Float::with_val(prec, Float::with_val(prec, k).zeta_ref());
    let k5 = Float::with_val(prec, z(5) * 7u32) / 3u32 - Float::with_val(prec, z(2) * z(3)) * 17u32 / 3u32;
    assert!(rel_log2(&md.kappa.coeffs[5], &Complex::with_val(prec, k5)) < -150.0);
}

#[test]
fn alpha_series_inverts_kappa_numerically() {
    let prec = 160;
    let e = entry("beauville", prec + 64).unwrap();
    let md = kappa_via_monodromy(&e.op, &Rational::new(), 4, &PathSpec::direct(&e.op, &e.c, prec + 64), prec).unwrap();
    let a = invert_kappa(&md.kappa).unwrap();
    let prod = frobkit::jet::Jet::from_coeffs(a.alpha).mul(&md.kappa);
    assert!(rel_log2(&prod.coeffs[0], &Complex::with_val(prec, 1)) < -140.0);
    for k in 1..=4 {
        assert!(cabs_log2(&prod.coeffs[k]) < -140.0);
    }
}

#[test]
fn polylog1_gamma_is_minus_two_pi_i_times_q() {
    // δ ∝ 1 for the first polylogarithm: Γ(s) ∝ (e^{2πis} − 1)/s up to λe^{2πims}
    let prec = 160;
    let e = entry("polylog1", prec + 64).unwrap();
    let m = GammaModel::new(&GammaConfig::new(&e.op, &e.c, prec)).unwrap();
    assert_eq!(m.r.exact, Some(vec![Rational::from(-1), Rational::from(1)]));
    let s1 = Complex::with_val(prec + 64, (1.3, 0.2));
    let (j1, _) = m.mellin(&s1).unwrap();
    let s2 = Complex::with_val(prec + 64, (2.6, -0.5));
    let (j2, _) = m.mellin(&s2).unwrap();
    let a = Complex::with_val(prec + 64, &j1 * &s1);
    let b = Complex::with_val(prec + 64, &j2 * &s2);
    assert!(rel_log2(&a, &b) < -140.0);
}

#[test]
fn parser_accepts_equivalent_forms() {
    let a = parse_op("D^3 - t*(2*D+1)*(17*D^2+17*D+5) + t^2*(D+1)^3").unwrap();
    let b = parse_op("(1 - 34*t + t^2)*D^3 + (3*t^2 - 51*t)*D^2 + (3*t^2 - 27*t)*D + t^2 - 5*t").unwrap();
    assert_eq!(a, b);
}

#[test]
fn random_decoys_are_not_recognized() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let prec = 199;
    for _ in 0..10 {
        let digits: String = (0..60).map(|_| char::from(b'0' + rng.gen_range(0..10u8))).collect();
        let x = Float::with_val(prec, Float::parse(format!("-3.{}", digits)).unwrap());
        let r = recognize(&ValueSource::Fixed(x), 2, None, &[], prec);
        assert!(!matches!(r, Ok(Some(_))), "{:?}", r.map(|o| o.map(|x| x.relation)));
    }
}
