mod common;

use common::{log_series, operator, qpoly, rational};
use frobkit::frobenius::bracket_residual;
use frobkit::op::CanonicalOp;
use frobkit::parser::parse_op;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn adjoint_is_an_involution(l in operator()) {
        prop_assert_eq!(l.adjoint().adjoint(), l);
    }

    #[test]
    fn adjoint_reverses_products(a in operator(), b in operator()) {
        prop_assert_eq!(a.mul(&b).adjoint(), b.adjoint().mul(&a.adjoint()));
    }

    #[test]
    fn adjoint_is_linear(a in operator(), b in operator(), q in rational()) {
        prop_assert_eq!(a.add(&b.scale(&q)).adjoint(), a.adjoint().add(&b.adjoint().scale(&q)));
    }

    #[test]
    fn theta_form_reconstructs(l in operator()) {
        prop_assert_eq!(CanonicalOp::from_theta_form(&l.theta_form()), l);
    }

    #[test]
    fn parser_round_trip(l in operator()) {
        let text = l.to_string();
        prop_assert_eq!(parse_op(&text).unwrap(), l, "{}", text);
    }

    #[test]
    fn json_round_trip(l in operator()) {
        prop_assert_eq!(CanonicalOp::from_json(&l.to_json()).unwrap(), l);
    }

    #[test]
    fn bracket_identity_is_exact(l in operator(), psi in log_series(8), phi in log_series(8)) {
        let r = bracket_residual(&l, &psi, &phi, 6);
        prop_assert!(r.exact_zero, "residual 2^{}", r.max_log2);
    }

    #[test]
    fn action_on_polynomials_is_multiplicative(a in operator(), b in operator(), f in qpoly(4)) {
        prop_assert_eq!(a.mul(&b).apply_to_poly(&f), a.apply_to_poly(&b.apply_to_poly(&f)));
    }
}
