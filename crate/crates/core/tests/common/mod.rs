use frobkit::frobenius::LogSeries;
use frobkit::op::CanonicalOp;
use frobkit::poly::QPoly;
use proptest::prelude::*;
use rug::Rational;

pub fn rational() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(a, b)| Rational::from((a, b)))
}

pub fn qpoly(max_deg: usize) -> impl Strategy<Value = QPoly> {
    prop::collection::vec(rational(), 0..=max_deg + 1).prop_map(QPoly::new)
}

/// Random operators of order ≤ 3 and t-degree ≤ 3.
pub fn operator() -> impl Strategy<Value = CanonicalOp> {
    prop::collection::vec(qpoly(3), 1..=4).prop_map(CanonicalOp::from_coeffs)
}

pub fn log_series(len: usize) -> impl Strategy<Value = LogSeries<Rational>> {
    (rational(), prop::collection::vec(prop::collection::vec(rational(), 1..=3), len..=len)).prop_map(|(e, c)| LogSeries { exponent: e, coeffs: c })
}
