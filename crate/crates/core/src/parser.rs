//! Text → operator: tokenizer, recursive-descent parser and normal form.

use crate::arith::parse_exact_real;
use crate::error::{FrobError, Result};
use crate::op::CanonicalOp;
use crate::poly::QPoly;
use rug::Rational;

/// Expression tree over rationals, `t` and `D`.
#[derive(Clone, Debug, PartialEq)]
pub enum OperatorExpr {
    Num(Rational),
    T,
    D,
    Neg(Box<OperatorExpr>),
    Add(Box<OperatorExpr>, Box<OperatorExpr>),
    Sub(Box<OperatorExpr>, Box<OperatorExpr>),
    Mul(Box<OperatorExpr>, Box<OperatorExpr>),
    Div(Box<OperatorExpr>, Box<OperatorExpr>),
    Pow(Box<OperatorExpr>, u32),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    T,
    D,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '0'..='9' | '.' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                let q = parse_exact_real(&s).ok_or(FrobError::Syntax { pos, msg: format!("bad number '{}'", s) })?;
                out.push((Tok::Num(q), pos));
                i = j;
                continue;
            }
            't' => out.push((Tok::T, pos)),
            'D' => out.push((Tok::D, pos)),
            '+' => out.push((Tok::Plus, pos)),
            '-' | '−' => out.push((Tok::Minus, pos)),
            '*' | '·' => out.push((Tok::Star, pos)),
            '/' => out.push((Tok::Slash, pos)),
            '^' => out.push((Tok::Caret, pos)),
            '(' => out.push((Tok::LParen, pos)),
            ')' => out.push((Tok::RParen, pos)),
            _ => return Err(FrobError::Syntax { pos, msg: format!("unexpected character '{}'", c) }),
        }
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    i: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.0)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.i).map(|t| t.1).unwrap_or(self.end)
    }

    fn expr(&mut self) -> Result<OperatorExpr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.i += 1;
                    lhs = OperatorExpr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.i += 1;
                    lhs = OperatorExpr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<OperatorExpr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.i += 1;
                    lhs = OperatorExpr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Slash) => {
                    self.i += 1;
                    let pos = self.pos();
                    let rhs = self.unary()?;
                    if rhs.contains_d() {
                        return Err(FrobError::DenominatorContainsD { pos });
                    }
                    lhs = OperatorExpr::Div(Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Num(_)) | Some(Tok::T) | Some(Tok::D) | Some(Tok::LParen) => {
                    return Err(FrobError::Syntax { pos: self.pos(), msg: "implicit multiplication is not allowed; use '*'".into() });
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<OperatorExpr> {
        if self.peek() == Some(&Tok::Minus) {
            self.i += 1;
            return Ok(OperatorExpr::Neg(Box::new(self.unary()?)));
        }
        if self.peek() == Some(&Tok::Plus) {
            self.i += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<OperatorExpr> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.i += 1;
            let pos = self.pos();
            let e = self.exponent(pos)?;
            if self.peek() == Some(&Tok::Caret) {
                return Err(FrobError::Syntax { pos: self.pos(), msg: "chained exponents need parentheses".into() });
            }
            return Ok(OperatorExpr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn exponent(&mut self, pos: usize) -> Result<u32> {
        let bad = |msg: &str| FrobError::Syntax { pos, msg: msg.to_string() };
        match self.peek().cloned() {
            Some(Tok::Num(q)) => {
                self.i += 1;
                if q.denom() != &1 {
                    return Err(bad("exponent must be a non-negative integer"));
                }
                q.numer().to_u32().ok_or_else(|| bad("exponent too large"))
            }
            Some(Tok::LParen) => {
                self.i += 1;
                let inner = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(FrobError::Syntax { pos: self.pos(), msg: "expected ')'".into() });
                }
                self.i += 1;
                let v = inner.constant_value().ok_or_else(|| bad("exponent must be a constant"))?;
                if v.denom() != &1 || v < 0 {
                    return Err(bad("exponent must be a non-negative integer"));
                }
                v.numer().to_u32().ok_or_else(|| bad("exponent too large"))
            }
            Some(Tok::Minus) => Err(bad("exponent must be a non-negative integer")),
            _ => Err(bad("expected exponent")),
        }
    }

    fn atom(&mut self) -> Result<OperatorExpr> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Num(q)) => {
                self.i += 1;
                Ok(OperatorExpr::Num(q))
            }
            Some(Tok::T) => {
                self.i += 1;
                Ok(OperatorExpr::T)
            }
            Some(Tok::D) => {
                self.i += 1;
                Ok(OperatorExpr::D)
            }
            Some(Tok::LParen) => {
                self.i += 1;
                let e = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(FrobError::Syntax { pos: self.pos(), msg: "expected ')'".into() });
                }
                self.i += 1;
                Ok(e)
            }
            Some(t) => Err(FrobError::Syntax { pos, msg: format!("unexpected token {:?}", t) }),
            None => Err(FrobError::Syntax { pos, msg: "unexpected end of input".into() }),
        }
    }
}

/// Parses an operator expression. Multiplication must be explicit.
pub fn parse(text: &str) -> Result<OperatorExpr> {
    if text.trim().is_empty() {
        return Err(FrobError::Syntax { pos: 0, msg: "empty input".into() });
    }
    let toks = tokenize(text)?;
    let mut p = Parser { toks, i: 0, end: text.chars().count() };
    let e = p.expr()?;
    if p.i != p.toks.len() {
        return Err(FrobError::Syntax { pos: p.pos(), msg: "unexpected trailing input".into() });
    }
    Ok(e)
}

/// Parses and normalizes in one step.
pub fn parse_op(text: &str) -> Result<CanonicalOp> {
    Ok(normalize(&parse(text)?))
}

impl OperatorExpr {
    pub fn contains_d(&self) -> bool {
        use OperatorExpr::*;
        match self {
            D => true,
            Num(_) | T => false,
            Neg(a) | Pow(a, _) => a.contains_d(),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => a.contains_d() || b.contains_d(),
        }
    }

    fn constant_value(&self) -> Option<Rational> {
        use OperatorExpr::*;
        Some(match self {
            Num(q) => q.clone(),
            T | D => return None,
            Neg(a) => -a.constant_value()?,
            Add(a, b) => a.constant_value()? + b.constant_value()?,
            Sub(a, b) => a.constant_value()? - b.constant_value()?,
            Mul(a, b) => a.constant_value()? * b.constant_value()?,
            Div(a, b) => {
                let d = b.constant_value()?;
                if d == 0 {
                    return None;
                }
                a.constant_value()? / d
            }
            Pow(a, e) => {
                let v = a.constant_value()?;
                let mut r = Rational::from(1);
                for _ in 0..*e {
                    r *= &v;
                }
                r
            }
        })
    }

    /// Applies the expression, read as an operator word, to a polynomial in t.
    /// Division is supported only by nonzero constants.
    pub fn apply_to_poly(&self, f: &QPoly) -> Option<QPoly> {
        use OperatorExpr::*;
        Some(match self {
            Num(q) => f.scale(q),
            T => f.shift_up(1),
            D => f.theta_derivative(),
            Neg(a) => a.apply_to_poly(f)?.neg(),
            Add(a, b) => a.apply_to_poly(f)?.add(&b.apply_to_poly(f)?),
            Sub(a, b) => a.apply_to_poly(f)?.sub(&b.apply_to_poly(f)?),
            Mul(a, b) => a.apply_to_poly(&b.apply_to_poly(f)?)?,
            Div(a, b) => {
                let d = b.constant_value()?;
                if d == 0 {
                    return None;
                }
                a.apply_to_poly(f)?.scale(&(Rational::from(1) / d))
            }
            Pow(a, e) => {
                let mut g = f.clone();
                for _ in 0..*e {
                    g = a.apply_to_poly(&g)?;
                }
                g
            }
        })
    }
}

/// Rational function in t, kept reduced with monic denominator.
#[derive(Clone, Debug, PartialEq)]
struct RatFn {
    num: QPoly,
    den: QPoly,
}

impl RatFn {
    fn poly(p: QPoly) -> Self {
        RatFn { num: p, den: QPoly::one() }
    }

    fn zero() -> Self {
        Self::poly(QPoly::zero())
    }

    fn reduce(num: QPoly, den: QPoly) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        let g = QPoly::gcd(&num, &den);
        let (mut n, mut d) = (num.div_rem(&g).0, den.div_rem(&g).0);
        let l = d.leading();
        n = n.scale(&(Rational::from(1) / &l));
        d = d.monic();
        RatFn { num: n, den: d }
    }

    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn add(&self, o: &Self) -> Self {
        Self::reduce(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den))
    }

    fn mul(&self, o: &Self) -> Self {
        Self::reduce(self.num.mul(&o.num), self.den.mul(&o.den))
    }

    fn scale(&self, q: &Rational) -> Self {
        Self::reduce(self.num.scale(q), self.den.clone())
    }

    /// Theta derivative t·d/dt.
    fn theta(&self) -> Self {
        let n = self.num.theta_derivative().mul(&self.den).sub(&self.num.mul(&self.den.theta_derivative()));
        Self::reduce(n, self.den.mul(&self.den))
    }
}

/// Σ_b f_b(t) D^b with rational-function coefficients.
#[derive(Clone, Debug)]
struct RatOp {
    c: Vec<RatFn>,
}

impl RatOp {
    fn coeff(&self, b: usize) -> RatFn {
        self.c.get(b).cloned().unwrap_or_else(RatFn::zero)
    }

    fn scalar(q: Rational) -> Self {
        RatOp { c: vec![RatFn::poly(QPoly::constant(q))] }
    }

    fn add(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        RatOp { c: (0..n).map(|b| self.coeff(b).add(&o.coeff(b))).collect() }
    }

    fn neg(&self) -> Self {
        RatOp { c: self.c.iter().map(|f| f.scale(&Rational::from(-1))).collect() }
    }

    /// (f D^b)(g D^e) = f Σ_i C(b,i) (θ^{b-i} g) D^{i+e}.
    fn mul(&self, o: &Self) -> Self {
        let n = self.c.len() + o.c.len();
        let mut out = vec![RatFn::zero(); n.max(1)];
        for (b, f) in self.c.iter().enumerate() {
            if f.is_zero() {
                continue;
            }
            for (e, g) in o.c.iter().enumerate() {
                if g.is_zero() {
                    continue;
                }
                let mut derivs = vec![g.clone()];
                for k in 1..=b {
                    let next = derivs[k - 1].theta();
                    derivs.push(next);
                }
                for i in 0..=b {
                    let w = crate::arith::binom(b as u32, i as u32);
                    let term = f.mul(&derivs[b - i]).scale(&w);
                    out[i + e] = out[i + e].add(&term);
                }
            }
        }
        RatOp { c: out }
    }

    fn inverse_function(&self) -> Option<Self> {
        // only order-0 operators (functions of t) are invertible here
        if self.c.iter().skip(1).any(|f| !f.is_zero()) {
            return None;
        }
        let f = self.coeff(0);
        if f.is_zero() {
            return None;
        }
        Some(RatOp { c: vec![RatFn::reduce(f.den.clone(), f.num.clone())] })
    }
}

fn eval(e: &OperatorExpr) -> Result<RatOp> {
    use OperatorExpr::*;
    Ok(match e {
        Num(q) => RatOp::scalar(q.clone()),
        T => RatOp { c: vec![RatFn::poly(QPoly::from_i64(&[0, 1]))] },
        D => RatOp { c: vec![RatFn::zero(), RatFn::poly(QPoly::one())] },
        Neg(a) => eval(a)?.neg(),
        Add(a, b) => eval(a)?.add(&eval(b)?),
        Sub(a, b) => eval(a)?.add(&eval(b)?.neg()),
        Mul(a, b) => eval(a)?.mul(&eval(b)?),
        Div(a, b) => {
            if b.contains_d() {
                return Err(FrobError::DenominatorContainsD { pos: 0 });
            }
            let inv = eval(b)?.inverse_function().ok_or(FrobError::Syntax { pos: 0, msg: "division by zero".into() })?;
            eval(a)?.mul(&inv)
        }
        Pow(a, k) => {
            let base = eval(a)?;
            let mut r = RatOp::scalar(Rational::from(1));
            for _ in 0..*k {
                r = base.mul(&r);
            }
            r
        }
    })
}

/// Moves every D to the right of every t, collects terms, clears t-denominators on the left.
pub fn normalize(expr: &OperatorExpr) -> CanonicalOp {
    let r = eval(expr).expect("parsed expressions evaluate");
    let mut lcd = QPoly::one();
    for f in &r.c {
        if !f.is_zero() {
            let g = QPoly::gcd(&lcd, &f.den);
            lcd = lcd.mul(&f.den.div_rem(&g).0);
        }
    }
    let coeffs: Vec<QPoly> = r.c.iter().map(|f| if f.is_zero() { QPoly::zero() } else { f.num.mul(&lcd.div_rem(&f.den).0) }).collect();
    let mut op = CanonicalOp::from_coeffs(coeffs);
    if lcd != QPoly::one() {
        op.left_multiplier = Some(lcd);
    }
    op
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_apery() {
        let l = parse_op("D^3 - t*(34*D^3+51*D^2+27*D+5) + t^2*(D+1)^3").unwrap();
        assert_eq!(l.order(), 3);
        assert_eq!(l.leading(), QPoly::from_i64(&[1, -34, 1]));
    }

    #[test]
    fn single_symbol() {
        assert_eq!(parse("D").unwrap(), OperatorExpr::D);
    }

    #[test]
    fn rejects_fractional_exponent() {
        assert!(matches!(parse("D^(1/2)"), Err(FrobError::Syntax { .. })));
        assert!(matches!(parse("D^-1"), Err(FrobError::Syntax { .. })));
        assert!(matches!(parse("2t"), Err(FrobError::Syntax { .. })));
        assert!(matches!(parse("t*D)"), Err(FrobError::Syntax { .. })));
        assert!(matches!(parse("t/D"), Err(FrobError::DenominatorContainsD { .. })));
        assert!(matches!(parse("t/(1+D)"), Err(FrobError::DenominatorContainsD { pos: 2 })));
    }

    #[test]
    fn commutation() {
        let l = parse_op("D*t").unwrap();
        assert_eq!(l.coeff(1), QPoly::from_i64(&[0, 1]));
        assert_eq!(l.coeff(0), QPoly::from_i64(&[0, 1]));
        let sq = parse_op("(D+1)^2").unwrap();
        assert_eq!(sq.coeff(2), QPoly::one());
        assert_eq!(sq.coeff(1), QPoly::from_i64(&[2]));
        assert_eq!(sq.coeff(0), QPoly::one());
        let c = parse_op("t*D - D*t").unwrap();
        assert_eq!(c.order(), 0);
        assert_eq!(c.coeff(0), QPoly::from_i64(&[0, -1]));
    }

    #[test]
    fn precedence() {
        // -t^2 is -(t^2); 2*D/2 = D
        assert_eq!(parse_op("-t^2").unwrap().coeff(0), QPoly::from_i64(&[0, 0, -1]));
        assert_eq!(parse_op("2*D/2").unwrap(), CanonicalOp::d());
        assert_eq!(parse_op("D^(2)").unwrap(), CanonicalOp::d().pow(2));
    }

    #[test]
    fn clears_t_denominators() {
        // D - t/(1-t)  ->  (1-t) D - t, multiplier recorded
        let l = parse_op("D - t/(1-t)").unwrap();
        assert_eq!(l.coeff(1), QPoly::from_i64(&[-1, 1]));
        assert_eq!(l.coeff(0), QPoly::from_i64(&[0, 1]));
        assert!(l.left_multiplier.is_some());
        // D·(1/t) = (1/t)D - 1/t, cleared by t
        let m = parse_op("D*(1/t)").unwrap();
        assert_eq!(m.coeff(1), QPoly::one());
        assert_eq!(m.coeff(0), QPoly::from_i64(&[-1]));
    }

    #[test]
    fn display_round_trip() {
        let l = parse_op("D^3 - t*(34*D^3+51*D^2+27*D+5) + t^2*(D+1)^3 + (1/2)*t^3").unwrap();
        let again = parse_op(&l.to_string()).unwrap();
        assert_eq!(l, again);
    }
}
