//! Text syntax for basic elements.
//!
//! ```text
//! expr   = term (("+" | "-") term)*
//! term   = factor ("*" factor)*
//! factor = number | "-" factor | "(" expr ")"
//!        | "iota" "(" dexpr ")" | "sigma" "(" fexpr ")"
//!        | ("liehat" | "lietilde") "(" fexpr "," expr ")"
//!        | "restrict" "[" number "," number "]" "(" expr ")"
//! dexpr  = [number "*"] datom (("+" | "-") [number "*"] datom)*
//! datom  = "delta(" a ")" | "ddelta(" a "," m ")" | "H" ["(" a ")"] | fname
//! fexpr  = [number "*"] fatom (("+" | "-") [number "*"] fatom)*
//! fatom  = number | fname
//! fname  = ["fn:"] ("sin" | "cos" | "exp" | "x" | "one" | "zero")
//! ```
//! A bare number in `expr` is the constant `σ(c)`; vector fields are `fexpr`
//! coefficients of `∂`.

use std::fmt;

use crate::basic::BasicElement;
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::smooth::{Domain, SmoothFn, VectorField};

const FUNCTIONS: [&str; 6] = ["sin", "cos", "exp", "x", "one", "zero"];

#[derive(Debug, Clone, PartialEq)]
pub enum DAtom {
    Delta(f64),
    DDelta(f64, usize),
    Heaviside(Option<f64>),
    Density(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum FAtom {
    Const,
    Named(String),
}

/// `Σ c_i atom_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lin<A>(pub Vec<(f64, A)>);

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Iota(Lin<DAtom>),
    Sigma(Lin<FAtom>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    LieHat(Lin<FAtom>, Box<Expr>),
    LieTilde(Lin<FAtom>, Box<Expr>),
    Restrict(f64, f64, Box<Expr>),
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

fn err(pos: usize, msg: impl Into<String>) -> Error {
    Error::Parse { pos, msg: msg.into() }
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let t = self.rest();
        self.pos += t.len() - t.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<()> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(err(self.pos, format!("expected '{s}'")))
        }
    }

    fn ident(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let t = self.rest();
        let n = t.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == ':')).unwrap_or(t.len());
        if n == 0 || !t.starts_with(|c: char| c.is_ascii_alphabetic()) {
            return None;
        }
        self.pos += n;
        Some(&t[..n])
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let t = self.rest();
        let mut n = 0;
        let b = t.as_bytes();
        if n < b.len() && (b[n] == b'-' || b[n] == b'+') {
            n += 1;
        }
        while n < b.len() && (b[n].is_ascii_digit() || b[n] == b'.') {
            n += 1;
        }
        if n < b.len() && (b[n] == b'e' || b[n] == b'E') {
            let mut m = n + 1;
            if m < b.len() && (b[m] == b'-' || b[m] == b'+') {
                m += 1;
            }
            if m < b.len() && b[m].is_ascii_digit() {
                n = m;
                while n < b.len() && b[n].is_ascii_digit() {
                    n += 1;
                }
            }
        }
        let v = t[..n].parse::<f64>().map_err(|_| err(self.pos, "expected a number"))?;
        self.pos += n;
        Ok(v)
    }

    fn starts_number(&mut self) -> bool {
        matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == '.')
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat("+") {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat("-") {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        while self.eat("*") {
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.eat("-") {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        if self.eat("(") {
            let e = self.expr()?;
            self.expect(")")?;
            return Ok(e);
        }
        if self.starts_number() {
            return Ok(Expr::Num(self.number()?));
        }
        let at = self.pos;
        match self.ident() {
            Some("iota") => {
                self.expect("(")?;
                let d = self.lin(Self::datom, None)?;
                self.expect(")")?;
                Ok(Expr::Iota(d))
            }
            Some("sigma") => {
                self.expect("(")?;
                let f = self.lin(Self::fatom, Some(FAtom::Const))?;
                self.expect(")")?;
                Ok(Expr::Sigma(f))
            }
            Some(w @ ("liehat" | "lietilde")) => {
                self.expect("(")?;
                let x = self.lin(Self::fatom, Some(FAtom::Const))?;
                self.expect(",")?;
                let e = Box::new(self.expr()?);
                self.expect(")")?;
                Ok(if w == "liehat" { Expr::LieHat(x, e) } else { Expr::LieTilde(x, e) })
            }
            Some("restrict") => {
                self.expect("[")?;
                let a = self.number()?;
                self.expect(",")?;
                let b = self.number()?;
                self.expect("]")?;
                self.expect("(")?;
                let e = self.expr()?;
                self.expect(")")?;
                Ok(Expr::Restrict(a, b, Box::new(e)))
            }
            Some(w) => Err(err(at, format!("unknown operator '{w}'"))),
            None => Err(err(at, "expected an expression")),
        }
    }

    /// `constant` is the atom a bare number stands for, if any.
    fn lin<A: Clone>(&mut self, atom: fn(&mut Self) -> Result<A>, constant: Option<A>) -> Result<Lin<A>> {
        let mut terms = Vec::new();
        let mut sign = if self.eat("-") { -1.0 } else { 1.0 };
        loop {
            let mut c = sign;
            let a = if self.starts_number() {
                let save = self.pos;
                let v = self.number()?;
                if self.eat("*") {
                    c *= v;
                    atom(self)?
                } else if let Some(a) = constant.clone() {
                    c *= v;
                    a
                } else {
                    return Err(err(save, "a number must multiply an atom here"));
                }
            } else {
                atom(self)?
            };
            terms.push((c, a));
            sign = if self.eat("+") {
                1.0
            } else if self.eat("-") {
                -1.0
            } else {
                return Ok(Lin(terms));
            };
        }
    }

    fn datom(&mut self) -> Result<DAtom> {
        let at = self.pos;
        match self.ident() {
            Some("delta") => {
                self.expect("(")?;
                let a = self.number()?;
                self.expect(")")?;
                Ok(DAtom::Delta(a))
            }
            Some("ddelta") => {
                self.expect("(")?;
                let a = self.number()?;
                self.expect(",")?;
                let m = self.number()?;
                self.expect(")")?;
                if m < 0.0 || m.fract() != 0.0 {
                    return Err(err(at, "derivative order must be a nonnegative integer"));
                }
                Ok(DAtom::DDelta(a, m as usize))
            }
            Some("H") => {
                if self.eat("(") {
                    let a = self.number()?;
                    self.expect(")")?;
                    Ok(DAtom::Heaviside(Some(a)))
                } else {
                    Ok(DAtom::Heaviside(None))
                }
            }
            Some(w) => Ok(DAtom::Density(fname(w, at)?)),
            None => Err(err(at, "expected a distribution")),
        }
    }

    fn fatom(&mut self) -> Result<FAtom> {
        let at = self.pos;
        match self.ident() {
            Some(w) => Ok(FAtom::Named(fname(w, at)?)),
            None => Err(err(at, "expected a function")),
        }
    }
}

fn fname(w: &str, at: usize) -> Result<String> {
    let name = w.strip_prefix("fn:").unwrap_or(w);
    if FUNCTIONS.contains(&name) {
        Ok(name.to_string())
    } else {
        Err(err(at, format!("unknown function '{name}'")))
    }
}

pub fn parse_expr(text: &str) -> Result<Expr> {
    let mut p = Parser { src: text, pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(err(p.pos, "unexpected trailing input"));
    }
    Ok(e)
}

fn named(name: &str, domain: &Domain) -> SmoothFn {
    let d = domain.clone();
    match name {
        "sin" => SmoothFn::sin(d),
        "cos" => SmoothFn::cos(d),
        "exp" => SmoothFn::exp(d),
        "x" => SmoothFn::identity(d),
        "one" => SmoothFn::constant(1.0, d),
        _ => SmoothFn::zero(d),
    }
}

impl Lin<FAtom> {
    pub fn build(&self, domain: &Domain) -> Result<SmoothFn> {
        let mut acc = SmoothFn::zero(domain.clone());
        for (c, a) in &self.0 {
            let f = match a {
                FAtom::Const => SmoothFn::constant(1.0, domain.clone()),
                FAtom::Named(n) => named(n, domain),
            };
            acc = if acc.constant_value() == Some(0.0) { f.scale(*c) } else { acc.linear_combination(1.0, &f, *c)? };
        }
        Ok(match acc.constant_value() {
            Some(v) => SmoothFn::constant(v, domain.clone()),
            None => acc,
        })
    }
}

impl Lin<DAtom> {
    pub fn build(&self, domain: &Domain) -> Result<Distribution> {
        let mut acc = Distribution::zero(domain.clone());
        for (c, a) in &self.0 {
            let u = match a {
                DAtom::Delta(p) => Distribution::delta(*p, domain.clone())?,
                DAtom::DDelta(p, m) => Distribution::delta_derivative(*p, *m, domain.clone())?,
                DAtom::Heaviside(p) => Distribution::heaviside_at(p.unwrap_or(0.0), domain.clone())?,
                DAtom::Density(n) => Distribution::regular(named(n, domain)),
            };
            acc = acc.add(&u.scale(*c))?;
        }
        Ok(acc)
    }
}

impl Expr {
    /// The basic element on `domain`.
    pub fn build(&self, domain: &Domain) -> Result<BasicElement> {
        Ok(match self {
            Expr::Num(c) => BasicElement::constant(*c, domain),
            Expr::Iota(d) => BasicElement::iota(&d.build(domain)?),
            Expr::Sigma(f) => BasicElement::sigma(&f.build(domain)?),
            Expr::Add(a, b) => a.build(domain)?.add(&b.build(domain)?)?,
            Expr::Sub(a, b) => a.build(domain)?.sub(&b.build(domain)?)?,
            Expr::Mul(a, b) => match (&**a, &**b) {
                (Expr::Num(c), e) | (e, Expr::Num(c)) => e.build(domain)?.scale(*c),
                _ => a.build(domain)?.mul(&b.build(domain)?)?,
            },
            Expr::Neg(a) => a.build(domain)?.scale(-1.0),
            Expr::LieHat(x, e) => e.build(domain)?.lie_hat(&VectorField::new(x.build(domain)?)),
            Expr::LieTilde(x, e) => e.build(domain)?.lie_tilde(&VectorField::new(x.build(domain)?)),
            Expr::Restrict(a, b, e) => e.build(domain)?.restrict(&Domain::interval(*a, *b)?)?,
        })
    }
}

fn write_lin<A>(f: &mut fmt::Formatter<'_>, lin: &Lin<A>, atom: impl Fn(&A) -> Option<String>) -> fmt::Result {
    for (i, (c, a)) in lin.0.iter().enumerate() {
        let (sign, mag) = if *c < 0.0 { ("-", -c) } else { ("+", *c) };
        if i > 0 {
            write!(f, " {sign} ")?;
        } else if sign == "-" {
            f.write_str("-")?;
        }
        match atom(a) {
            None => write!(f, "{mag:?}")?,
            Some(s) if mag == 1.0 => f.write_str(&s)?,
            Some(s) => write!(f, "{mag:?}*{s}")?,
        }
    }
    Ok(())
}

impl fmt::Display for DAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DAtom::Delta(a) => write!(f, "delta({a:?})"),
            DAtom::DDelta(a, m) => write!(f, "ddelta({a:?},{m})"),
            DAtom::Heaviside(None) => f.write_str("H"),
            DAtom::Heaviside(Some(a)) => write!(f, "H({a:?})"),
            DAtom::Density(n) => write!(f, "fn:{n}"),
        }
    }
}

fn fatom_str(a: &FAtom) -> Option<String> {
    match a {
        FAtom::Const => None,
        FAtom::Named(n) => Some(format!("fn:{n}")),
    }
}

impl Expr {
    fn prec(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) => 2,
            Expr::Num(c) if *c < 0.0 => 1,
            _ => 3,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.prec() < min {
            f.write_str("(")?;
            self.write_at(f, 0)?;
            return f.write_str(")");
        }
        match self {
            Expr::Num(c) => write!(f, "{c:?}"),
            Expr::Iota(d) => {
                f.write_str("iota(")?;
                write_lin(f, d, |a| Some(a.to_string()))?;
                f.write_str(")")
            }
            Expr::Sigma(s) => {
                f.write_str("sigma(")?;
                write_lin(f, s, fatom_str)?;
                f.write_str(")")
            }
            Expr::Add(a, b) => {
                a.write_at(f, 1)?;
                f.write_str(" + ")?;
                b.write_at(f, 2)
            }
            Expr::Sub(a, b) => {
                a.write_at(f, 1)?;
                f.write_str(" - ")?;
                b.write_at(f, 2)
            }
            Expr::Mul(a, b) => {
                a.write_at(f, 2)?;
                f.write_str(" * ")?;
                b.write_at(f, 3)
            }
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.write_at(f, 3)
            }
            Expr::LieHat(x, e) | Expr::LieTilde(x, e) => {
                f.write_str(if matches!(self, Expr::LieHat(..)) { "liehat(" } else { "lietilde(" })?;
                write_lin(f, x, fatom_str)?;
                f.write_str(", ")?;
                e.write_at(f, 0)?;
                f.write_str(")")
            }
            Expr::Restrict(a, b, e) => {
                write!(f, "restrict[{a:?},{b:?}](")?;
                e.write_at(f, 0)?;
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basic::Chain;

    fn dom() -> Domain {
        Domain::interval(-2.0, 2.0).unwrap()
    }

    #[test]
    fn spec_examples() {
        let e = parse_expr("iota(delta(0)) * iota(delta(0))").unwrap();
        assert!(matches!(&e, Expr::Mul(a, b) if matches!(**a, Expr::Iota(_)) && matches!(**b, Expr::Iota(_))));
        assert_eq!(e.build(&dom()).unwrap().tag().chain, Chain::Pi);
        let s = parse_expr("sigma(fn:sin)").unwrap();
        assert!(s.build(&dom()).unwrap().as_sigma().is_some());
        let t = parse_expr("lietilde(1, iota(delta(0)))").unwrap();
        assert_eq!(t.build(&dom()).unwrap().tag().chain, Chain::Loc);
    }

    #[test]
    fn printer_round_trips() {
        for src in [
            "iota(delta(0)) * iota(delta(0))",
            "iota(fn:sin) - sigma(sin)",
            "2 * iota(H) * iota(H) - iota(H)",
            "-(iota(delta(-1)) + 0.5*iota(ddelta(0.25, 2)))",
            "liehat(x + 2, iota(H(0.5) - 3*delta(1)))",
            "restrict[0.5,2](iota(delta(0)) * sigma(-1.5*exp + cos))",
            "sigma(2 + x) * (iota(fn:cos) + 1e-3)",
        ] {
            let e = parse_expr(src).unwrap();
            let printed = e.to_string();
            assert_eq!(parse_expr(&printed).unwrap(), e, "{src} -> {printed}");
        }
    }

    #[test]
    fn errors_carry_positions() {
        match parse_expr("iota(delta(0)) * foo(1)") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 17),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_expr("iota(delta(0)"), Err(Error::Parse { pos: 13, .. })));
        assert!(matches!(parse_expr("sigma(tan)"), Err(Error::Parse { pos: 6, .. })));
        assert!(matches!(parse_expr("iota(2)"), Err(Error::Parse { .. })));
    }
}
