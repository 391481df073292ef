//! Scalar-field expressions over chart coordinates.
//!
//! Grammar (standard precedence, `^` right-associative, binds tighter than
//! unary minus):
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | 'x'<k> | name | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! Coordinates are `x1 .. xd`; `pi` is a builtin constant; any other bare
//! identifier is a named parameter resolved by [`Expr::bind`].

use std::collections::BTreeMap;
use std::fmt;

use crate::dual::Scalar;
use crate::error::{GeomError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
}

impl Func {
    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
        }
    }

    fn apply<T: Scalar>(self, v: T) -> T {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Tan => v.tan(),
            Func::Exp => v.exp(),
            Func::Log => v.ln(),
            Func::Sqrt => v.sqrt(),
            Func::Sinh => v.sinh(),
            Func::Cosh => v.cosh(),
            Func::Tanh => v.tanh(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Zero-based coordinate index (`x1` is `Var(0)`).
    Var(usize),
    Param(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr> {
        let mut p = Parser {
            src: text.as_bytes(),
            pos: 0,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    /// Replaces named parameters by their values; unknown names are errors.
    pub fn bind(&self, params: &BTreeMap<String, f64>) -> Result<Expr> {
        Ok(match self {
            Expr::Param(name) => match params.get(name) {
                Some(&v) => Expr::Num(v),
                None => return Err(GeomError::UnknownIdentifier(name.clone())),
            },
            Expr::Num(_) | Expr::Var(_) => self.clone(),
            Expr::Neg(a) => Expr::Neg(Box::new(a.bind(params)?)),
            Expr::Bin(op, a, b) => Expr::Bin(*op, Box::new(a.bind(params)?), Box::new(b.bind(params)?)),
            Expr::Call(f, a) => Expr::Call(*f, Box::new(a.bind(params)?)),
        })
    }

    /// Largest coordinate index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Var(k) => Some(*k),
            Expr::Num(_) | Expr::Param(_) => None,
            Expr::Neg(a) | Expr::Call(_, a) => a.max_var(),
            Expr::Bin(_, a, b) => match (a.max_var(), b.max_var()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }

    pub fn is_zero_literal(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 0.0)
    }

    /// Evaluates over any carrier. Unbound parameters evaluate to NaN so the
    /// caller's finiteness check reports them.
    pub fn eval<T: Scalar>(&self, x: &[T]) -> T {
        match self {
            Expr::Num(v) => T::cst(*v),
            Expr::Var(k) => x.get(*k).copied().unwrap_or_else(|| T::cst(f64::NAN)),
            Expr::Param(_) => T::cst(f64::NAN),
            Expr::Neg(a) => -a.eval(x),
            Expr::Bin(op, a, b) => {
                let (l, r) = (a.eval(x), b.eval(x));
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => l / r,
                    BinOp::Pow => l.pow(r),
                }
            }
            Expr::Call(f, a) => f.apply(a.eval(x)),
        }
    }

    fn is_atomic(&self) -> bool {
        matches!(self, Expr::Num(_) | Expr::Var(_) | Expr::Param(_) | Expr::Call(..))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
            if e.is_atomic() {
                write!(f, "{e}")
            } else {
                write!(f, "({e})")
            }
        }
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(k) => write!(f, "x{}", k + 1),
            Expr::Param(p) => write!(f, "{p}"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                child(f, a)
            }
            Expr::Bin(op, a, b) => {
                child(f, a)?;
                write!(f, " {} ", op.symbol())?;
                child(f, b)
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> GeomError {
        GeomError::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if c == b'+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if c == b'*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            Some(_) => Err(self.error("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let s = self.src;
        while self.pos < s.len() && (s[self.pos].is_ascii_digit() || s[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < s.len() && (s[self.pos] == b'e' || s[self.pos] == b'E') {
            let mut k = self.pos + 1;
            if k < s.len() && (s[k] == b'+' || s[k] == b'-') {
                k += 1;
            }
            if k < s.len() && s[k].is_ascii_digit() {
                while k < s.len() && s[k].is_ascii_digit() {
                    k += 1;
                }
                self.pos = k;
            }
        }
        let text = std::str::from_utf8(&s[start..self.pos]).unwrap_or_default();
        text.parse::<f64>().map(Expr::Num).map_err(|_| GeomError::Syntax {
            offset: start,
            message: format!("malformed number `{text}`"),
        })
    }

    fn ident(&mut self) -> Result<Expr> {
        let start = self.pos;
        let s = self.src;
        while self.pos < s.len() && (s[self.pos].is_ascii_alphanumeric() || s[self.pos] == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&s[start..self.pos]).unwrap_or_default();
        if let Some(func) = Func::from_name(name) {
            if self.peek() != Some(b'(') {
                return Err(self.error("expected `(` after function name"));
            }
            self.pos += 1;
            let arg = self.expr()?;
            if self.peek() != Some(b')') {
                return Err(self.error("expected `)`"));
            }
            self.pos += 1;
            return Ok(Expr::Call(func, Box::new(arg)));
        }
        if name == "pi" {
            return Ok(Expr::Num(std::f64::consts::PI));
        }
        if let Some(digits) = name.strip_prefix('x') {
            if let Ok(k) = digits.parse::<usize>() {
                if k == 0 {
                    return Err(GeomError::Syntax {
                        offset: start,
                        message: "coordinates are numbered from x1".into(),
                    });
                }
                return Ok(Expr::Var(k - 1));
            }
        }
        Ok(Expr::Param(name.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::Dual;

    #[test]
    fn evaluates_with_precedence() {
        let e = Expr::parse("2 + 3 * 4 ^ 2 / 8").unwrap();
        assert_eq!(e.eval(&[0.0_f64]), 8.0);
        let e = Expr::parse("-2^2").unwrap();
        assert_eq!(e.eval(&[0.0_f64]), -4.0);
        let e = Expr::parse("2^3^2").unwrap();
        assert_eq!(e.eval(&[0.0_f64]), 512.0);
        let e = Expr::parse("2^-1").unwrap();
        assert_eq!(e.eval(&[0.0_f64]), 0.5);
    }

    #[test]
    fn spec_examples() {
        let e = Expr::parse("2 + sin(x1)").unwrap();
        assert_eq!(e.eval(&[0.0_f64]), 2.0);
        let d = e.eval(&[Dual::var(0.0)]);
        // central difference oracle
        let h = 1e-5;
        let fd = (e.eval(&[h]) - e.eval(&[-h])) / (2.0 * h);
        assert!((d.d - fd).abs() < 1e-9);
        assert!((d.d - 1.0).abs() < 1e-15);
        match Expr::parse("2 +") {
            Err(GeomError::Syntax { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn params_and_constants() {
        let e = Expr::parse("c * pi + x2").unwrap();
        assert!(matches!(e.eval(&[0.0_f64, 1.0]), v if v.is_nan()));
        let mut p = BTreeMap::new();
        p.insert("c".to_string(), 2.0);
        let b = e.bind(&p).unwrap();
        assert!((b.eval(&[0.0, 1.0]) - (2.0 * std::f64::consts::PI + 1.0)).abs() < 1e-15);
        assert_eq!(b.max_var(), Some(1));
        assert!(matches!(e.bind(&BTreeMap::new()), Err(GeomError::UnknownIdentifier(_))));
    }

    #[test]
    fn rejects_malformed() {
        assert!(Expr::parse("sin x1").is_err());
        assert!(Expr::parse("(1 + 2").is_err());
        assert!(Expr::parse("1 + $").is_err());
        assert!(Expr::parse("x0").is_err());
        assert!(Expr::parse("").is_err());
    }

    #[test]
    fn print_parse_roundtrip_examples() {
        for s in ["2+sin(x1)", "-(x1 - 2)^-0.5", "a*b/(c+d)", "1e-7 * exp(-x3)", "(-1)^2"] {
            let e = Expr::parse(s).unwrap();
            assert_eq!(Expr::parse(&e.to_string()).unwrap(), e, "{s}");
        }
    }
}
