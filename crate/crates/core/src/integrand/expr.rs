//! A small arithmetic language for user integrands.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | atom
//! atom   := number | s<i> | x<i> | '(' expr ')'
//!         | abs(expr) | pow(expr, expr) | det2(expr, expr, expr, expr)
//! ```
//! `s<i>` is the i-th field component, `x<i>` the i-th coordinate.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    S(usize),
    X(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Abs(Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Det2(Box<[Expr; 4]>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self> {
        let mut p = Parser { src, pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn eval(&self, x: &[f64], s: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::S(i) => s.get(*i).copied().unwrap_or(f64::NAN),
            Expr::X(i) => x.get(*i).copied().unwrap_or(f64::NAN),
            Expr::Neg(a) => -a.eval(x, s),
            Expr::Add(a, b) => a.eval(x, s) + b.eval(x, s),
            Expr::Sub(a, b) => a.eval(x, s) - b.eval(x, s),
            Expr::Mul(a, b) => a.eval(x, s) * b.eval(x, s),
            Expr::Div(a, b) => a.eval(x, s) / b.eval(x, s),
            Expr::Abs(a) => a.eval(x, s).abs(),
            Expr::Pow(a, b) => a.eval(x, s).powf(b.eval(x, s)),
            Expr::Det2(m) => m[0].eval(x, s) * m[3].eval(x, s) - m[1].eval(x, s) * m[2].eval(x, s),
        }
    }

    /// One more than the largest `s` index referenced.
    pub fn num_components(&self) -> usize {
        self.max_index(true)
    }

    pub fn num_coordinates(&self) -> usize {
        self.max_index(false)
    }

    fn max_index(&self, comp: bool) -> usize {
        match self {
            Expr::Num(_) => 0,
            Expr::S(i) => if comp { i + 1 } else { 0 },
            Expr::X(i) => if comp { 0 } else { i + 1 },
            Expr::Neg(a) | Expr::Abs(a) => a.max_index(comp),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.max_index(comp).max(b.max_index(comp))
            }
            Expr::Det2(m) => m.iter().map(|e| e.max_index(comp)).max().unwrap_or(0),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Parse(format!("{msg} at offset {} in '{}'", self.pos, self.src))
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{c}'")))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn args(&mut self, count: usize) -> Result<Vec<Expr>> {
        self.expect('(')?;
        let mut out = vec![self.expr()?];
        while out.len() < count {
            self.expect(',')?;
            out.push(self.expr()?);
        }
        self.expect(')')?;
        Ok(out)
    }

    fn atom(&mut self) -> Result<Expr> {
        self.skip_ws();
        if self.eat('(') {
            let e = self.expr()?;
            self.expect(')')?;
            return Ok(e);
        }
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == '.' => {
                while self.peek().is_some_and(|c| c.is_ascii_digit() || c == '.') {
                    self.pos += 1;
                }
                if self.peek().is_some_and(|c| c == 'e' || c == 'E') {
                    self.pos += 1;
                    if self.peek().is_some_and(|c| c == '+' || c == '-') {
                        self.pos += 1;
                    }
                    while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                        self.pos += 1;
                    }
                }
                self.src[start..self.pos]
                    .parse::<f64>()
                    .map(Expr::Num)
                    .map_err(|_| self.error("malformed number"))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                while self.peek().is_some_and(|c| c.is_ascii_alphanumeric()) {
                    self.pos += 1;
                }
                let word = &self.src[start..self.pos];
                match word {
                    "abs" => Ok(Expr::Abs(Box::new(self.args(1)?.remove(0)))),
                    "pow" => {
                        let mut a = self.args(2)?;
                        let b = a.pop().expect("two args");
                        Ok(Expr::Pow(Box::new(a.pop().expect("two args")), Box::new(b)))
                    }
                    "det2" => {
                        let a: [Expr; 4] = self.args(4)?.try_into().expect("four args");
                        Ok(Expr::Det2(Box::new(a)))
                    }
                    _ => {
                        let (head, digits) = word.split_at(1);
                        let idx = digits.parse::<usize>().map_err(|_| self.error(&format!("unknown name '{word}'")))?;
                        match head {
                            "s" => Ok(Expr::S(idx)),
                            "x" => Ok(Expr::X(idx)),
                            _ => Err(self.error(&format!("unknown name '{word}'"))),
                        }
                    }
                }
            }
            _ => Err(self.error("expected a number, variable, function or '('")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_functions() {
        let e = Expr::parse("1 + 2 * s0 - -s1 / 4").unwrap();
        assert_eq!(e.eval(&[], &[3.0, 8.0]), 1.0 + 6.0 + 2.0);
        let e = Expr::parse("det2(s0, s1, s2, s3) + pow(abs(x0), 2)").unwrap();
        assert_eq!(e.eval(&[-3.0], &[1.0, 2.0, 3.0, 4.0]), -2.0 + 9.0);
        assert_eq!(e.num_components(), 4);
        assert_eq!(e.num_coordinates(), 1);
        assert_eq!(Expr::parse("2.5e-1*(s0)").unwrap().eval(&[], &[4.0]), 1.0);
    }

    #[test]
    fn errors_are_reported() {
        for bad in ["", "s0 +", "foo(s0)", "pow(s0)", "s0 s1", "(s0", "q1"] {
            assert!(matches!(Expr::parse(bad), Err(Error::Parse(_))), "{bad}");
        }
    }
}
