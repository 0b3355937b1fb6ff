//! Scalar-expression DSL used by structure-definition files.
//!
//! Hand-written recursive-descent parser over a fixed grammar:
//! `^` binds tightest (right associative), then unary minus, then `* /`,
//! then `+ -` (left associative). Function application requires parentheses.
//! Only real-analytic primitives are admitted so evaluation into jets is
//! always valid on the function's domain.

use crate::error::{Error, Result};
use crate::jet::Jet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Parsed expression tree. Coordinate references are resolved against the
/// chart's coordinate list at parse time.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprAst {
    Const(f64),
    Coord { index: usize, name: String },
    Unary(UnaryOp, Box<ExprAst>),
    Binary(BinaryOp, Box<ExprAst>, Box<ExprAst>),
}

const FUNCTIONS: [(&str, UnaryOp); 5] = [
    ("exp", UnaryOp::Exp),
    ("log", UnaryOp::Log),
    ("sin", UnaryOp::Sin),
    ("cos", UnaryOp::Cos),
    ("sqrt", UnaryOp::Sqrt),
];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>> {
        let mut lx = Lexer {
            src: src.as_bytes(),
            pos: 0,
        };
        let mut out = Vec::new();
        loop {
            lx.skip_ws();
            if lx.pos >= lx.src.len() {
                return Ok(out);
            }
            let start = lx.pos;
            let c = lx.src[lx.pos];
            let tok = match c {
                b'+' => {
                    lx.pos += 1;
                    Tok::Plus
                }
                b'-' => {
                    lx.pos += 1;
                    Tok::Minus
                }
                b'*' => {
                    lx.pos += 1;
                    Tok::Star
                }
                b'/' => {
                    lx.pos += 1;
                    Tok::Slash
                }
                b'^' => {
                    lx.pos += 1;
                    Tok::Caret
                }
                b'(' => {
                    lx.pos += 1;
                    Tok::LParen
                }
                b')' => {
                    lx.pos += 1;
                    Tok::RParen
                }
                b',' => {
                    lx.pos += 1;
                    Tok::Comma
                }
                b'0'..=b'9' | b'.' => lx.number(start)?,
                c if c.is_ascii_alphabetic() || c == b'_' => lx.ident(),
                other => {
                    return Err(Error::Syntax {
                        offset: start,
                        message: format!("unexpected character `{}`", other as char),
                    })
                }
            };
            out.push((tok, start));
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn number(&mut self, start: usize) -> Result<Tok> {
        let mut saw_dot = false;
        while self.pos < self.src.len() {
            match self.src[self.pos] {
                b'0'..=b'9' => self.pos += 1,
                b'.' if !saw_dot => {
                    saw_dot = true;
                    self.pos += 1;
                }
                b'e' | b'E' => {
                    // exponent part: e[+-]?digits
                    let mut look = self.pos + 1;
                    if look < self.src.len() && (self.src[look] == b'+' || self.src[look] == b'-') {
                        look += 1;
                    }
                    if look < self.src.len() && self.src[look].is_ascii_digit() {
                        self.pos = look + 1;
                        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                            self.pos += 1;
                        }
                    }
                    break;
                }
                _ => break,
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        text.parse::<f64>().map(Tok::Num).map_err(|_| Error::Syntax {
            offset: start,
            message: format!("invalid number literal `{text}`"),
        })
    }

    fn ident(&mut self) -> Tok {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        Tok::Ident(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    cur: usize,
    end: usize,
    coords: &'a [String],
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.cur).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.cur).map(|(_, o)| *o).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.cur).map(|(t, _)| t.clone());
        self.cur += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        let off = self.offset();
        match self.bump() {
            Some(t) if t == want => Ok(()),
            _ => Err(Error::Syntax {
                offset: off,
                message: format!("expected {what}"),
            }),
        }
    }

    fn expr(&mut self) -> Result<ExprAst> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinaryOp::Add,
                Some(Tok::Minus) => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = ExprAst::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<ExprAst> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinaryOp::Mul,
                Some(Tok::Slash) => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = ExprAst::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<ExprAst> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            let inner = self.unary()?;
            return Ok(ExprAst::Unary(UnaryOp::Neg, Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<ExprAst> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            // Right associative; the exponent may carry a unary minus.
            let exp = self.unary()?;
            return Ok(ExprAst::Binary(BinaryOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<ExprAst> {
        let off = self.offset();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(ExprAst::Const(v)),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "closing `)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => self.ident_atom(name, off),
            _ => Err(Error::Syntax {
                offset: off,
                message: "expected a number, coordinate, function call, or `(`".into(),
            }),
        }
    }

    fn ident_atom(&mut self, name: String, off: usize) -> Result<ExprAst> {
        let func = FUNCTIONS.iter().find(|(f, _)| *f == name).map(|(_, op)| *op);
        if matches!(self.peek(), Some(Tok::LParen)) {
            self.bump();
            let mut args = vec![self.expr()?];
            while matches!(self.peek(), Some(Tok::Comma)) {
                self.bump();
                args.push(self.expr()?);
            }
            self.expect(Tok::RParen, "closing `)`")?;
            let Some(op) = func else {
                return Err(Error::UnknownIdentifier { offset: off, name });
            };
            if args.len() != 1 {
                return Err(Error::Arity {
                    offset: off,
                    name,
                    expected: 1,
                    found: args.len(),
                });
            }
            return Ok(ExprAst::Unary(op, Box::new(args.pop().expect("one arg"))));
        }
        if func.is_some() {
            return Err(Error::Syntax {
                offset: off,
                message: format!("function `{name}` requires parentheses"),
            });
        }
        match self.coords.iter().position(|c| c == &name) {
            Some(index) => Ok(ExprAst::Coord { index, name }),
            None => Err(Error::UnknownIdentifier { offset: off, name }),
        }
    }
}

/// Parse `text` against the ordered coordinate list of the chart.
pub fn parse(text: &str, coords: &[String]) -> Result<ExprAst> {
    if text.trim().is_empty() {
        return Err(Error::Syntax {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let toks = Lexer::tokens(text)?;
    let mut p = Parser {
        toks,
        cur: 0,
        end: text.len(),
        coords,
    };
    let ast = p.expr()?;
    if p.cur != p.toks.len() {
        return Err(Error::Syntax {
            offset: p.offset(),
            message: "trailing input after expression".into(),
        });
    }
    Ok(ast)
}

impl ExprAst {
    /// Evaluate into jet arithmetic over coordinate seeds.
    pub fn eval_jet(&self, coord_jets: &[Jet]) -> Result<Jet> {
        match self {
            ExprAst::Const(v) => Ok(Jet::constant_like(&coord_jets[0], *v)),
            ExprAst::Coord { index, .. } => {
                coord_jets.get(*index).cloned().ok_or_else(|| {
                    Error::Usage(format!(
                        "coordinate index {index} out of range for {} seeds",
                        coord_jets.len()
                    ))
                })
            }
            ExprAst::Unary(op, inner) => {
                let a = inner.eval_jet(coord_jets)?;
                let res = match op {
                    UnaryOp::Neg => Ok(-&a),
                    UnaryOp::Exp => Ok(a.exp()),
                    UnaryOp::Log => a.ln(),
                    UnaryOp::Sin => Ok(a.sin()),
                    UnaryOp::Cos => Ok(a.cos()),
                    UnaryOp::Sqrt => a.sqrt(),
                };
                res.map_err(|e| e.in_expr(&self.to_text()))
            }
            ExprAst::Binary(op, lhs, rhs) => {
                let a = lhs.eval_jet(coord_jets)?;
                match op {
                    BinaryOp::Add => Ok(&a + &rhs.eval_jet(coord_jets)?),
                    BinaryOp::Sub => Ok(&a - &rhs.eval_jet(coord_jets)?),
                    BinaryOp::Mul => Ok(&a * &rhs.eval_jet(coord_jets)?),
                    BinaryOp::Div => {
                        let b = rhs.eval_jet(coord_jets)?;
                        a.try_div(&b).map_err(|e| e.in_expr(&self.to_text()))
                    }
                    BinaryOp::Pow => self.eval_pow(&a, rhs, coord_jets),
                }
            }
        }
    }

    /// `a ^ b`: integer constant exponents in [-6, 6] work for any base;
    /// everything else goes through exp(b·log a) and needs a positive base.
    fn eval_pow(&self, base: &Jet, exp: &ExprAst, coord_jets: &[Jet]) -> Result<Jet> {
        if let Some(c) = exp.const_value() {
            if c.fract() == 0.0 && c.abs() <= 6.0 {
                return base.powi(c as i32).map_err(|e| e.in_expr(&self.to_text()));
            }
            return base.powf(c).map_err(|e| e.in_expr(&self.to_text()));
        }
        let b = exp.eval_jet(coord_jets)?;
        let ln = base.ln().map_err(|e| e.in_expr(&self.to_text()))?;
        Ok((&b * &ln).exp())
    }

    /// Plain f64 value of a constant subtree, if it is one.
    pub fn const_value(&self) -> Option<f64> {
        match self {
            ExprAst::Const(v) => Some(*v),
            ExprAst::Coord { .. } => None,
            ExprAst::Unary(op, a) => {
                let a = a.const_value()?;
                Some(match op {
                    UnaryOp::Neg => -a,
                    UnaryOp::Exp => a.exp(),
                    UnaryOp::Log => a.ln(),
                    UnaryOp::Sin => a.sin(),
                    UnaryOp::Cos => a.cos(),
                    UnaryOp::Sqrt => a.sqrt(),
                })
            }
            ExprAst::Binary(op, a, b) => {
                let (a, b) = (a.const_value()?, b.const_value()?);
                Some(match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => a / b,
                    BinaryOp::Pow => a.powf(b),
                })
            }
        }
    }

    /// Fold constant subtrees whose value is finite.
    pub fn folded(&self) -> ExprAst {
        if let Some(v) = self.const_value() {
            if v.is_finite() {
                return ExprAst::Const(v);
            }
        }
        match self {
            ExprAst::Unary(op, a) => ExprAst::Unary(*op, Box::new(a.folded())),
            ExprAst::Binary(op, a, b) => {
                ExprAst::Binary(*op, Box::new(a.folded()), Box::new(b.folded()))
            }
            other => other.clone(),
        }
    }

    /// Canonical fully parenthesized printing; `parse(to_text(ast))` is `ast`.
    pub fn to_text(&self) -> String {
        match self {
            ExprAst::Const(v) => format!("{v:?}"),
            ExprAst::Coord { name, .. } => name.clone(),
            ExprAst::Unary(UnaryOp::Neg, a) => format!("(-{})", a.to_text()),
            ExprAst::Unary(op, a) => {
                let f = match op {
                    UnaryOp::Exp => "exp",
                    UnaryOp::Log => "log",
                    UnaryOp::Sin => "sin",
                    UnaryOp::Cos => "cos",
                    UnaryOp::Sqrt => "sqrt",
                    UnaryOp::Neg => unreachable!(),
                };
                format!("{f}({})", a.to_text())
            }
            ExprAst::Binary(op, a, b) => {
                let s = match op {
                    BinaryOp::Add => "+",
                    BinaryOp::Sub => "-",
                    BinaryOp::Mul => "*",
                    BinaryOp::Div => "/",
                    BinaryOp::Pow => "^",
                };
                format!("({} {s} {})", a.to_text(), b.to_text())
            }
        }
    }
}
