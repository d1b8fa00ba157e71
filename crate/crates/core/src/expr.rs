//! Analytic expression language for scenario fields.
//!
//! Grammar: infix `+ - * / ^` with standard precedence (`^` right-associative
//! and binding tighter than unary minus), parentheses, function calls, the
//! coordinate variables `x0..x3`, declared named parameters, and numeric
//! literals in decimal or scientific notation.
//!
//! Functions: `sqrt sin cos tan exp log tanh pow(a,b) min(a,b) max(a,b)`.
//!
//! Evaluation is generic over [`Scalar`], so the same tree yields plain
//! values or exact derivatives of any tracked order depending on what the
//! caller feeds in.

use crate::error::DomainError;
use crate::scalar::Scalar;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {msg}")]
    Syntax { offset: usize, msg: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("`{func}` expects {expected} argument(s), got {got} (at byte {offset})")]
    ArityMismatch {
        func: String,
        expected: usize,
        got: usize,
        offset: usize,
    },
    #[error("domain error evaluating expression: {0}")]
    Domain(#[from] DomainError),
    #[error("parameter index {0} out of range")]
    ParamOutOfRange(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Tanh,
    Pow,
    Min,
    Max,
}

impl Func {
    fn lookup(name: &str) -> Option<(Func, usize)> {
        Some(match name {
            "sqrt" => (Func::Sqrt, 1),
            "sin" => (Func::Sin, 1),
            "cos" => (Func::Cos, 1),
            "tan" => (Func::Tan, 1),
            "exp" => (Func::Exp, 1),
            "log" => (Func::Log, 1),
            "tanh" => (Func::Tanh, 1),
            "pow" => (Func::Pow, 2),
            "min" => (Func::Min, 2),
            "max" => (Func::Max, 2),
            _ => return None,
        })
    }

    fn name(&self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Tanh => "tanh",
            Func::Pow => "pow",
            Func::Min => "min",
            Func::Max => "max",
        }
    }
}

#[derive(Debug, Clone)]
pub enum ExprKind {
    Num(f64),
    /// Coordinate variable x0..x3.
    Var(u8),
    /// Declared parameter, resolved to its declaration index.
    Param(u16),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

/// Parsed expression node with its source byte span.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: (u32, u32),
}

impl Expr {
    /// Structural equality, ignoring source spans.
    pub fn structurally_eq(&self, other: &Expr) -> bool {
        match (&self.kind, &other.kind) {
            (ExprKind::Num(a), ExprKind::Num(b)) => a == b,
            (ExprKind::Var(a), ExprKind::Var(b)) => a == b,
            (ExprKind::Param(a), ExprKind::Param(b)) => a == b,
            (ExprKind::Neg(a), ExprKind::Neg(b)) => a.structurally_eq(b),
            (ExprKind::Bin(o1, a1, b1), ExprKind::Bin(o2, a2, b2)) => {
                o1 == o2 && a1.structurally_eq(a2) && b1.structurally_eq(b2)
            }
            (ExprKind::Call(f1, a1), ExprKind::Call(f2, a2)) => {
                f1 == f2
                    && a1.len() == a2.len()
                    && a1.iter().zip(a2).all(|(x, y)| x.structurally_eq(y))
            }
            _ => false,
        }
    }

    /// True when no coordinate variable appears (parameters still allowed).
    pub fn is_constant(&self) -> bool {
        match &self.kind {
            ExprKind::Num(_) | ExprKind::Param(_) => true,
            ExprKind::Var(_) => false,
            ExprKind::Neg(a) => a.is_constant(),
            ExprKind::Bin(_, a, b) => a.is_constant() && b.is_constant(),
            ExprKind::Call(_, args) => args.iter().all(|a| a.is_constant()),
        }
    }

    /// Syntactic zero literal (used by vacuum checks and catalog defaults).
    pub fn is_zero_literal(&self) -> bool {
        matches!(self.kind, ExprKind::Num(n) if n == 0.0)
    }
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

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
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Next token and its starting byte offset; `None` at end of input.
    fn next(&mut self) -> Result<Option<(Tok, usize)>, ExprError> {
        self.skip_ws();
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let start = self.pos;
        let c = self.src[self.pos];
        let tok = match c {
            b'+' => {
                self.pos += 1;
                Tok::Plus
            }
            b'-' => {
                self.pos += 1;
                Tok::Minus
            }
            b'*' => {
                self.pos += 1;
                Tok::Star
            }
            b'/' => {
                self.pos += 1;
                Tok::Slash
            }
            b'^' => {
                self.pos += 1;
                Tok::Caret
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b',' => {
                self.pos += 1;
                Tok::Comma
            }
            b'0'..=b'9' | b'.' => {
                let mut end = self.pos;
                let mut seen_dot = false;
                while end < self.src.len() {
                    match self.src[end] {
                        b'0'..=b'9' => end += 1,
                        b'.' if !seen_dot => {
                            seen_dot = true;
                            end += 1;
                        }
                        b'e' | b'E' => {
                            let mut k = end + 1;
                            if k < self.src.len() && (self.src[k] == b'+' || self.src[k] == b'-') {
                                k += 1;
                            }
                            if k < self.src.len() && self.src[k].is_ascii_digit() {
                                end = k + 1;
                                while end < self.src.len() && self.src[end].is_ascii_digit() {
                                    end += 1;
                                }
                            }
                            break;
                        }
                        _ => break,
                    }
                }
                let text = std::str::from_utf8(&self.src[self.pos..end]).unwrap();
                let v: f64 = text.parse().map_err(|_| ExprError::Syntax {
                    offset: start,
                    msg: format!("bad numeric literal `{text}`"),
                })?;
                self.pos = end;
                Tok::Num(v)
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let mut end = self.pos;
                while end < self.src.len()
                    && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
                {
                    end += 1;
                }
                let name = std::str::from_utf8(&self.src[self.pos..end]).unwrap().to_string();
                self.pos = end;
                Tok::Ident(name)
            }
            other => {
                return Err(ExprError::Syntax {
                    offset: start,
                    msg: format!("unexpected character `{}`", other as char),
                })
            }
        };
        Ok(Some((tok, start)))
    }
}

// ---------------------------------------------------------------------------
// Parser (recursive descent with precedence climbing)
// ---------------------------------------------------------------------------

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    idx: usize,
    end: usize,
    params: &'a [String],
}

/// Parse an expression over the coordinate variables and the declared
/// parameter names.
pub fn parse_expr(text: &str, params: &[String]) -> Result<Expr, ExprError> {
    if text.trim().is_empty() {
        return Err(ExprError::Syntax {
            offset: 0,
            msg: "empty expression".into(),
        });
    }
    let mut lx = Lexer::new(text);
    let mut toks = Vec::new();
    while let Some(t) = lx.next()? {
        toks.push(t);
    }
    let mut p = Parser {
        toks,
        idx: 0,
        end: text.len(),
        params,
    };
    let e = p.parse_sum()?;
    if p.idx != p.toks.len() {
        return Err(ExprError::Syntax {
            offset: p.toks[p.idx].1,
            msg: "unexpected trailing input".into(),
        });
    }
    Ok(e)
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.idx).map(|&(_, o)| o).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.idx).cloned();
        self.idx += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<usize, ExprError> {
        match self.bump() {
            Some((t, o)) if t == want => Ok(o),
            Some((_, o)) => Err(ExprError::Syntax {
                offset: o,
                msg: format!("expected {what}"),
            }),
            None => Err(ExprError::Syntax {
                offset: self.end,
                msg: format!("expected {what}, found end of input"),
            }),
        }
    }

    fn parse_sum(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.parse_product()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.parse_product()?;
            let span = (lhs.span.0, rhs.span.1);
            lhs = Expr {
                kind: ExprKind::Bin(op, Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
    }

    fn parse_product(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.parse_unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.parse_unary()?;
            let span = (lhs.span.0, rhs.span.1);
            lhs = Expr {
                kind: ExprKind::Bin(op, Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
    }

    fn parse_unary(&mut self) -> Result<Expr, ExprError> {
        if let Some(Tok::Minus) = self.peek() {
            let (_, o) = self.bump().unwrap();
            let inner = self.parse_unary()?;
            let span = (o as u32, inner.span.1);
            return Ok(Expr {
                kind: ExprKind::Neg(Box::new(inner)),
                span,
            });
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<Expr, ExprError> {
        let base = self.parse_atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.bump();
            // right-associative; exponent may carry a unary minus
            let exp = self.parse_exponent()?;
            let span = (base.span.0, exp.span.1);
            return Ok(Expr {
                kind: ExprKind::Bin(BinOp::Pow, Box::new(base), Box::new(exp)),
                span,
            });
        }
        Ok(base)
    }

    fn parse_exponent(&mut self) -> Result<Expr, ExprError> {
        if let Some(Tok::Minus) = self.peek() {
            let (_, o) = self.bump().unwrap();
            let inner = self.parse_exponent()?;
            let span = (o as u32, inner.span.1);
            return Ok(Expr {
                kind: ExprKind::Neg(Box::new(inner)),
                span,
            });
        }
        self.parse_power()
    }

    fn parse_atom(&mut self) -> Result<Expr, ExprError> {
        match self.bump() {
            Some((Tok::Num(v), o)) => Ok(Expr {
                kind: ExprKind::Num(v),
                span: (o as u32, self.offset() as u32),
            }),
            Some((Tok::LParen, o)) => {
                let inner = self.parse_sum()?;
                let close = self.expect(Tok::RParen, "`)`")?;
                Ok(Expr {
                    kind: inner.kind,
                    span: (o as u32, (close + 1) as u32),
                })
            }
            Some((Tok::Ident(name), o)) => {
                if let Some(Tok::LParen) = self.peek() {
                    let (func, arity) = Func::lookup(&name).ok_or(ExprError::UnknownIdentifier {
                        name: name.clone(),
                        offset: o,
                    })?;
                    self.bump(); // (
                    let mut args = Vec::new();
                    if let Some(Tok::RParen) = self.peek() {
                        // zero args never valid for our functions
                    } else {
                        loop {
                            args.push(self.parse_sum()?);
                            match self.peek() {
                                Some(Tok::Comma) => {
                                    self.bump();
                                }
                                _ => break,
                            }
                        }
                    }
                    let close = self.expect(Tok::RParen, "`)`")?;
                    if args.len() != arity {
                        return Err(ExprError::ArityMismatch {
                            func: name,
                            expected: arity,
                            got: args.len(),
                            offset: o,
                        });
                    }
                    Ok(Expr {
                        kind: ExprKind::Call(func, args),
                        span: (o as u32, (close + 1) as u32),
                    })
                } else if let Some(rest) = name.strip_prefix('x') {
                    if let Ok(i) = rest.parse::<u8>() {
                        if i < 4 {
                            return Ok(Expr {
                                kind: ExprKind::Var(i),
                                span: (o as u32, (o + name.len()) as u32),
                            });
                        }
                    }
                    self.resolve_param(name, o)
                } else {
                    self.resolve_param(name, o)
                }
            }
            Some((_, o)) => Err(ExprError::Syntax {
                offset: o,
                msg: "expected a value".into(),
            }),
            None => Err(ExprError::Syntax {
                offset: self.end,
                msg: "unexpected end of input".into(),
            }),
        }
    }

    fn resolve_param(&self, name: String, offset: usize) -> Result<Expr, ExprError> {
        match self.params.iter().position(|p| *p == name) {
            Some(i) => Ok(Expr {
                kind: ExprKind::Param(i as u16),
                span: (offset as u32, (offset + name.len()) as u32),
            }),
            None => Err(ExprError::UnknownIdentifier { name, offset }),
        }
    }
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Evaluate over any scalar field. `point` supplies x0..x3, `params` the
/// declared parameter values in declaration order.
pub fn eval_expr<T: Scalar>(expr: &Expr, point: &[T; 4], params: &[f64]) -> Result<T, ExprError> {
    Ok(match &expr.kind {
        ExprKind::Num(v) => T::from_f64(*v),
        ExprKind::Var(i) => point[*i as usize].clone(),
        ExprKind::Param(i) => {
            let i = *i as usize;
            if i >= params.len() {
                return Err(ExprError::ParamOutOfRange(i));
            }
            T::from_f64(params[i])
        }
        ExprKind::Neg(a) => -eval_expr(a, point, params)?,
        ExprKind::Bin(op, a, b) => {
            let x = eval_expr(a, point, params)?;
            let y = eval_expr(b, point, params)?;
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => x.try_div(&y)?,
                BinOp::Pow => pow_scalar(&x, &y)?,
            }
        }
        ExprKind::Call(f, args) => {
            let a0 = eval_expr(&args[0], point, params)?;
            match f {
                Func::Sqrt => a0.try_sqrt()?,
                Func::Sin => a0.sin(),
                Func::Cos => a0.cos(),
                Func::Tan => a0.try_tan()?,
                Func::Exp => a0.exp(),
                Func::Log => a0.try_ln()?,
                Func::Tanh => a0.tanh(),
                Func::Pow => {
                    let a1 = eval_expr(&args[1], point, params)?;
                    pow_scalar(&a0, &a1)?
                }
                Func::Min | Func::Max => {
                    let a1 = eval_expr(&args[1], point, params)?;
                    // branch by value; ties pick the first argument
                    let pick_first = match f {
                        Func::Min => a0.value() <= a1.value(),
                        _ => a0.value() >= a1.value(),
                    };
                    if pick_first {
                        a0
                    } else {
                        a1
                    }
                }
            }
        }
    })
}

/// `a ^ b`. An exponent with exact integer value and no seeded derivatives
/// takes the integer-power route (negative bases allowed); anything else
/// requires a positive base.
fn pow_scalar<T: Scalar>(a: &T, b: &T) -> Result<T, DomainError> {
    let bv = b.value();
    let b_is_const = (b.clone() - T::from_f64(bv)).is_zero();
    if b_is_const {
        a.try_powf(bv)
    } else {
        if a.value() <= 0.0 {
            return Err(DomainError::PowNonPositiveBase(a.value()));
        }
        Ok((a.try_ln()? * b.clone()).exp())
    }
}

// ---------------------------------------------------------------------------
// Pretty-printing
// ---------------------------------------------------------------------------

fn precedence(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        ExprKind::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        ExprKind::Neg(_) => 3,
        ExprKind::Bin(BinOp::Pow, ..) => 4,
        _ => 5,
    }
}

/// Canonical text form; `parse(print(parse(s)))` is structurally identical
/// to `parse(s)`.
pub fn print_expr(e: &Expr, params: &[String]) -> String {
    let mut s = String::new();
    print_inner(e, params, &mut s);
    s
}

fn print_inner(e: &Expr, params: &[String], out: &mut String) {
    let wrap = |child: &Expr, min_prec: u8, out: &mut String| {
        if precedence(child) < min_prec {
            out.push('(');
            print_inner(child, params, out);
            out.push(')');
        } else {
            print_inner(child, params, out);
        }
    };
    match &e.kind {
        ExprKind::Num(v) => {
            if *v < 0.0 {
                // print as negation so reparsing gives Neg(Num)
                let _ = write!(out, "(-{})", fmt_f64(-v));
            } else {
                out.push_str(&fmt_f64(*v));
            }
        }
        ExprKind::Var(i) => {
            let _ = write!(out, "x{i}");
        }
        ExprKind::Param(i) => out.push_str(&params[*i as usize]),
        ExprKind::Neg(a) => {
            out.push('-');
            wrap(a, 3, out);
        }
        ExprKind::Bin(op, a, b) => {
            let (prec, sym, right_needs) = match op {
                BinOp::Add => (1, " + ", 2),
                BinOp::Sub => (1, " - ", 2),
                BinOp::Mul => (2, "*", 3),
                BinOp::Div => (2, "/", 3),
                BinOp::Pow => (4, "^", 4),
            };
            match op {
                BinOp::Pow => {
                    // left operand of ^ must bind tighter than ^ itself
                    wrap(a, 5, out);
                    out.push_str(sym);
                    wrap(b, prec, out);
                }
                _ => {
                    wrap(a, prec, out);
                    out.push_str(sym);
                    wrap(b, right_needs, out);
                }
            }
        }
        ExprKind::Call(f, args) => {
            out.push_str(f.name());
            out.push('(');
            for (k, a) in args.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                print_inner(a, params, out);
            }
            out.push(')');
        }
    }
}

fn fmt_f64(v: f64) -> String {
    let mut s = format!("{v}");
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("NaN") {
        s.push_str(".0");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(src: &str) -> Expr {
        parse_expr(src, &["phi".into(), "eps".into()]).unwrap()
    }

    #[test]
    fn polynomial_eval() {
        let e = p("x1*x1 + 2");
        let v = eval_expr(&e, &[0.0, 3.0, 0.0, 0.0], &[0.25, 0.0]).unwrap();
        assert_eq!(v, 11.0);
    }

    #[test]
    fn unbalanced_paren_offset() {
        let err = parse_expr("sqrt(", &[]).unwrap_err();
        match err {
            ExprError::Syntax { offset, .. } => assert_eq!(offset, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parameter_substitution() {
        let e = p("1 + 2*phi");
        let v = eval_expr(&e, &[0.0; 4], &[0.25, 0.0]).unwrap();
        assert_eq!(v, 1.5);
    }

    #[test]
    fn unknown_identifier_named() {
        let err = parse_expr("1 + 2*phi", &[]).unwrap_err();
        match err {
            ExprError::UnknownIdentifier { name, .. } => assert_eq!(name, "phi"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn arity_mismatch() {
        let err = parse_expr("pow(2)", &[]).unwrap_err();
        assert!(matches!(err, ExprError::ArityMismatch { expected: 2, got: 1, .. }));
    }

    #[test]
    fn power_right_associative_and_tight() {
        // -x1^2 parses as -(x1^2); 2^3^2 = 2^(3^2) = 512
        let e = p("-x1^2");
        let v = eval_expr(&e, &[0.0, 3.0, 0.0, 0.0], &[0.0; 2]).unwrap();
        assert_eq!(v, -9.0);
        let e = p("2^3^2");
        let v = eval_expr(&e, &[0.0; 4], &[0.0; 2]).unwrap();
        assert_eq!(v, 512.0);
    }

    #[test]
    fn scientific_literals() {
        let e = p("1.5e-3 + 2E2");
        let v = eval_expr(&e, &[0.0; 4], &[0.0; 2]).unwrap();
        assert_eq!(v, 200.0015);
    }

    #[test]
    fn print_parse_roundtrip() {
        let params: Vec<String> = vec!["phi".into(), "eps".into()];
        for src in [
            "x1*x1 + 2",
            "-x1^2 + (x0 - x2)/(1 + eps)",
            "sqrt(1 + x1^2)*sin(x0)*cos(x2) - tanh(x3)",
            "pow(x1 + 1, 3) + min(x0, x1) - max(x2, -x3)",
            "2^-3 + 1e-2*phi",
            "-(x0 + x1)*-x2",
        ] {
            let a = parse_expr(src, &params).unwrap();
            let printed = print_expr(&a, &params);
            let b = parse_expr(&printed, &params)
                .unwrap_or_else(|e| panic!("reparse of `{printed}` failed: {e}"));
            assert!(
                a.structurally_eq(&b),
                "not structurally equal:\n  src: {src}\n  printed: {printed}"
            );
        }
    }

    #[test]
    fn constant_jet_eval_is_bitwise_plain_eval() {
        use crate::jet::Jet;
        let params: Vec<String> = vec!["phi".into()];
        let pv = [0.37];
        for src in [
            "sqrt(1.5 + x1^2)*sin(x0) - exp(tanh(x2*x3))/(2.5 + cos(x1))",
            "pow(1.2 + x0^2, 1.5) + log(2 + x1) + phi*x3",
        ] {
            let ast = parse_expr(src, &params).unwrap();
            let x = [0.8, -0.6, 1.7, 0.25];
            let plain: f64 = eval_expr(&ast, &x, &pv).unwrap();
            let jx: [Jet<f64>; 4] = std::array::from_fn(|i| Jet::constant(x[i]));
            let viajet: Jet<f64> = eval_expr(&ast, &jx, &pv).unwrap();
            assert!(plain == crate::scalar::Scalar::value(&viajet), "bitwise mismatch on {src}");
        }
    }

    #[test]
    fn nonpositive_base_fractional_power() {
        let e = p("(-2)^0.5");
        let err = eval_expr(&e, &[0.0; 4], &[0.0; 2]).unwrap_err();
        assert!(matches!(err, ExprError::Domain(DomainError::PowNonPositiveBase(_))));
    }
}
