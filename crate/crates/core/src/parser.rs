//! Parser and evaluator for vector-field component expressions.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?
//! atom    := number | 'x' index | func '(' sum ')' | '(' sum ')'
//! ```
//!
//! `^` binds tighter than unary minus and is right associative, so `-x1^2`
//! is `-(x1^2)` and `2^3^2` is `2^(3^2)`. Variables are `x1` … `xn`. There
//! is no implicit multiplication.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown symbol `{name}` at byte {offset}")]
    UnknownSymbol { name: String, offset: usize },
    #[error("variable x{index} at byte {offset} is out of range for dimension {dimension}")]
    Index {
        index: usize,
        dimension: usize,
        offset: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("domain error in `{subexpression}`: {reason}")]
pub struct DomainError {
    pub subexpression: String,
    pub reason: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
            BinaryOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Function {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Function {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Function::Sin,
            "cos" => Function::Cos,
            "exp" => Function::Exp,
            "log" => Function::Log,
            "sqrt" => Function::Sqrt,
            "abs" => Function::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Function::Sin => "sin",
            Function::Cos => "cos",
            Function::Exp => "exp",
            Function::Log => "log",
            Function::Sqrt => "sqrt",
            Function::Abs => "abs",
        }
    }
}

/// Expression tree node. Variables are stored zero-based.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    Variable(usize),
    Neg(Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Call(Function, Box<Expr>),
}

/// A parsed component expression together with the dimension it was
/// checked against.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldExpression {
    root: Expr,
    dimension: usize,
}

impl FieldExpression {
    pub fn root(&self) -> &Expr {
        &self.root
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// `factor * (self)`.
    pub fn scaled(&self, factor: f64) -> FieldExpression {
        FieldExpression {
            root: Expr::Binary(
                BinaryOp::Mul,
                Box::new(Expr::Number(factor)),
                Box::new(self.root.clone()),
            ),
            dimension: self.dimension,
        }
    }

    /// Evaluates at `x`, which must have length `dimension`.
    pub fn eval(&self, x: &[f64]) -> Result<f64, DomainError> {
        debug_assert_eq!(x.len(), self.dimension);
        eval_node(&self.root, x)
    }
}

impl fmt::Display for FieldExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root)
    }
}

impl fmt::Display for Expr {
    /// Fully parenthesised form. Reparsing gives the same function; negative
    /// literals come back as negations.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Number(v) if v.is_sign_negative() => write!(f, "({v:?})"),
            Expr::Number(v) => write!(f, "{v:?}"),
            Expr::Variable(i) => write!(f, "x{}", i + 1),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

pub fn parse_field_expression(text: &str, dimension: usize) -> Result<FieldExpression, ParseError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        dimension,
        end: text.len(),
    };
    let root = parser.sum()?;
    if let Some(tok) = parser.peek() {
        return Err(ParseError::Syntax {
            offset: tok.offset,
            message: format!("unexpected {}", tok.kind.describe()),
        });
    }
    Ok(FieldExpression { root, dimension })
}

pub fn eval_expression(e: &FieldExpression, x: &[f64]) -> Result<f64, DomainError> {
    e.eval(x)
}

fn domain(node: &Expr, reason: &'static str) -> DomainError {
    DomainError {
        subexpression: node.to_string(),
        reason,
    }
}

fn eval_node(node: &Expr, x: &[f64]) -> Result<f64, DomainError> {
    let value = match node {
        Expr::Number(v) => *v,
        Expr::Variable(i) => x[*i],
        Expr::Neg(e) => -eval_node(e, x)?,
        Expr::Binary(op, l, r) => {
            let a = eval_node(l, x)?;
            let b = eval_node(r, x)?;
            match op {
                BinaryOp::Add => a + b,
                BinaryOp::Sub => a - b,
                BinaryOp::Mul => a * b,
                BinaryOp::Div => {
                    if b == 0.0 {
                        return Err(domain(node, "division by zero"));
                    }
                    a / b
                }
                BinaryOp::Pow => power(a, b).map_err(|reason| domain(node, reason))?,
            }
        }
        Expr::Call(func, e) => {
            let a = eval_node(e, x)?;
            match func {
                Function::Sin => a.sin(),
                Function::Cos => a.cos(),
                Function::Exp => a.exp(),
                Function::Log => {
                    if a <= 0.0 {
                        return Err(domain(node, "logarithm of a non-positive number"));
                    }
                    a.ln()
                }
                Function::Sqrt => {
                    if a < 0.0 {
                        return Err(domain(node, "square root of a negative number"));
                    }
                    a.sqrt()
                }
                Function::Abs => a.abs(),
            }
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(domain(node, "non-finite result"))
    }
}

// Integer exponents use square-and-multiply; anything else needs a positive base.
fn power(base: f64, exponent: f64) -> Result<f64, &'static str> {
    if exponent.fract() == 0.0 && exponent.abs() <= i64::MAX as f64 {
        let mut n = exponent.abs() as u64;
        if exponent < 0.0 && base == 0.0 {
            return Err("zero raised to a negative power");
        }
        let mut acc = 1.0;
        let mut sq = base;
        while n > 0 {
            if n & 1 == 1 {
                acc *= sq;
            }
            sq *= sq;
            n >>= 1;
        }
        return Ok(if exponent < 0.0 { 1.0 / acc } else { acc });
    }
    if base <= 0.0 {
        return Err("non-integer power of a non-positive base");
    }
    Ok(base.powf(exponent))
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Number(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

impl TokenKind {
    fn describe(&self) -> String {
        match self {
            TokenKind::Number(v) => format!("number {v}"),
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::Op(c) => format!("operator `{c}`"),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    offset: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                tokens.push(Token {
                    kind: TokenKind::Op(c as char),
                    offset: start,
                });
                i += 1;
            }
            b'(' | b')' => {
                tokens.push(Token {
                    kind: if c == b'(' {
                        TokenKind::LParen
                    } else {
                        TokenKind::RParen
                    },
                    offset: start,
                });
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let literal = &text[start..i];
                let value: f64 = literal.parse().map_err(|_| ParseError::Syntax {
                    offset: start,
                    message: format!("malformed number `{literal}`"),
                })?;
                if !value.is_finite() {
                    return Err(ParseError::Syntax {
                        offset: start,
                        message: format!("number `{literal}` is out of range"),
                    });
                }
                tokens.push(Token {
                    kind: TokenKind::Number(value),
                    offset: start,
                });
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                tokens.push(Token {
                    kind: TokenKind::Ident(text[start..i].to_string()),
                    offset: start,
                });
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    offset: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    dimension: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let tok = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        tok
    }

    fn peek_op(&self) -> Option<char> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Op(c),
                ..
            }) => Some(*c),
            _ => None,
        }
    }

    fn offset(&self) -> usize {
        self.peek().map_or(self.end, |t| t.offset)
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        while let Some(c @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.product()?;
            let op = if c == '+' { BinaryOp::Add } else { BinaryOp::Sub };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(c @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if c == '*' { BinaryOp::Mul } else { BinaryOp::Div };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek_op() == Some('-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinaryOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        let offset = self.offset();
        match self.next() {
            Some(Token {
                kind: TokenKind::RParen,
                ..
            }) => Ok(()),
            Some(tok) => Err(ParseError::Syntax {
                offset,
                message: format!("expected `)`, found {}", tok.kind.describe()),
            }),
            None => Err(ParseError::Syntax {
                offset,
                message: "expected `)`, found end of input".into(),
            }),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        let Some(tok) = self.next() else {
            return Err(ParseError::Syntax {
                offset,
                message: "unexpected end of input".into(),
            });
        };
        match tok.kind {
            TokenKind::Number(v) => Ok(Expr::Number(v)),
            TokenKind::LParen => {
                let inner = self.sum()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            TokenKind::Ident(name) => {
                if let Some(func) = Function::from_name(&name) {
                    match self.next() {
                        Some(Token {
                            kind: TokenKind::LParen,
                            ..
                        }) => {}
                        _ => {
                            return Err(ParseError::Syntax {
                                offset: tok.offset + name.len(),
                                message: format!("expected `(` after `{name}`"),
                            })
                        }
                    }
                    let arg = self.sum()?;
                    self.expect_rparen()?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                self.variable(&name, tok.offset)
            }
            other => Err(ParseError::Syntax {
                offset,
                message: format!("unexpected {}", other.describe()),
            }),
        }
    }

    fn variable(&self, name: &str, offset: usize) -> Result<Expr, ParseError> {
        let digits = name.strip_prefix('x').filter(|d| {
            !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()) && !d.starts_with('0')
        });
        let Some(index) = digits.and_then(|d| d.parse::<usize>().ok()) else {
            return Err(ParseError::UnknownSymbol {
                name: name.to_string(),
                offset,
            });
        };
        if index > self.dimension {
            return Err(ParseError::Index {
                index,
                dimension: self.dimension,
                offset,
            });
        }
        Ok(Expr::Variable(index - 1))
    }
}
