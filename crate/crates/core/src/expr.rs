//! A small expression language for nonlinearities `f(x, t)`.
//!
//! Grammar, loosest to tightest binding:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?          // right associative
//! primary := number | 't' | ident | ident '(' sum (',' sum)* ')' | '(' sum ')'
//! ```
//!
//! Functions: `abs`, `sgn`, `exp`, `log`, `powsgn(x, q) = sgn(x)|x|^q`.
//! Identifiers other than `t` name per-vertex coefficients or scalar
//! parameters; they are resolved to slots by [`Expr::bind`].
//!
//! Derivatives in `t` are computed in forward mode. At kinks the conventions
//! are `abs'(0) = 0` and `sgn' = 0`.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown identifier `{name}` at {line}:{column}")]
    UnknownIdentifier {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("evaluation error: {0}")]
    Eval(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
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

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Abs,
    Sgn,
    Exp,
    Log,
    PowSgn,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "abs" => Func::Abs,
            "sgn" => Func::Sgn,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "powsgn" => Func::PowSgn,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Abs => "abs",
            Func::Sgn => "sgn",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::PowSgn => "powsgn",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::PowSgn => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// The unknown `t`.
    Var,
    Ident(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl fmt::Display for Expr {
    /// Fully parenthesized; re-parsing yields a structurally equal tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Var => write!(f, "t"),
            Expr::Ident(name) => write!(f, "{name}"),
            Expr::Neg(inner) => write!(f, "(-{inner})"),
            Expr::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

// ----- lexer ---------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut column) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, column);
        if c == '\n' {
            i += 1;
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            column += 1;
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value = text.parse::<f64>().map_err(|_| ExprError::Syntax {
                line: tl,
                column: tc,
                message: format!("invalid number `{text}`"),
            })?;
            Tok::Num(value)
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else {
            i += 1;
            match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                _ => {
                    return Err(ExprError::Syntax {
                        line: tl,
                        column: tc,
                        message: format!("unexpected character `{c}`"),
                    })
                }
            }
        };
        column += i - start;
        out.push(Token {
            tok,
            line: tl,
            column: tc,
        });
    }
    out.push(Token {
        tok: Tok::End,
        line,
        column,
    });
    Ok(out)
}

// ----- parser --------------------------------------------------------------

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    known: Option<&'a dyn Fn(&str) -> bool>,
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, token: &Token, message: impl Into<String>) -> ExprError {
        ExprError::Syntax {
            line: token.line,
            column: token.column,
            message: message.into(),
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ExprError> {
        let t = self.next();
        if t.tok == want {
            Ok(())
        } else {
            Err(self.error(&t, format!("expected {what}")))
        }
    }

    fn sum(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek().tok {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.product()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn product(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.peek().tok == Tok::Op('-') {
            self.next();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if self.peek().tok == Tok::Op('^') {
            self.next();
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let t = self.next();
        match t.tok.clone() {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::LParen => {
                let e = self.sum()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if self.peek().tok == Tok::LParen {
                    let func = Func::from_name(&name)
                        .ok_or_else(|| self.error(&t, format!("unknown function `{name}`")))?;
                    self.next();
                    let mut args = vec![self.sum()?];
                    while self.peek().tok == Tok::Comma {
                        self.next();
                        args.push(self.sum()?);
                    }
                    self.expect(Tok::RParen, "`)`")?;
                    if args.len() != func.arity() {
                        return Err(self.error(
                            &t,
                            format!("`{name}` takes {} argument(s), got {}", func.arity(), args.len()),
                        ));
                    }
                    Ok(Expr::Call(func, args))
                } else if name == "t" {
                    Ok(Expr::Var)
                } else {
                    if let Some(known) = self.known {
                        if !known(&name) {
                            return Err(ExprError::UnknownIdentifier {
                                name,
                                line: t.line,
                                column: t.column,
                            });
                        }
                    }
                    Ok(Expr::Ident(name))
                }
            }
            Tok::End => Err(self.error(&t, "unexpected end of input")),
            other => Err(self.error(&t, format!("unexpected token {other:?}"))),
        }
    }
}

fn parse_with(src: &str, known: Option<&dyn Fn(&str) -> bool>) -> Result<Expr, ExprError> {
    let tokens = lex(src)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        known,
    };
    if parser.peek().tok == Tok::End {
        return Err(parser.error(&parser.peek().clone(), "empty expression"));
    }
    let e = parser.sum()?;
    let t = parser.peek().clone();
    if t.tok != Tok::End {
        return Err(parser.error(&t, "trailing input"));
    }
    Ok(e)
}

/// Parses an expression, accepting any identifier.
pub fn parse_expression(src: &str) -> Result<Expr, ExprError> {
    parse_with(src, None)
}

/// Parses an expression, rejecting identifiers for which `known` is false.
pub fn parse_expression_with(src: &str, known: &dyn Fn(&str) -> bool) -> Result<Expr, ExprError> {
    parse_with(src, Some(known))
}

// ----- evaluation ------------------------------------------------------------

/// Value and `t`-derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub value: f64,
    pub deriv: f64,
}

impl Dual {
    fn constant(value: f64) -> Self {
        Self { value, deriv: 0.0 }
    }
}

fn eval_err(msg: impl Into<String>) -> ExprError {
    ExprError::Eval(msg.into())
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn pow_dual(a: Dual, b: Dual) -> Result<Dual, ExprError> {
    if a.value == 0.0 && b.value < 0.0 {
        return Err(eval_err("0 raised to a negative power"));
    }
    if a.value < 0.0 && b.value.fract() != 0.0 {
        return Err(eval_err("negative base with non-integer exponent"));
    }
    let value = a.value.powf(b.value);
    let mut deriv = 0.0;
    if a.deriv != 0.0 {
        deriv += if a.value == 0.0 {
            if b.value == 1.0 {
                a.deriv
            } else if b.value > 1.0 {
                0.0
            } else {
                return Err(eval_err("derivative of x^q at 0 with q < 1"));
            }
        } else {
            b.value * a.value.powf(b.value - 1.0) * a.deriv
        };
    }
    if b.deriv != 0.0 {
        if a.value < 0.0 {
            return Err(eval_err("variable exponent on a negative base"));
        }
        if a.value > 0.0 {
            deriv += value * a.value.ln() * b.deriv;
        }
    }
    Ok(Dual { value, deriv })
}

fn powsgn_dual(x: Dual, q: Dual) -> Result<Dual, ExprError> {
    let ax = x.value.abs();
    let value = sgn(x.value) * ax.powf(q.value);
    let mut deriv = 0.0;
    if x.deriv != 0.0 {
        let slope = if x.value != 0.0 {
            q.value * ax.powf(q.value - 1.0)
        } else if q.value > 1.0 {
            0.0
        } else if q.value == 1.0 {
            1.0
        } else {
            return Err(eval_err("derivative of powsgn(t, q) at 0 with q < 1"));
        };
        deriv += slope * x.deriv;
    }
    if q.deriv != 0.0 && x.value != 0.0 {
        deriv += value * ax.ln() * q.deriv;
    }
    Ok(Dual { value, deriv })
}

/// An expression whose identifiers are resolved to slot positions.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundExpr {
    root: Node,
    names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(f64),
    Var,
    Slot(usize),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

impl Expr {
    /// Resolves identifiers against `names`; slot `i` holds `names[i]`.
    pub fn bind(&self, names: &[String]) -> Result<BoundExpr, ExprError> {
        Ok(BoundExpr {
            root: self.to_node(names)?,
            names: names.to_vec(),
        })
    }

    fn to_node(&self, names: &[String]) -> Result<Node, ExprError> {
        Ok(match self {
            Expr::Const(c) => Node::Const(*c),
            Expr::Var => Node::Var,
            Expr::Ident(name) => Node::Slot(names.iter().position(|n| n == name).ok_or_else(|| {
                ExprError::UnknownIdentifier {
                    name: name.clone(),
                    line: 0,
                    column: 0,
                }
            })?),
            Expr::Neg(e) => Node::Neg(Box::new(e.to_node(names)?)),
            Expr::Binary(op, l, r) => Node::Binary(*op, Box::new(l.to_node(names)?), Box::new(r.to_node(names)?)),
            Expr::Call(f, args) => Node::Call(*f, args.iter().map(|a| a.to_node(names)).collect::<Result<_, _>>()?),
        })
    }

    /// Identifiers appearing in the tree, sorted and deduplicated.
    pub fn identifiers(&self) -> Vec<String> {
        fn walk(e: &Expr, out: &mut Vec<String>) {
            match e {
                Expr::Ident(n) => out.push(n.clone()),
                Expr::Neg(inner) => walk(inner, out),
                Expr::Binary(_, l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
                Expr::Call(_, args) => args.iter().for_each(|a| walk(a, out)),
                Expr::Const(_) | Expr::Var => {}
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out.sort();
        out.dedup();
        out
    }

    /// Whether the unknown `t` appears anywhere.
    pub fn depends_on_t(&self) -> bool {
        match self {
            Expr::Var => true,
            Expr::Const(_) | Expr::Ident(_) => false,
            Expr::Neg(e) => e.depends_on_t(),
            Expr::Binary(_, l, r) => l.depends_on_t() || r.depends_on_t(),
            Expr::Call(_, args) => args.iter().any(Expr::depends_on_t),
        }
    }
}

impl Node {
    fn eval(&self, t: Dual, slots: &[f64]) -> Result<Dual, ExprError> {
        let out = match self {
            Node::Const(c) => Dual::constant(*c),
            Node::Var => t,
            Node::Slot(i) => Dual::constant(slots[*i]),
            Node::Neg(e) => {
                let v = e.eval(t, slots)?;
                Dual {
                    value: -v.value,
                    deriv: -v.deriv,
                }
            }
            Node::Binary(op, l, r) => {
                let a = l.eval(t, slots)?;
                let b = r.eval(t, slots)?;
                match op {
                    BinOp::Add => Dual {
                        value: a.value + b.value,
                        deriv: a.deriv + b.deriv,
                    },
                    BinOp::Sub => Dual {
                        value: a.value - b.value,
                        deriv: a.deriv - b.deriv,
                    },
                    BinOp::Mul => Dual {
                        value: a.value * b.value,
                        deriv: a.deriv * b.value + a.value * b.deriv,
                    },
                    BinOp::Div => {
                        if b.value == 0.0 {
                            return Err(eval_err("division by zero"));
                        }
                        Dual {
                            value: a.value / b.value,
                            deriv: (a.deriv * b.value - a.value * b.deriv) / (b.value * b.value),
                        }
                    }
                    BinOp::Pow => pow_dual(a, b)?,
                }
            }
            Node::Call(func, args) => {
                let a = args[0].eval(t, slots)?;
                match func {
                    Func::Abs => Dual {
                        value: a.value.abs(),
                        deriv: sgn(a.value) * a.deriv,
                    },
                    Func::Sgn => Dual::constant(sgn(a.value)),
                    Func::Exp => {
                        let e = a.value.exp();
                        Dual {
                            value: e,
                            deriv: e * a.deriv,
                        }
                    }
                    Func::Log => {
                        if a.value <= 0.0 {
                            return Err(eval_err("log of a non-positive number"));
                        }
                        Dual {
                            value: a.value.ln(),
                            deriv: a.deriv / a.value,
                        }
                    }
                    Func::PowSgn => powsgn_dual(a, args[1].eval(t, slots)?)?,
                }
            }
        };
        if !out.value.is_finite() || !out.deriv.is_finite() {
            return Err(eval_err("non-finite result"));
        }
        Ok(out)
    }

    fn eval_value(&self, t: f64, slots: &[f64]) -> Result<f64, ExprError> {
        // Derivative tracking is cheap at this size; skip it only where it could fail spuriously.
        let out = match self {
            Node::Const(c) => *c,
            Node::Var => t,
            Node::Slot(i) => slots[*i],
            Node::Neg(e) => -e.eval_value(t, slots)?,
            Node::Binary(op, l, r) => {
                let a = l.eval_value(t, slots)?;
                let b = r.eval_value(t, slots)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(eval_err("division by zero"));
                        }
                        a / b
                    }
                    BinOp::Pow => pow_dual(Dual::constant(a), Dual::constant(b))?.value,
                }
            }
            Node::Call(func, args) => {
                let a = args[0].eval_value(t, slots)?;
                match func {
                    Func::Abs => a.abs(),
                    Func::Sgn => sgn(a),
                    Func::Exp => a.exp(),
                    Func::Log => {
                        if a <= 0.0 {
                            return Err(eval_err("log of a non-positive number"));
                        }
                        a.ln()
                    }
                    Func::PowSgn => {
                        let q = args[1].eval_value(t, slots)?;
                        sgn(a) * a.abs().powf(q)
                    }
                }
            }
        };
        if !out.is_finite() {
            return Err(eval_err("non-finite result"));
        }
        Ok(out)
    }
}

impl BoundExpr {
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn eval(&self, t: f64, slots: &[f64]) -> Result<f64, ExprError> {
        self.root.eval_value(t, slots)
    }

    /// Value and derivative with respect to `t`.
    pub fn eval_dual(&self, t: f64, slots: &[f64]) -> Result<Dual, ExprError> {
        self.root.eval(Dual { value: t, deriv: 1.0 }, slots)
    }
}
