//! Coefficient expressions `a(x)`.
//!
//! Grammar, lowest to highest precedence:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?          right-associative
//! primary := number | 'x' | func '(' expr ')' | '(' expr ')'
//! func    := sin | cos | exp | sqrt | tanh | abs
//! ```
//!
//! Expressions that never mention `x` are folded into [`CoefficientSpec::Constant`]
//! at parse time so the analytic constant-coefficient path can be chosen up front.

use std::fmt;

use serde::Serialize;

use crate::error::ExprError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Tanh,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "tanh" => Func::Tanh,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Tanh => "tanh",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
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

/// Expression tree. The only unary operator is negation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ExprNode {
    Number(f64),
    Var,
    Neg(Box<ExprNode>),
    Binary(BinOp, Box<ExprNode>, Box<ExprNode>),
    Call(Func, Box<ExprNode>),
}

impl ExprNode {
    pub fn contains_var(&self) -> bool {
        match self {
            ExprNode::Number(_) => false,
            ExprNode::Var => true,
            ExprNode::Neg(e) | ExprNode::Call(_, e) => e.contains_var(),
            ExprNode::Binary(_, l, r) => l.contains_var() || r.contains_var(),
        }
    }

    /// Evaluates the tree at `x`. Domain violations carry the offending `x`.
    pub fn eval(&self, x: f64) -> Result<f64, ExprError> {
        let value = self.eval_inner(x)?;
        if value.is_finite() {
            Ok(value)
        } else {
            Err(domain(x, "non-finite result"))
        }
    }

    fn eval_inner(&self, x: f64) -> Result<f64, ExprError> {
        Ok(match self {
            ExprNode::Number(n) => *n,
            ExprNode::Var => x,
            ExprNode::Neg(e) => -e.eval_inner(x)?,
            ExprNode::Binary(op, l, r) => {
                let a = l.eval_inner(x)?;
                let b = r.eval_inner(x)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(domain(x, "division by zero"));
                        }
                        a / b
                    }
                    BinOp::Pow => {
                        if a < 0.0 && b.fract() != 0.0 {
                            return Err(domain(x, "non-integer power of a negative base"));
                        }
                        if a == 0.0 && b < 0.0 {
                            return Err(domain(x, "negative power of zero"));
                        }
                        a.powf(b)
                    }
                }
            }
            ExprNode::Call(f, e) => {
                let a = e.eval_inner(x)?;
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(domain(x, "sqrt of a negative number"));
                        }
                        a.sqrt()
                    }
                    Func::Tanh => a.tanh(),
                    Func::Abs => a.abs(),
                }
            }
        })
    }
}

fn domain(x: f64, message: &str) -> ExprError {
    ExprError::EvalDomain {
        x: Some(x),
        message: message.to_string(),
    }
}

/// Fully parenthesized form; reparsing it yields an identical tree.
impl fmt::Display for ExprNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // Negative literals only arise from hand-built trees; keep them parenthesized
            // so they reparse as negation rather than failing.
            ExprNode::Number(n) if n.is_sign_negative() => write!(f, "(-{})", -n),
            ExprNode::Number(n) => write!(f, "{n}"),
            ExprNode::Var => f.write_str("x"),
            ExprNode::Neg(e) => write!(f, "(-{e})"),
            ExprNode::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            ExprNode::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

/// A parsed coefficient function `a(x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CoefficientSpec {
    Constant(f64),
    Expr(ExprNode),
}

impl CoefficientSpec {
    pub fn eval(&self, x: f64) -> Result<f64, ExprError> {
        match self {
            CoefficientSpec::Constant(a0) => Ok(*a0),
            CoefficientSpec::Expr(node) => node.eval(x),
        }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            CoefficientSpec::Constant(a0) => Some(*a0),
            CoefficientSpec::Expr(_) => None,
        }
    }
}

impl fmt::Display for CoefficientSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientSpec::Constant(a0) => write!(f, "{a0}"),
            CoefficientSpec::Expr(node) => write!(f, "{node}"),
        }
    }
}

/// Parses `text` into a coefficient, folding x-free expressions to a constant.
pub fn parse_coefficient(text: &str) -> Result<CoefficientSpec, ExprError> {
    let node = parse_expr(text)?;
    if node.contains_var() {
        return Ok(CoefficientSpec::Expr(node));
    }
    match node.eval(0.0) {
        Ok(value) => Ok(CoefficientSpec::Constant(value)),
        Err(ExprError::EvalDomain { message, .. }) => Err(ExprError::EvalDomain { x: None, message }),
        Err(e) => Err(e),
    }
}

/// Evaluates a coefficient at `x`; the constant variant ignores `x`.
pub fn eval_coefficient(spec: &CoefficientSpec, x: f64) -> Result<f64, ExprError> {
    spec.eval(x)
}

/// Parses `text` into a raw tree without constant folding.
pub fn parse_expr(text: &str) -> Result<ExprNode, ExprError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    if parser.peek().kind == TokenKind::End {
        return Err(ExprError::Syntax {
            position: 0,
            message: "empty expression".into(),
        });
    }
    let node = parser.expr()?;
    let tok = parser.peek();
    if tok.kind != TokenKind::End {
        return Err(ExprError::Syntax {
            position: tok.position,
            message: format!("unexpected {}", tok.kind.describe()),
        });
    }
    Ok(node)
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Number(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

impl TokenKind {
    fn describe(&self) -> String {
        match self {
            TokenKind::Number(n) => format!("number {n}"),
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::Op(c) => format!("operator `{c}`"),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
            TokenKind::End => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    /// 1-based character column.
    position: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let position = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                } else {
                    return Err(ExprError::Syntax {
                        position: j + 1,
                        message: "malformed exponent in numeric literal".into(),
                    });
                }
            }
            let literal: String = chars[start..i].iter().collect();
            let value = literal.parse::<f64>().map_err(|_| ExprError::Syntax {
                position,
                message: format!("malformed numeric literal `{literal}`"),
            })?;
            tokens.push(Token {
                kind: TokenKind::Number(value),
                position,
            });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            tokens.push(Token {
                kind: TokenKind::Ident(chars[start..i].iter().collect()),
                position,
            });
            continue;
        }
        let kind = match c {
            '+' | '-' | '*' | '/' | '^' => TokenKind::Op(c),
            '(' => TokenKind::LParen,
            ')' => TokenKind::RParen,
            other => {
                return Err(ExprError::Syntax {
                    position,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        tokens.push(Token { kind, position });
        i += 1;
    }
    tokens.push(Token {
        kind: TokenKind::End,
        position: chars.len() + 1,
    });
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if tok.kind != TokenKind::End {
            self.pos += 1;
        }
        tok
    }

    fn eat_op(&mut self, ops: &[char]) -> Option<char> {
        match self.peek().kind {
            TokenKind::Op(c) if ops.contains(&c) => {
                self.pos += 1;
                Some(c)
            }
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<ExprNode, ExprError> {
        let mut lhs = self.term()?;
        while let Some(c) = self.eat_op(&['+', '-']) {
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = ExprNode::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<ExprNode, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(c) = self.eat_op(&['*', '/']) {
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = ExprNode::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<ExprNode, ExprError> {
        match self.eat_op(&['-', '+']) {
            Some('-') => Ok(ExprNode::Neg(Box::new(self.unary()?))),
            Some(_) => self.unary(),
            None => self.power(),
        }
    }

    fn power(&mut self) -> Result<ExprNode, ExprError> {
        let base = self.primary()?;
        if self.eat_op(&['^']).is_some() {
            let exponent = self.unary()?;
            return Ok(ExprNode::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<ExprNode, ExprError> {
        let tok = self.next();
        match tok.kind {
            TokenKind::Number(n) => Ok(ExprNode::Number(n)),
            TokenKind::Ident(name) => {
                if name == "x" {
                    return Ok(ExprNode::Var);
                }
                let Some(func) = Func::from_name(&name) else {
                    return Err(ExprError::UnknownIdentifier {
                        name,
                        position: tok.position,
                    });
                };
                self.expect(TokenKind::LParen, "`(` after function name")?;
                let arg = self.expr()?;
                self.expect(TokenKind::RParen, "`)`")?;
                Ok(ExprNode::Call(func, Box::new(arg)))
            }
            TokenKind::LParen => {
                let inner = self.expr()?;
                self.expect(TokenKind::RParen, "`)`")?;
                Ok(inner)
            }
            other => Err(ExprError::Syntax {
                position: tok.position,
                message: format!("expected a number, `x`, a function or `(`, found {}", other.describe()),
            }),
        }
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> Result<(), ExprError> {
        let tok = self.next();
        if tok.kind == kind {
            Ok(())
        } else {
            Err(ExprError::Syntax {
                position: tok.position,
                message: format!("expected {what}, found {}", tok.kind.describe()),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tree(text: &str) -> ExprNode {
        parse_expr(text).unwrap()
    }

    #[test]
    fn literal_is_constant() {
        assert_eq!(parse_coefficient("1").unwrap(), CoefficientSpec::Constant(1.0));
    }

    #[test]
    fn sin_expression_evaluates() {
        let spec = parse_coefficient("1 + 0.5*sin(x)").unwrap();
        assert!(matches!(spec, CoefficientSpec::Expr(_)));
        assert_eq!(spec.eval(0.0).unwrap(), 1.0);
        assert_eq!(spec.eval(std::f64::consts::FRAC_PI_2).unwrap(), 1.5);
    }

    #[test]
    fn power_is_right_associative() {
        // hand-evaluated: (2^3)^2 = 64, 2^(3^2) = 512
        assert_eq!(parse_coefficient("2^3^2").unwrap(), CoefficientSpec::Constant(512.0));
        assert_eq!(parse_coefficient("(2^3)^2").unwrap(), CoefficientSpec::Constant(64.0));
    }

    #[test]
    fn power_binds_tighter_than_negation() {
        assert_eq!(parse_coefficient("-2^2").unwrap(), CoefficientSpec::Constant(-4.0));
        assert_eq!(parse_coefficient("2^-1").unwrap(), CoefficientSpec::Constant(0.5));
    }

    #[test]
    fn unknown_function_is_rejected() {
        assert!(matches!(
            parse_coefficient("foo(x)"),
            Err(ExprError::UnknownIdentifier { ref name, position: 1 }) if name == "foo"
        ));
        assert!(matches!(
            parse_coefficient("y+1"),
            Err(ExprError::UnknownIdentifier { position: 1, .. })
        ));
    }

    #[test]
    fn syntax_errors_carry_position() {
        assert!(matches!(
            parse_coefficient("1 +"),
            Err(ExprError::Syntax { position: 4, .. })
        ));
        assert!(matches!(
            parse_coefficient("(1"),
            Err(ExprError::Syntax { position: 3, .. })
        ));
        assert!(matches!(parse_coefficient(""), Err(ExprError::Syntax { .. })));
        assert!(matches!(
            parse_coefficient("1 $ 2"),
            Err(ExprError::Syntax { position: 3, .. })
        ));
        assert!(matches!(parse_coefficient("1e"), Err(ExprError::Syntax { .. })));
    }

    #[test]
    fn eval_examples() {
        assert_eq!(eval_coefficient(&CoefficientSpec::Constant(-1.0), 7.0).unwrap(), -1.0);
        let sq = parse_coefficient("x^2").unwrap();
        assert_eq!(sq.eval(3.0).unwrap(), 9.0);
        let pole = parse_coefficient("1/(x-1)").unwrap();
        assert!(matches!(
            pole.eval(1.0),
            Err(ExprError::EvalDomain { x: Some(x), .. }) if x == 1.0
        ));
    }

    #[test]
    fn eval_domain_cases() {
        assert!(parse_coefficient("sqrt(x)").unwrap().eval(-1.0).is_err());
        assert!(parse_coefficient("x^0.5").unwrap().eval(-4.0).is_err());
        assert_eq!(parse_coefficient("x^3").unwrap().eval(-2.0).unwrap(), -8.0);
        assert!(parse_coefficient("exp(x)").unwrap().eval(1000.0).is_err());
        assert!(matches!(
            parse_coefficient("1/0"),
            Err(ExprError::EvalDomain { x: None, .. })
        ));
    }

    #[test]
    fn scientific_literals() {
        assert_eq!(parse_coefficient("2.5e-3").unwrap(), CoefficientSpec::Constant(2.5e-3));
        assert_eq!(parse_coefficient("1E2 + .5").unwrap(), CoefficientSpec::Constant(100.5));
    }

    #[test]
    fn display_is_fully_parenthesized() {
        assert_eq!(tree("1 + 0.5*sin(x)").to_string(), "(1 + (0.5 * sin(x)))");
        assert_eq!(tree("-x^2").to_string(), "(-(x ^ 2))");
    }

    #[test]
    fn matches_host_composition() {
        let spec = parse_coefficient("1 + 0.5*sin(x)").unwrap();
        for i in 0..10_000 {
            let x = -10.0 + 20.0 * i as f64 / 9_999.0;
            let got = spec.eval(x).unwrap();
            let want = 1.0 + 0.5 * x.sin();
            assert!((got - want).abs() <= f64::EPSILON * want.abs(), "x={x}");
        }
    }

    fn arb_tree() -> impl Strategy<Value = ExprNode> {
        let leaf = prop_oneof![(0.0f64..1e6).prop_map(ExprNode::Number), Just(ExprNode::Var),];
        leaf.prop_recursive(5, 48, 2, |inner| {
            let op = prop_oneof![
                Just(BinOp::Add),
                Just(BinOp::Sub),
                Just(BinOp::Mul),
                Just(BinOp::Div),
                Just(BinOp::Pow),
            ];
            let func = prop_oneof![
                Just(Func::Sin),
                Just(Func::Cos),
                Just(Func::Exp),
                Just(Func::Sqrt),
                Just(Func::Tanh),
                Just(Func::Abs),
            ];
            prop_oneof![
                inner.clone().prop_map(|e| ExprNode::Neg(Box::new(e))),
                (op, inner.clone(), inner.clone()).prop_map(|(op, l, r)| ExprNode::Binary(
                    op,
                    Box::new(l),
                    Box::new(r)
                )),
                (func, inner).prop_map(|(f, e)| ExprNode::Call(f, Box::new(e))),
            ]
        })
    }

    proptest! {
        #[test]
        fn printed_tree_reparses_identically(t in arb_tree()) {
            prop_assert_eq!(parse_expr(&t.to_string()).unwrap(), t);
        }

        #[test]
        fn x_free_input_is_constant(a in -100.0f64..100.0, b in 0.5f64..10.0, x in -50.0f64..50.0) {
            let text = format!("{a} * cos({b}) + {b}^2");
            let spec = parse_coefficient(&text).unwrap();
            prop_assert!(matches!(spec, CoefficientSpec::Constant(_)));
            prop_assert_eq!(spec.eval(x).unwrap(), spec.eval(0.0).unwrap());
        }
    }
}
