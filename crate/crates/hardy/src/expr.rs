//! One-variable arithmetic expressions for densities and elliptic coefficients.
//!
//! The grammar is deliberately small: float literals, the variable `x`,
//! `+ - * / ^` (with `^` binding tighter than unary minus and associating to
//! the right), parentheses, and the calls `exp`, `log`, `sin`, `cos`, `sqrt`,
//! `abs`, `pow`. That covers the power/exponential weights of interest,
//! e.g. `exp(-x^2/2)` or `x^-0.5`.
//!
//! Evaluation raises domain errors eagerly (log of a nonpositive number,
//! division by zero, `0^negative`, ...) instead of letting NaN propagate, so
//! quadrature can tell an integrable singularity from a user mistake.

use std::fmt;
use std::sync::Arc;

/// Binary operators in precedence order (`^` is handled separately).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Built-in functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    Abs,
    Pow,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Pow => "pow",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Pow => 2,
            _ => 1,
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "pow" => Func::Pow,
            _ => return None,
        })
    }
}

/// Immutable expression tree. Evaluation is reentrant; trees are cheap to
/// share through `Arc` and safe to evaluate from concurrent sweep workers.
#[derive(Clone, Debug, PartialEq)]
pub enum Expression {
    Num(f64),
    Var,
    Neg(Arc<Expression>),
    Bin(BinOp, Arc<Expression>, Arc<Expression>),
    Call(Func, Vec<Expression>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedEnd,
    ExpectedToken(&'static str),
    UnknownIdentifier(String),
    BadNumber,
    WrongArity { func: &'static str, expected: usize, got: usize },
    TrailingInput,
    EmptyInput,
}

/// Syntax error with the byte offset where parsing failed.
#[derive(Clone, Debug, PartialEq)]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::UnexpectedChar(c) => {
                write!(f, "syntax error at byte {}: unexpected character '{}'", self.offset, c)
            }
            ParseErrorKind::UnexpectedEnd => {
                write!(f, "syntax error at byte {}: unexpected end of input", self.offset)
            }
            ParseErrorKind::ExpectedToken(t) => {
                write!(f, "syntax error at byte {}: expected {}", self.offset, t)
            }
            ParseErrorKind::UnknownIdentifier(s) => {
                write!(f, "unknown function or identifier '{}' at byte {}", s, self.offset)
            }
            ParseErrorKind::BadNumber => {
                write!(f, "syntax error at byte {}: malformed number", self.offset)
            }
            ParseErrorKind::WrongArity { func, expected, got } => write!(
                f,
                "{} takes {} argument(s), got {} (at byte {})",
                func, expected, got, self.offset
            ),
            ParseErrorKind::TrailingInput => {
                write!(f, "syntax error at byte {}: trailing input", self.offset)
            }
            ParseErrorKind::EmptyInput => write!(f, "empty expression"),
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainErrorKind {
    DivisionByZero,
    LogNonPositive,
    SqrtNegative,
    ZeroToNegative,
    NegativeToFractional,
    Indeterminate,
}

/// Evaluation-domain error carrying the offending subexpression and `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalError {
    pub kind: DomainErrorKind,
    pub subexpr: String,
    pub x: f64,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            DomainErrorKind::DivisionByZero => "division by zero",
            DomainErrorKind::LogNonPositive => "log of a nonpositive number",
            DomainErrorKind::SqrtNegative => "sqrt of a negative number",
            DomainErrorKind::ZeroToNegative => "zero raised to a negative power",
            DomainErrorKind::NegativeToFractional => "negative base with fractional exponent",
            DomainErrorKind::Indeterminate => "indeterminate result (NaN)",
        };
        write!(f, "{} in `{}` at x = {}", what, self.subexpr, self.x)
    }
}

impl std::error::Error for EvalError {}

/// Parse `text` into an [`Expression`].
pub fn parse(text: &str) -> Result<Expression, ParseError> {
    let mut p = Parser { bytes: text.as_bytes(), pos: 0 };
    p.skip_ws();
    if p.pos >= p.bytes.len() {
        return Err(ParseError { offset: 0, kind: ParseErrorKind::EmptyInput });
    }
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.bytes.len() {
        return Err(ParseError { offset: p.pos, kind: ParseErrorKind::TrailingInput });
    }
    Ok(e)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<Expression, ParseError> {
        let mut lhs = self.term()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expression::Bin(BinOp::Add, Arc::new(lhs), Arc::new(rhs));
                }
                Some(b'-') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expression::Bin(BinOp::Sub, Arc::new(lhs), Arc::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    // term := unary (('*'|'/') unary)*
    fn term(&mut self) -> Result<Expression, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = Expression::Bin(BinOp::Mul, Arc::new(lhs), Arc::new(rhs));
                }
                Some(b'/') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = Expression::Bin(BinOp::Div, Arc::new(lhs), Arc::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    // unary := '-' unary | power     (so ^ binds tighter than unary minus)
    fn unary(&mut self) -> Result<Expression, ParseError> {
        self.skip_ws();
        if self.eat(b'-') {
            let inner = self.unary()?;
            return Ok(Expression::Neg(Arc::new(inner)));
        }
        self.power()
    }

    // power := atom ('^' unary)?    right-associative via the unary recursion
    fn power(&mut self) -> Result<Expression, ParseError> {
        let base = self.atom()?;
        self.skip_ws();
        if self.eat(b'^') {
            let exp = self.unary()?;
            return Ok(Expression::Bin(BinOp::Pow, Arc::new(base), Arc::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expression, ParseError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            None => Err(ParseError { offset: start, kind: ParseErrorKind::UnexpectedEnd }),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.skip_ws();
                if !self.eat(b')') {
                    return Err(ParseError {
                        offset: self.pos,
                        kind: ParseErrorKind::ExpectedToken("')'"),
                    });
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let ident = self.ident();
                if ident == "x" {
                    return Ok(Expression::Var);
                }
                match Func::from_name(&ident) {
                    Some(f) => self.call(f, start),
                    None => Err(ParseError {
                        offset: start,
                        kind: ParseErrorKind::UnknownIdentifier(ident),
                    }),
                }
            }
            Some(c) => Err(ParseError {
                offset: start,
                kind: ParseErrorKind::UnexpectedChar(c as char),
            }),
        }
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self
            .peek()
            .map(|c| c.is_ascii_alphanumeric() || c == b'_')
            .unwrap_or(false)
        {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned()
    }

    fn number(&mut self) -> Result<Expression, ParseError> {
        let start = self.pos;
        while self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
            self.pos += 1;
        }
        if self.eat(b'.') {
            while self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
                self.pos += 1;
            }
        }
        if self.peek() == Some(b'e') || self.peek() == Some(b'E') {
            let mark = self.pos;
            self.pos += 1;
            if self.peek() == Some(b'+') || self.peek() == Some(b'-') {
                self.pos += 1;
            }
            if self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
                while self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
                    self.pos += 1;
                }
            } else {
                // not an exponent after all (e.g. "2*exp(x)" never reaches
                // here, but "2e" alone would); back off
                self.pos = mark;
            }
        }
        let s = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        s.parse::<f64>()
            .map(Expression::Num)
            .map_err(|_| ParseError { offset: start, kind: ParseErrorKind::BadNumber })
    }

    fn call(&mut self, f: Func, start: usize) -> Result<Expression, ParseError> {
        self.skip_ws();
        if !self.eat(b'(') {
            return Err(ParseError {
                offset: self.pos,
                kind: ParseErrorKind::ExpectedToken("'(' after function name"),
            });
        }
        let mut args = vec![self.expr()?];
        loop {
            self.skip_ws();
            if self.eat(b',') {
                args.push(self.expr()?);
            } else {
                break;
            }
        }
        self.skip_ws();
        if !self.eat(b')') {
            return Err(ParseError {
                offset: self.pos,
                kind: ParseErrorKind::ExpectedToken("')'"),
            });
        }
        if args.len() != f.arity() {
            return Err(ParseError {
                offset: start,
                kind: ParseErrorKind::WrongArity {
                    func: f.name(),
                    expected: f.arity(),
                    got: args.len(),
                },
            });
        }
        Ok(Expression::Call(f, args))
    }
}

// Precedence levels used for printing: higher binds tighter.
fn prec(e: &Expression) -> u8 {
    match e {
        Expression::Bin(BinOp::Add, ..) | Expression::Bin(BinOp::Sub, ..) => 1,
        Expression::Bin(BinOp::Mul, ..) | Expression::Bin(BinOp::Div, ..) => 2,
        Expression::Neg(_) => 3,
        Expression::Bin(BinOp::Pow, ..) => 4,
        Expression::Num(_) | Expression::Var | Expression::Call(..) => 5,
    }
}

impl fmt::Display for Expression {
    /// Prints so that `parse(to_string(e)) == e` for any parsed tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expression::Num(v) => {
                if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) {
                    // negative literals only arise from programmatic trees;
                    // keep them reparseable as Neg(positive)
                    write!(f, "(-{})", -v)
                } else {
                    write!(f, "{}", v)
                }
            }
            Expression::Var => write!(f, "x"),
            Expression::Neg(inner) => {
                if prec(inner) < 3 {
                    write!(f, "-({})", inner)
                } else {
                    write!(f, "-{}", inner)
                }
            }
            Expression::Bin(op, l, r) => {
                let (sym, my) = match op {
                    BinOp::Add => ("+", 1),
                    BinOp::Sub => ("-", 1),
                    BinOp::Mul => ("*", 2),
                    BinOp::Div => ("/", 2),
                    BinOp::Pow => ("^", 4),
                };
                if *op == BinOp::Pow {
                    // right-associative: parenthesize a Pow/loose left child
                    if prec(l) <= 4 {
                        write!(f, "({})", l)?;
                    } else {
                        write!(f, "{}", l)?;
                    }
                    write!(f, "{}", sym)?;
                    if prec(r) < 4 {
                        write!(f, "({})", r)
                    } else {
                        write!(f, "{}", r)
                    }
                } else {
                    if prec(l) < my {
                        write!(f, "({})", l)?;
                    } else {
                        write!(f, "{}", l)?;
                    }
                    write!(f, "{}", sym)?;
                    // left-associative: anything at my level or looser on the
                    // right would re-associate, so it gets parens
                    if prec(r) <= my {
                        write!(f, "({})", r)
                    } else {
                        write!(f, "{}", r)
                    }
                }
            }
            Expression::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", a)?;
                }
                write!(f, ")")
            }
        }
    }
}

impl Expression {
    /// Evaluate at `x`. Deterministic: same tree, same `x`, same bits out.
    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        let v = self.eval_inner(x)?;
        if v.is_nan() {
            return Err(self.domain_err(DomainErrorKind::Indeterminate, x));
        }
        Ok(v)
    }

    fn domain_err(&self, kind: DomainErrorKind, x: f64) -> EvalError {
        EvalError { kind, subexpr: self.to_string(), x }
    }

    fn eval_inner(&self, x: f64) -> Result<f64, EvalError> {
        match self {
            Expression::Num(v) => Ok(*v),
            Expression::Var => Ok(x),
            Expression::Neg(e) => Ok(-e.eval_inner(x)?),
            Expression::Bin(op, l, r) => {
                let a = l.eval_inner(x)?;
                let b = r.eval_inner(x)?;
                match op {
                    BinOp::Add => Ok(a + b),
                    BinOp::Sub => Ok(a - b),
                    BinOp::Mul => Ok(a * b),
                    BinOp::Div => {
                        if b == 0.0 {
                            Err(self.domain_err(DomainErrorKind::DivisionByZero, x))
                        } else {
                            Ok(a / b)
                        }
                    }
                    BinOp::Pow => self.pow(a, b, x),
                }
            }
            Expression::Call(func, args) => {
                let a = args[0].eval_inner(x)?;
                match func {
                    Func::Exp => Ok(a.exp()),
                    Func::Log => {
                        if a <= 0.0 {
                            Err(self.domain_err(DomainErrorKind::LogNonPositive, x))
                        } else {
                            Ok(a.ln())
                        }
                    }
                    Func::Sin => Ok(a.sin()),
                    Func::Cos => Ok(a.cos()),
                    Func::Sqrt => {
                        if a < 0.0 {
                            Err(self.domain_err(DomainErrorKind::SqrtNegative, x))
                        } else {
                            Ok(a.sqrt())
                        }
                    }
                    Func::Abs => Ok(a.abs()),
                    Func::Pow => {
                        let b = args[1].eval_inner(x)?;
                        self.pow(a, b, x)
                    }
                }
            }
        }
    }

    fn pow(&self, base: f64, exp: f64, x: f64) -> Result<f64, EvalError> {
        if base == 0.0 && exp < 0.0 {
            return Err(self.domain_err(DomainErrorKind::ZeroToNegative, x));
        }
        if base < 0.0 && exp.fract() != 0.0 {
            return Err(self.domain_err(DomainErrorKind::NegativeToFractional, x));
        }
        Ok(base.powf(exp))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, x: f64) -> f64 {
        parse(s).unwrap().eval(x).unwrap()
    }

    #[test]
    fn literals_and_powers() {
        assert_eq!(ev("1", 0.0), 1.0);
        assert_eq!(ev("x^2", 2.0), 4.0);
        assert_eq!(ev("exp(-x)", 0.0), 1.0);
        assert_eq!(ev("sqrt(x)", 4.0), 2.0);
        assert_eq!(ev("pow(x, 3)", 2.0), 8.0);
    }

    #[test]
    fn precedence_structure() {
        // 2*x+1 is (2*x)+1, not 2*(x+1)
        let e = parse("2*x+1").unwrap();
        assert_eq!(e.eval(3.0).unwrap(), 7.0);
        match e {
            Expression::Bin(BinOp::Add, l, _) => match &*l {
                Expression::Bin(BinOp::Mul, ..) => {}
                other => panic!("lhs should be a product, got {other:?}"),
            },
            other => panic!("root should be +, got {other:?}"),
        }
    }

    #[test]
    fn power_tighter_than_unary_minus() {
        // -x^2 == -(x^2)
        assert_eq!(ev("-x^2", 3.0), -9.0);
        // 2^-2 parses (unary in exponent)
        assert_eq!(ev("2^-2", 0.0), 0.25);
        // right-associativity
        assert_eq!(ev("2^3^2", 0.0), 512.0);
    }

    // Hand-written precedence oracle on a fixed corpus: expected values are
    // computed by hand from the stated precedence table.
    #[test]
    fn precedence_corpus() {
        let cases: [(&str, f64, f64); 30] = [
            ("1+2*3", 0.0, 7.0),
            ("2*3+1", 0.0, 7.0),
            ("1-2-3", 0.0, -4.0),
            ("1-2+3", 0.0, 2.0),
            ("2*3/2", 0.0, 3.0),
            ("8/4/2", 0.0, 1.0),
            ("8/4*2", 0.0, 4.0),
            ("1+2-3+4", 0.0, 4.0),
            ("-2^2", 0.0, -4.0),
            ("(-2)^2", 0.0, 4.0),
            ("2^2^3", 0.0, 256.0),
            ("(2^2)^3", 0.0, 64.0),
            ("2*x^2", 3.0, 18.0),
            ("(2*x)^2", 3.0, 36.0),
            ("-x^2+x", 2.0, -2.0),
            ("2--3", 0.0, 5.0),
            ("2*-3", 0.0, -6.0),
            ("2/-4", 0.0, -0.5),
            ("-2*-3", 0.0, 6.0),
            ("1+2*3^2", 0.0, 19.0),
            ("(1+2)*3^2", 0.0, 27.0),
            ("2^3*4", 0.0, 32.0),
            ("4*2^3", 0.0, 32.0),
            ("x/2+1", 4.0, 3.0),
            ("x/(2+1)", 6.0, 2.0),
            ("1/2*x", 4.0, 2.0),
            ("abs(-x)+1", 2.0, 3.0),
            ("-abs(x-3)", 1.0, -2.0),
            ("x^2^0.5", 16.0, 16.0f64.powf(2.0f64.powf(0.5))),
            ("x-x*x", 3.0, -6.0),
        ];
        for (s, x, want) in cases {
            let got = ev(s, x);
            assert!(
                (got - want).abs() <= 1e-12 * want.abs().max(1.0),
                "{s} at x={x}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn domain_errors() {
        let e = parse("sin(x)/x").unwrap();
        let err = e.eval(0.0).unwrap_err();
        assert_eq!(err.kind, DomainErrorKind::DivisionByZero);
        assert_eq!(err.x, 0.0);

        assert_eq!(
            parse("log(x)").unwrap().eval(-1.0).unwrap_err().kind,
            DomainErrorKind::LogNonPositive
        );
        assert_eq!(
            parse("x^-1").unwrap().eval(0.0).unwrap_err().kind,
            DomainErrorKind::ZeroToNegative
        );
        assert_eq!(
            parse("sqrt(x)").unwrap().eval(-4.0).unwrap_err().kind,
            DomainErrorKind::SqrtNegative
        );
    }

    #[test]
    fn parse_errors_carry_offsets() {
        let err = parse("1 + ").unwrap_err();
        assert_eq!(err.offset, 4);
        let err = parse("2 * foo(x)").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::UnknownIdentifier(ref s) if s == "foo"));
        assert_eq!(err.offset, 4);
        assert!(parse("").is_err());
        let err = parse("pow(x)").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::WrongArity { .. }));
    }

    #[test]
    fn display_round_trips_structurally() {
        for s in [
            "1+2*3",
            "-x^2",
            "2^3^2",
            "(x+1)/(x-1)",
            "exp(-x^2/2)",
            "pow(x, 2)-abs(x)",
            "-(x+1)",
            "x-(1-x)",
            "8/4/2",
            "x^(1/3)",
        ] {
            let once = parse(s).unwrap();
            let again = parse(&once.to_string()).unwrap();
            assert_eq!(once, again, "round-trip of {s} via {}", once);
        }
    }
}
