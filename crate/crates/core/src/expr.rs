//! Expression trees for meromorphic maps of one complex variable.
//!
//! The language is deliberately small: complex constants, the variable `z`,
//! named parameters, `+ - * /`, integer powers and `exp`. Integer-only
//! exponents mean there are no branch cuts anywhere in the language.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::Complex;

/// Default threshold below which a divisor magnitude counts as a pole hit.
pub const DEFAULT_POLE_EPS: f64 = 1e-12;
/// Magnitudes above this are reported as [`EvalOutcome::Overflow`].
pub const OVERFLOW_GUARD: f64 = 1e150;

/// A node of the expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprNode {
    Const(Complex),
    /// The iteration variable `z`.
    Var,
    /// A named parameter, bound in [`MapExpr::params`] before evaluation.
    Param(String),
    Add(Box<ExprNode>, Box<ExprNode>),
    Sub(Box<ExprNode>, Box<ExprNode>),
    Mul(Box<ExprNode>, Box<ExprNode>),
    Div(Box<ExprNode>, Box<ExprNode>),
    Neg(Box<ExprNode>),
    /// Integer power, evaluated by repeated squaring.
    IntPow(Box<ExprNode>, i32),
    Exp(Box<ExprNode>),
}

/// An immutable expression with its parameter bindings.
#[derive(Debug, Clone, PartialEq)]
pub struct MapExpr {
    pub root: ExprNode,
    pub params: BTreeMap<String, Complex>,
}

/// Result of a pointwise evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvalOutcome {
    Finite(Complex),
    /// A division ran into a divisor of magnitude below the pole threshold.
    PoleHit { divisor_magnitude: f64 },
    /// A magnitude exceeded [`OVERFLOW_GUARD`] (or left the finite range).
    Overflow,
}

impl EvalOutcome {
    pub fn finite(&self) -> Option<Complex> {
        match self {
            EvalOutcome::Finite(v) => Some(*v),
            _ => None,
        }
    }
}

/// Evaluation errors: these are caller mistakes, unlike the pole/overflow
/// outcomes which are legitimate dynamical events.
#[derive(Debug, Clone, PartialEq)]
pub enum EvalError {
    UnboundParam(String),
    /// Real-line evaluation met a constant or parameter with nonzero
    /// imaginary part.
    NonRealValue(String),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::UnboundParam(name) => write!(f, "unbound parameter `{name}`"),
            EvalError::NonRealValue(what) => {
                write!(f, "real evaluation requires real values: {what}")
            }
        }
    }
}

impl core::error::Error for EvalError {}

enum Halt {
    Pole(f64),
    Overflow,
    Err(EvalError),
}

impl MapExpr {
    pub fn new(root: ExprNode) -> Self {
        MapExpr {
            root,
            params: BTreeMap::new(),
        }
    }

    /// Parse `source` with no parameter bindings.
    pub fn parse(source: &str) -> Result<MapExpr, ParseError> {
        parse::parse(source).map(MapExpr::new)
    }

    /// Bind (or rebind) a parameter.
    pub fn with_param(mut self, name: &str, value: Complex) -> Self {
        self.params.insert(name.to_owned(), value);
        self
    }

    pub fn with_real_param(self, name: &str, value: f64) -> Self {
        self.with_param(name, Complex::new(value, 0.0))
    }

    /// Symbolic derivative with respect to `z`. No simplification is done;
    /// repeated application reaches higher orders.
    pub fn differentiate(&self) -> MapExpr {
        MapExpr {
            root: diff_node(&self.root),
            params: self.params.clone(),
        }
    }

    /// n-th derivative.
    pub fn derivative(&self, order: u32) -> MapExpr {
        let mut d = self.clone();
        for _ in 0..order {
            d = d.differentiate();
        }
        d
    }

    /// Substitute `inner` for every occurrence of `z` (composition
    /// `self ∘ inner`). Parameter tables are merged, `self` winning on
    /// name clashes.
    pub fn compose(&self, inner: &MapExpr) -> MapExpr {
        let mut params = inner.params.clone();
        params.extend(self.params.clone());
        MapExpr {
            root: subst_var(&self.root, &inner.root),
            params,
        }
    }

    /// Replace every bound parameter by its constant value. Evaluation of
    /// the result does no table lookups, which matters in orbit loops.
    pub fn inline_params(&self) -> Result<MapExpr, EvalError> {
        fn go(n: &ExprNode, params: &BTreeMap<String, Complex>) -> Result<ExprNode, EvalError> {
            Ok(match n {
                ExprNode::Param(name) => {
                    let v = params
                        .get(name)
                        .ok_or_else(|| EvalError::UnboundParam(name.clone()))?;
                    ExprNode::Const(*v)
                }
                ExprNode::Const(_) | ExprNode::Var => n.clone(),
                ExprNode::Add(a, b) => {
                    ExprNode::Add(Box::new(go(a, params)?), Box::new(go(b, params)?))
                }
                ExprNode::Sub(a, b) => {
                    ExprNode::Sub(Box::new(go(a, params)?), Box::new(go(b, params)?))
                }
                ExprNode::Mul(a, b) => {
                    ExprNode::Mul(Box::new(go(a, params)?), Box::new(go(b, params)?))
                }
                ExprNode::Div(a, b) => {
                    ExprNode::Div(Box::new(go(a, params)?), Box::new(go(b, params)?))
                }
                ExprNode::Neg(a) => ExprNode::Neg(Box::new(go(a, params)?)),
                ExprNode::IntPow(a, k) => ExprNode::IntPow(Box::new(go(a, params)?), *k),
                ExprNode::Exp(a) => ExprNode::Exp(Box::new(go(a, params)?)),
            })
        }
        Ok(MapExpr {
            root: go(&self.root, &self.params)?,
            params: BTreeMap::new(),
        })
    }

    /// Evaluate at a complex point. Pole hits and overflow are outcomes,
    /// not errors; only unbound parameters are errors.
    pub fn eval(&self, z: Complex, pole_eps: f64) -> Result<EvalOutcome, EvalError> {
        match eval_node(&self.root, z, pole_eps, &self.params) {
            Ok(v) => Ok(EvalOutcome::Finite(v)),
            Err(Halt::Pole(m)) => Ok(EvalOutcome::PoleHit {
                divisor_magnitude: m,
            }),
            Err(Halt::Overflow) => Ok(EvalOutcome::Overflow),
            Err(Halt::Err(e)) => Err(e),
        }
    }

    /// Evaluate along the real line in pure real arithmetic. Requires all
    /// constants and parameters to have zero imaginary part.
    pub fn eval_real(&self, x: f64, pole_eps: f64) -> Result<EvalOutcome, EvalError> {
        match eval_real_node(&self.root, x, pole_eps, &self.params) {
            Ok(v) => Ok(EvalOutcome::Finite(Complex::new(v, 0.0))),
            Err(Halt::Pole(m)) => Ok(EvalOutcome::PoleHit {
                divisor_magnitude: m,
            }),
            Err(Halt::Overflow) => Ok(EvalOutcome::Overflow),
            Err(Halt::Err(e)) => Err(e),
        }
    }

    /// Names of parameters appearing in the tree.
    pub fn free_params(&self) -> Vec<String> {
        fn walk(n: &ExprNode, out: &mut Vec<String>) {
            match n {
                ExprNode::Param(name) => {
                    if !out.iter().any(|p| p == name) {
                        out.push(name.clone());
                    }
                }
                ExprNode::Add(a, b)
                | ExprNode::Sub(a, b)
                | ExprNode::Mul(a, b)
                | ExprNode::Div(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                ExprNode::Neg(a) | ExprNode::Exp(a) => walk(a, out),
                ExprNode::IntPow(a, _) => walk(a, out),
                ExprNode::Const(_) | ExprNode::Var => {}
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut out);
        out
    }
}

fn subst_var(n: &ExprNode, replacement: &ExprNode) -> ExprNode {
    match n {
        ExprNode::Var => replacement.clone(),
        ExprNode::Const(_) | ExprNode::Param(_) => n.clone(),
        ExprNode::Add(a, b) => ExprNode::Add(
            Box::new(subst_var(a, replacement)),
            Box::new(subst_var(b, replacement)),
        ),
        ExprNode::Sub(a, b) => ExprNode::Sub(
            Box::new(subst_var(a, replacement)),
            Box::new(subst_var(b, replacement)),
        ),
        ExprNode::Mul(a, b) => ExprNode::Mul(
            Box::new(subst_var(a, replacement)),
            Box::new(subst_var(b, replacement)),
        ),
        ExprNode::Div(a, b) => ExprNode::Div(
            Box::new(subst_var(a, replacement)),
            Box::new(subst_var(b, replacement)),
        ),
        ExprNode::Neg(a) => ExprNode::Neg(Box::new(subst_var(a, replacement))),
        ExprNode::IntPow(a, k) => ExprNode::IntPow(Box::new(subst_var(a, replacement)), *k),
        ExprNode::Exp(a) => ExprNode::Exp(Box::new(subst_var(a, replacement))),
    }
}

fn diff_node(n: &ExprNode) -> ExprNode {
    use ExprNode::*;
    let zero = || Const(Complex::new(0.0, 0.0));
    let one = || Const(Complex::new(1.0, 0.0));
    match n {
        Const(_) | Param(_) => zero(),
        Var => one(),
        Add(a, b) => Add(Box::new(diff_node(a)), Box::new(diff_node(b))),
        Sub(a, b) => Sub(Box::new(diff_node(a)), Box::new(diff_node(b))),
        Mul(a, b) => Add(
            Box::new(Mul(Box::new(diff_node(a)), b.clone())),
            Box::new(Mul(a.clone(), Box::new(diff_node(b)))),
        ),
        Div(a, b) => Div(
            Box::new(Sub(
                Box::new(Mul(Box::new(diff_node(a)), b.clone())),
                Box::new(Mul(a.clone(), Box::new(diff_node(b)))),
            )),
            Box::new(IntPow(b.clone(), 2)),
        ),
        Neg(a) => Neg(Box::new(diff_node(a))),
        IntPow(_, 0) => zero(),
        IntPow(a, k) => Mul(
            Box::new(Mul(
                Box::new(Const(Complex::new(f64::from(*k), 0.0))),
                Box::new(IntPow(a.clone(), k - 1)),
            )),
            Box::new(diff_node(a)),
        ),
        Exp(a) => Mul(Box::new(Exp(a.clone())), Box::new(diff_node(a))),
    }
}

fn guard(v: Complex) -> Result<Complex, Halt> {
    if v.re.is_finite() && v.im.is_finite() && math::cabs(v) <= OVERFLOW_GUARD {
        Ok(v)
    } else {
        Err(Halt::Overflow)
    }
}

fn eval_node(
    n: &ExprNode,
    z: Complex,
    pole_eps: f64,
    params: &BTreeMap<String, Complex>,
) -> Result<Complex, Halt> {
    use ExprNode::*;
    match n {
        Const(c) => Ok(*c),
        Var => Ok(z),
        Param(name) => params
            .get(name)
            .copied()
            .ok_or_else(|| Halt::Err(EvalError::UnboundParam(name.clone()))),
        Add(a, b) => guard(eval_node(a, z, pole_eps, params)? + eval_node(b, z, pole_eps, params)?),
        Sub(a, b) => guard(eval_node(a, z, pole_eps, params)? - eval_node(b, z, pole_eps, params)?),
        Mul(a, b) => guard(eval_node(a, z, pole_eps, params)? * eval_node(b, z, pole_eps, params)?),
        Div(a, b) => {
            let num = eval_node(a, z, pole_eps, params)?;
            let den = eval_node(b, z, pole_eps, params)?;
            let mag = math::cabs(den);
            if mag < pole_eps {
                return Err(Halt::Pole(mag));
            }
            guard(num / den)
        }
        Neg(a) => Ok(-eval_node(a, z, pole_eps, params)?),
        IntPow(a, k) => {
            let base = eval_node(a, z, pole_eps, params)?;
            let w = guard(cpow(base, k.unsigned_abs()))?;
            if *k < 0 {
                let mag = math::cabs(w);
                if mag < pole_eps {
                    return Err(Halt::Pole(mag));
                }
                guard(Complex::new(1.0, 0.0) / w)
            } else {
                Ok(w)
            }
        }
        Exp(a) => guard(math::cexp(eval_node(a, z, pole_eps, params)?)),
    }
}

fn guard_real(v: f64) -> Result<f64, Halt> {
    if v.is_finite() && v.abs() <= OVERFLOW_GUARD {
        Ok(v)
    } else {
        Err(Halt::Overflow)
    }
}

fn eval_real_node(
    n: &ExprNode,
    x: f64,
    pole_eps: f64,
    params: &BTreeMap<String, Complex>,
) -> Result<f64, Halt> {
    use ExprNode::*;
    match n {
        Const(c) => {
            if c.im != 0.0 {
                Err(Halt::Err(EvalError::NonRealValue(alloc::format!(
                    "constant {c}"
                ))))
            } else {
                Ok(c.re)
            }
        }
        Var => Ok(x),
        Param(name) => {
            let v = params
                .get(name)
                .ok_or_else(|| Halt::Err(EvalError::UnboundParam(name.clone())))?;
            if v.im != 0.0 {
                Err(Halt::Err(EvalError::NonRealValue(alloc::format!(
                    "parameter `{name}` = {v}"
                ))))
            } else {
                Ok(v.re)
            }
        }
        Add(a, b) => guard_real(
            eval_real_node(a, x, pole_eps, params)? + eval_real_node(b, x, pole_eps, params)?,
        ),
        Sub(a, b) => guard_real(
            eval_real_node(a, x, pole_eps, params)? - eval_real_node(b, x, pole_eps, params)?,
        ),
        Mul(a, b) => guard_real(
            eval_real_node(a, x, pole_eps, params)? * eval_real_node(b, x, pole_eps, params)?,
        ),
        Div(a, b) => {
            let num = eval_real_node(a, x, pole_eps, params)?;
            let den = eval_real_node(b, x, pole_eps, params)?;
            if den.abs() < pole_eps {
                return Err(Halt::Pole(den.abs()));
            }
            guard_real(num / den)
        }
        Neg(a) => Ok(-eval_real_node(a, x, pole_eps, params)?),
        IntPow(a, k) => {
            let base = eval_real_node(a, x, pole_eps, params)?;
            let w = guard_real(rpow(base, k.unsigned_abs()))?;
            if *k < 0 {
                if w.abs() < pole_eps {
                    return Err(Halt::Pole(w.abs()));
                }
                guard_real(1.0 / w)
            } else {
                Ok(w)
            }
        }
        Exp(a) => guard_real(math::exp(eval_real_node(a, x, pole_eps, params)?)),
    }
}

/// Integer power by repeated squaring.
fn cpow(base: Complex, mut n: u32) -> Complex {
    let mut acc = Complex::new(1.0, 0.0);
    let mut sq = base;
    while n > 0 {
        if n & 1 == 1 {
            acc *= sq;
        }
        n >>= 1;
        if n > 0 {
            sq *= sq;
        }
    }
    acc
}

fn rpow(base: f64, mut n: u32) -> f64 {
    let mut acc = 1.0;
    let mut sq = base;
    while n > 0 {
        if n & 1 == 1 {
            acc *= sq;
        }
        n >>= 1;
        if n > 0 {
            sq *= sq;
        }
    }
    acc
}

// ---------------------------------------------------------------------------
// Printing. Precedence-aware; printing a parsed tree and reparsing it yields
// a structurally equal tree. Constants with negative real part or nonzero
// imaginary part are not grammar atoms; they print in a parenthesised sum
// form that reparses to an equal value but not an identical tree shape.
// ---------------------------------------------------------------------------

fn prec(n: &ExprNode) -> u8 {
    use ExprNode::*;
    match n {
        Add(..) | Sub(..) => 1,
        Mul(..) | Div(..) => 2,
        Neg(..) => 3,
        IntPow(..) => 4,
        Const(c) => {
            if (c.im == 0.0 && c.re < 0.0) || (c.re == 0.0 && c.im < 0.0) {
                3 // prints with a leading minus
            } else if c.re != 0.0 && c.im != 0.0 {
                5 // parenthesised sum form
            } else {
                5
            }
        }
        Var | Param(_) | Exp(..) => 5,
    }
}

fn fmt_node(n: &ExprNode, min_prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let this = prec(n);
    let parens = this < min_prec;
    if parens {
        f.write_str("(")?;
    }
    match n {
        ExprNode::Const(c) => fmt_const(*c, f)?,
        ExprNode::Var => f.write_str("z")?,
        ExprNode::Param(name) => f.write_str(name)?,
        ExprNode::Add(a, b) => {
            fmt_node(a, 1, f)?;
            f.write_str("+")?;
            fmt_node(b, 2, f)?;
        }
        ExprNode::Sub(a, b) => {
            fmt_node(a, 1, f)?;
            f.write_str("-")?;
            fmt_node(b, 2, f)?;
        }
        ExprNode::Mul(a, b) => {
            fmt_node(a, 2, f)?;
            f.write_str("*")?;
            fmt_node(b, 3, f)?;
        }
        ExprNode::Div(a, b) => {
            fmt_node(a, 2, f)?;
            f.write_str("/")?;
            fmt_node(b, 3, f)?;
        }
        ExprNode::Neg(a) => {
            f.write_str("-")?;
            fmt_node(a, 3, f)?;
        }
        ExprNode::IntPow(a, k) => {
            fmt_node(a, 5, f)?;
            write!(f, "^{k}")?;
        }
        ExprNode::Exp(a) => {
            f.write_str("exp(")?;
            fmt_node(a, 1, f)?;
            f.write_str(")")?;
        }
    }
    if parens {
        f.write_str(")")?;
    }
    Ok(())
}

fn fmt_const(c: Complex, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if c.im == 0.0 {
        write!(f, "{}", c.re)
    } else if c.re == 0.0 {
        if c.im == 1.0 {
            f.write_str("i")
        } else {
            write!(f, "{}i", c.im)
        }
    } else if c.im < 0.0 {
        write!(f, "({}-{}i)", c.re, -c.im)
    } else {
        write!(f, "({}+{}i)", c.re, c.im)
    }
}

impl fmt::Display for ExprNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_node(self, 0, f)
    }
}

impl fmt::Display for MapExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_node(&self.root, 0, f)
    }
}

// ---------------------------------------------------------------------------
// Serde: a MapExpr travels as { "source": <printed form>, "params": {...} }.
// ---------------------------------------------------------------------------

impl serde::Serialize for MapExpr {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("MapExpr", 2)?;
        st.serialize_field("source", &self.to_string())?;
        st.serialize_field("params", &self.params)?;
        st.end()
    }
}

impl<'de> serde::Deserialize<'de> for MapExpr {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(serde::Deserialize)]
        struct Raw {
            source: String,
            params: BTreeMap<String, Complex>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let mut e = MapExpr::parse(&raw.source).map_err(serde::de::Error::custom)?;
        e.params = raw.params;
        Ok(e)
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

/// Parse error with the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedEnd,
    ExpectedOperand,
    ExpectedClosingParen,
    NonIntegerExponent,
    UnknownFunction(String),
    MalformedNumber,
    TrailingInput,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match &self.kind {
            ParseErrorKind::UnexpectedChar(c) => return write!(
                f,
                "syntax error at byte {}: unexpected character `{c}`",
                self.offset
            ),
            ParseErrorKind::UnexpectedEnd => "unexpected end of input",
            ParseErrorKind::ExpectedOperand => "expected an operand",
            ParseErrorKind::ExpectedClosingParen => "expected `)`",
            ParseErrorKind::NonIntegerExponent => "exponent must be an integer literal",
            ParseErrorKind::UnknownFunction(name) => {
                return write!(
                    f,
                    "syntax error at byte {}: unknown function `{name}`",
                    self.offset
                )
            }
            ParseErrorKind::MalformedNumber => "malformed number",
            ParseErrorKind::TrailingInput => "trailing input after expression",
        };
        write!(f, "syntax error at byte {}: {what}", self.offset)
    }
}

impl core::error::Error for ParseError {}

mod parse {
    use super::*;

    pub struct Cursor<'a> {
        src: &'a [u8],
        pos: usize,
    }

    impl<'a> Cursor<'a> {
        fn skip_ws(&mut self) {
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
        }

        fn peek(&mut self) -> Option<u8> {
            self.skip_ws();
            self.src.get(self.pos).copied()
        }

        fn bump(&mut self) -> Option<u8> {
            let c = self.peek()?;
            self.pos += 1;
            Some(c)
        }

        fn err(&self, kind: ParseErrorKind) -> ParseError {
            ParseError {
                offset: self.pos,
                kind,
            }
        }
    }

    pub fn parse(source: &str) -> Result<ExprNode, ParseError> {
        let mut cur = Cursor {
            src: source.as_bytes(),
            pos: 0,
        };
        let e = expr(&mut cur)?;
        if cur.peek().is_some() {
            return Err(cur.err(ParseErrorKind::TrailingInput));
        }
        Ok(e)
    }

    // expr := term (('+'|'-') term)*
    fn expr(cur: &mut Cursor) -> Result<ExprNode, ParseError> {
        let mut lhs = term(cur)?;
        while let Some(c) = cur.peek() {
            match c {
                b'+' => {
                    cur.bump();
                    lhs = ExprNode::Add(Box::new(lhs), Box::new(term(cur)?));
                }
                b'-' => {
                    cur.bump();
                    lhs = ExprNode::Sub(Box::new(lhs), Box::new(term(cur)?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    // term := factor (('*'|'/') factor)*
    fn term(cur: &mut Cursor) -> Result<ExprNode, ParseError> {
        let mut lhs = factor(cur)?;
        while let Some(c) = cur.peek() {
            match c {
                b'*' => {
                    cur.bump();
                    lhs = ExprNode::Mul(Box::new(lhs), Box::new(factor(cur)?));
                }
                b'/' => {
                    cur.bump();
                    lhs = ExprNode::Div(Box::new(lhs), Box::new(factor(cur)?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    // factor := '-' factor | power
    fn factor(cur: &mut Cursor) -> Result<ExprNode, ParseError> {
        if cur.peek() == Some(b'-') {
            cur.bump();
            return Ok(ExprNode::Neg(Box::new(factor(cur)?)));
        }
        power(cur)
    }

    // power := atom ('^' signed-integer)*
    fn power(cur: &mut Cursor) -> Result<ExprNode, ParseError> {
        let mut base = atom(cur)?;
        while cur.peek() == Some(b'^') {
            cur.bump();
            base = ExprNode::IntPow(Box::new(base), exponent(cur)?);
        }
        Ok(base)
    }

    fn exponent(cur: &mut Cursor) -> Result<i32, ParseError> {
        cur.skip_ws();
        let start = cur.pos;
        let neg = if cur.peek() == Some(b'-') {
            cur.bump();
            true
        } else {
            false
        };
        cur.skip_ws();
        let digits_start = cur.pos;
        while cur.pos < cur.src.len() && cur.src[cur.pos].is_ascii_digit() {
            cur.pos += 1;
        }
        if cur.pos == digits_start {
            return Err(ParseError {
                offset: start,
                kind: ParseErrorKind::NonIntegerExponent,
            });
        }
        // A fractional or float-style exponent is rejected, not truncated.
        if matches!(cur.src.get(cur.pos), Some(b'.') | Some(b'e') | Some(b'E')) {
            return Err(ParseError {
                offset: start,
                kind: ParseErrorKind::NonIntegerExponent,
            });
        }
        let text = core::str::from_utf8(&cur.src[digits_start..cur.pos]).unwrap();
        let mag: i32 = text.parse().map_err(|_| ParseError {
            offset: start,
            kind: ParseErrorKind::MalformedNumber,
        })?;
        Ok(if neg { -mag } else { mag })
    }

    fn atom(cur: &mut Cursor) -> Result<ExprNode, ParseError> {
        match cur.peek() {
            None => Err(cur.err(ParseErrorKind::UnexpectedEnd)),
            Some(b'(') => {
                cur.bump();
                let inner = expr(cur)?;
                if cur.peek() != Some(b')') {
                    return Err(cur.err(ParseErrorKind::ExpectedClosingParen));
                }
                cur.bump();
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => number(cur),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => ident(cur),
            Some(c) => Err(cur.err(ParseErrorKind::UnexpectedChar(c as char))),
        }
    }

    fn number(cur: &mut Cursor) -> Result<ExprNode, ParseError> {
        cur.skip_ws();
        let start = cur.pos;
        while cur.pos < cur.src.len() && cur.src[cur.pos].is_ascii_digit() {
            cur.pos += 1;
        }
        if cur.src.get(cur.pos) == Some(&b'.') {
            cur.pos += 1;
            let frac_start = cur.pos;
            while cur.pos < cur.src.len() && cur.src[cur.pos].is_ascii_digit() {
                cur.pos += 1;
            }
            if cur.pos == frac_start {
                return Err(ParseError {
                    offset: start,
                    kind: ParseErrorKind::MalformedNumber,
                });
            }
        }
        // Scientific suffix only when it is unambiguously one: `e`/`E`,
        // optional sign, at least one digit.
        if matches!(cur.src.get(cur.pos), Some(b'e') | Some(b'E')) {
            let mut probe = cur.pos + 1;
            if matches!(cur.src.get(probe), Some(b'+') | Some(b'-')) {
                probe += 1;
            }
            if cur.src.get(probe).is_some_and(|c| c.is_ascii_digit()) {
                cur.pos = probe;
                while cur.pos < cur.src.len() && cur.src[cur.pos].is_ascii_digit() {
                    cur.pos += 1;
                }
            }
        }
        let text = core::str::from_utf8(&cur.src[start..cur.pos]).unwrap();
        let value: f64 = text.parse().map_err(|_| ParseError {
            offset: start,
            kind: ParseErrorKind::MalformedNumber,
        })?;
        if cur.src.get(cur.pos) == Some(&b'i') {
            cur.pos += 1;
            Ok(ExprNode::Const(Complex::new(0.0, value)))
        } else {
            Ok(ExprNode::Const(Complex::new(value, 0.0)))
        }
    }

    fn ident(cur: &mut Cursor) -> Result<ExprNode, ParseError> {
        cur.skip_ws();
        let start = cur.pos;
        while cur.pos < cur.src.len()
            && (cur.src[cur.pos].is_ascii_alphanumeric() || cur.src[cur.pos] == b'_')
        {
            cur.pos += 1;
        }
        let name = core::str::from_utf8(&cur.src[start..cur.pos]).unwrap();
        match name {
            "z" => Ok(ExprNode::Var),
            "i" => Ok(ExprNode::Const(Complex::new(0.0, 1.0))),
            "exp" => {
                if cur.peek() != Some(b'(') {
                    return Err(ParseError {
                        offset: cur.pos,
                        kind: ParseErrorKind::ExpectedOperand,
                    });
                }
                cur.bump();
                let arg = expr(cur)?;
                if cur.peek() != Some(b')') {
                    return Err(cur.err(ParseErrorKind::ExpectedClosingParen));
                }
                cur.bump();
                Ok(ExprNode::Exp(Box::new(arg)))
            }
            _ => {
                // Any other identifier directly applied to `(` is a call to
                // a function this language does not have.
                if cur.peek() == Some(b'(') {
                    return Err(ParseError {
                        offset: start,
                        kind: ParseErrorKind::UnknownFunction(name.to_owned()),
                    });
                }
                Ok(ExprNode::Param(name.to_owned()))
            }
        }
    }
}
