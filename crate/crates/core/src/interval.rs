//! Outward-rounded interval arithmetic over the expression language, and
//! certified sign decisions built on it.
//!
//! Rounding model: every endpoint operation is computed in round-to-nearest
//! and then stepped one representable float outward (two for `exp`, whose
//! libm implementation is faithful to within one ulp). Directed-rounding
//! mode switches are deliberately avoided; ulp-stepping gives the same
//! enclosures on every platform.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::expr::{EvalError, ExprNode, MapExpr};
use crate::math::{exp, ulp_down, ulp_up};

/// Default subdivision budget for [`certify_sign`].
pub const DEFAULT_MAX_DEPTH: u32 = 40;

/// A closed real interval with finite endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    /// Panics when `lo > hi` or an endpoint is not finite.
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(
            lo <= hi && lo.is_finite() && hi.is_finite(),
            "invalid interval [{lo}, {hi}]"
        );
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval::new(x, x)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        self.lo * 0.5 + self.hi * 0.5
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    fn straddles_zero(&self) -> bool {
        self.lo <= 0.0 && 0.0 <= self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum IntervalError {
    /// Division by an interval containing zero. Carries the printed divisor
    /// so callers know what to subdivide around.
    DivisionByZero { subexpr: String },
    /// An endpoint left the finite range (e.g. `exp` of a huge interval).
    Overflow,
    /// The expression contains a constant or parameter with nonzero
    /// imaginary part; interval evaluation is real-only.
    NonReal(String),
    UnboundParam(String),
}

impl fmt::Display for IntervalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntervalError::DivisionByZero { subexpr } => {
                write!(f, "division by an interval containing zero: `{subexpr}`")
            }
            IntervalError::Overflow => f.write_str("interval endpoint overflow"),
            IntervalError::NonReal(what) => write!(f, "non-real value in interval context: {what}"),
            IntervalError::UnboundParam(name) => write!(f, "unbound parameter `{name}`"),
        }
    }
}

impl core::error::Error for IntervalError {}

impl From<EvalError> for IntervalError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::UnboundParam(n) => IntervalError::UnboundParam(n),
            EvalError::NonRealValue(w) => IntervalError::NonReal(w),
        }
    }
}

fn check(lo: f64, hi: f64) -> Result<Interval, IntervalError> {
    if lo.is_finite() && hi.is_finite() {
        Ok(Interval { lo, hi })
    } else {
        Err(IntervalError::Overflow)
    }
}

fn add(a: Interval, b: Interval) -> Result<Interval, IntervalError> {
    check(ulp_down(a.lo + b.lo), ulp_up(a.hi + b.hi))
}

fn sub(a: Interval, b: Interval) -> Result<Interval, IntervalError> {
    check(ulp_down(a.lo - b.hi), ulp_up(a.hi - b.lo))
}

fn mul(a: Interval, b: Interval) -> Result<Interval, IntervalError> {
    let p = [a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi];
    let mut lo = p[0];
    let mut hi = p[0];
    for &v in &p[1..] {
        if v < lo {
            lo = v;
        }
        if v > hi {
            hi = v;
        }
    }
    check(ulp_down(lo), ulp_up(hi))
}

fn div(a: Interval, b: Interval, divisor: &ExprNode) -> Result<Interval, IntervalError> {
    if b.straddles_zero() {
        return Err(IntervalError::DivisionByZero {
            subexpr: divisor.to_string(),
        });
    }
    let p = [a.lo / b.lo, a.lo / b.hi, a.hi / b.lo, a.hi / b.hi];
    let mut lo = p[0];
    let mut hi = p[0];
    for &v in &p[1..] {
        if v < lo {
            lo = v;
        }
        if v > hi {
            hi = v;
        }
    }
    check(ulp_down(lo), ulp_up(hi))
}

fn neg(a: Interval) -> Interval {
    // Negation is exact; no outward step.
    Interval {
        lo: -a.hi,
        hi: -a.lo,
    }
}

/// Enclosure of a point raised to a nonnegative power, by repeated
/// squaring in interval arithmetic.
fn point_pow(x: f64, n: u32) -> Result<Interval, IntervalError> {
    let mut acc = Interval::point(1.0);
    let mut sq = Interval::point(x);
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            acc = mul(acc, sq)?;
        }
        k >>= 1;
        if k > 0 {
            sq = mul(sq, sq)?;
        }
    }
    Ok(acc)
}

/// Integer power with even/odd case analysis rather than repeated interval
/// multiplication: `x^8` on a negative interval must not balloon through
/// the sign-straddling products.
fn ipow(x: Interval, n: i32, base_expr: &ExprNode) -> Result<Interval, IntervalError> {
    if n == 0 {
        return Ok(Interval::point(1.0));
    }
    let m = n.unsigned_abs();
    let nonneg = if m % 2 == 1 {
        // Odd powers are monotone.
        let lo = point_pow(x.lo, m)?;
        let hi = point_pow(x.hi, m)?;
        Interval {
            lo: lo.lo,
            hi: hi.hi,
        }
    } else if x.lo >= 0.0 {
        let lo = point_pow(x.lo, m)?;
        let hi = point_pow(x.hi, m)?;
        Interval {
            lo: lo.lo,
            hi: hi.hi,
        }
    } else if x.hi <= 0.0 {
        let lo = point_pow(x.hi, m)?;
        let hi = point_pow(x.lo, m)?;
        Interval {
            lo: lo.lo,
            hi: hi.hi,
        }
    } else {
        let a = point_pow(x.lo, m)?;
        let b = point_pow(x.hi, m)?;
        Interval {
            lo: 0.0,
            hi: a.hi.max(b.hi),
        }
    };
    if n < 0 {
        div(Interval::point(1.0), nonneg, base_expr)
    } else {
        check(nonneg.lo, nonneg.hi)
    }
}

/// `exp` endpoints get two outward ulp steps: one for rounding of the
/// faithful libm result, one for its approximation error.
fn iexp(a: Interval) -> Result<Interval, IntervalError> {
    let lo = ulp_down(ulp_down(exp(a.lo))).max(0.0);
    let hi = ulp_up(ulp_up(exp(a.hi)));
    check(lo, hi)
}

fn ieval_node(
    n: &ExprNode,
    x: Interval,
    params: &alloc::collections::BTreeMap<String, crate::Complex>,
) -> Result<Interval, IntervalError> {
    match n {
        ExprNode::Const(c) => {
            if c.im != 0.0 {
                Err(IntervalError::NonReal(alloc::format!("constant {c}")))
            } else {
                Ok(Interval::point(c.re))
            }
        }
        ExprNode::Var => Ok(x),
        ExprNode::Param(name) => {
            let v = params
                .get(name)
                .ok_or_else(|| IntervalError::UnboundParam(name.clone()))?;
            if v.im != 0.0 {
                Err(IntervalError::NonReal(alloc::format!(
                    "parameter `{name}` = {v}"
                )))
            } else {
                Ok(Interval::point(v.re))
            }
        }
        ExprNode::Add(a, b) => add(ieval_node(a, x, params)?, ieval_node(b, x, params)?),
        ExprNode::Sub(a, b) => sub(ieval_node(a, x, params)?, ieval_node(b, x, params)?),
        ExprNode::Mul(a, b) => mul(ieval_node(a, x, params)?, ieval_node(b, x, params)?),
        ExprNode::Div(a, b) => div(ieval_node(a, x, params)?, ieval_node(b, x, params)?, b),
        ExprNode::Neg(a) => Ok(neg(ieval_node(a, x, params)?)),
        ExprNode::IntPow(a, k) => ipow(ieval_node(a, x, params)?, *k, a),
        ExprNode::Exp(a) => iexp(ieval_node(a, x, params)?),
    }
}

/// Interval evaluation: returns an enclosure of the image of `x` under `e`.
pub fn ieval(e: &MapExpr, x: Interval) -> Result<Interval, IntervalError> {
    ieval_node(&e.root, x, &e.params)
}

// ---------------------------------------------------------------------------
// Certified signs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignVerdict {
    Positive,
    Negative,
    Indeterminate,
}

impl fmt::Display for SignVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignVerdict::Positive => "Positive",
            SignVerdict::Negative => "Negative",
            SignVerdict::Indeterminate => "Indeterminate",
        })
    }
}

/// One step of a sign cascade: at derivative order `order`, the certified
/// sign of the derivative at `endpoint` combined with the already-known
/// sign one order up yields `interval_sign` on the whole domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeStep {
    pub order: u32,
    pub endpoint: f64,
    pub endpoint_sign: SignVerdict,
    pub interval_sign: SignVerdict,
}

/// A replayable record of a sign decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignCertificate {
    pub target: MapExpr,
    pub domain: Interval,
    pub verdict: SignVerdict,
    /// Number of bisections performed.
    pub subdivisions: u32,
    /// Number of leaf subintervals examined.
    pub leaves: u32,
    pub max_depth_hit: bool,
    /// Present only when produced by [`cascade_sign`].
    pub cascade_trace: Vec<CascadeStep>,
}

/// Certify the sign of `e` on `x` by adaptive bisection. A verdict of
/// `Positive` means interval evaluation proved `e > 0` on every leaf
/// subinterval (symmetrically for `Negative`); `Indeterminate` means the
/// subdivision budget ran out or the function genuinely changes sign.
pub fn certify_sign(
    e: &MapExpr,
    x: Interval,
    max_depth: u32,
) -> Result<SignCertificate, IntervalError> {
    assert!(max_depth >= 1, "max_depth must be at least 1");
    let mut stack: Vec<(Interval, u32)> = alloc::vec![(x, 0)];
    let mut any_pos = false;
    let mut any_neg = false;
    let mut any_undecided = false;
    let mut max_depth_hit = false;
    let mut subdivisions: u32 = 0;
    let mut leaves: u32 = 0;

    while let Some((leaf, depth)) = stack.pop() {
        let splittable = depth < max_depth && leaf.width() > 0.0;
        match ieval_node(&e.root, leaf, &e.params) {
            Ok(enc) => {
                if enc.lo > 0.0 {
                    any_pos = true;
                    leaves += 1;
                } else if enc.hi < 0.0 {
                    any_neg = true;
                    leaves += 1;
                } else if splittable {
                    let m = leaf.midpoint();
                    subdivisions += 1;
                    stack.push((Interval::new(leaf.lo, m), depth + 1));
                    stack.push((Interval::new(m, leaf.hi), depth + 1));
                } else {
                    any_undecided = true;
                    leaves += 1;
                    if depth >= max_depth {
                        max_depth_hit = true;
                    }
                }
            }
            // A division error can often be isolated away from the sign
            // verdict by subdividing; it propagates only when it cannot.
            Err(err @ IntervalError::DivisionByZero { .. }) => {
                if splittable {
                    let m = leaf.midpoint();
                    subdivisions += 1;
                    stack.push((Interval::new(leaf.lo, m), depth + 1));
                    stack.push((Interval::new(m, leaf.hi), depth + 1));
                } else {
                    return Err(err);
                }
            }
            Err(other) => return Err(other),
        }
    }

    let verdict = if !any_undecided && any_pos && !any_neg {
        SignVerdict::Positive
    } else if !any_undecided && any_neg && !any_pos {
        SignVerdict::Negative
    } else {
        SignVerdict::Indeterminate
    };
    Ok(SignCertificate {
        target: e.clone(),
        domain: x,
        verdict,
        subdivisions,
        leaves,
        max_depth_hit,
        cascade_trace: Vec::new(),
    })
}

/// Certify the sign of `e` on `x` through its derivatives.
///
/// The sign of the `order`-th derivative is certified directly by interval
/// bisection. Then, walking orders downward, the sign of the k-th
/// derivative on all of `x` follows from the certified sign of the
/// (k+1)-th derivative on `x` together with the certified sign of the
/// k-th derivative at a single endpoint:
///
///   increasing and nonpositive at the right end  => negative on x,
///   increasing and nonnegative at the left end   => positive on x,
///   decreasing and nonnegative at the right end  => positive on x,
///   decreasing and nonpositive at the left end   => negative on x.
///
/// The right endpoint is tried first; the trace records what was used.
pub fn cascade_sign(
    e: &MapExpr,
    x: Interval,
    order: u32,
    max_depth: u32,
) -> Result<SignCertificate, IntervalError> {
    assert!(order >= 1, "cascade order must be at least 1");
    let mut derivs: Vec<MapExpr> = Vec::with_capacity(order as usize + 1);
    derivs.push(e.clone());
    for _ in 0..order {
        let next = derivs.last().unwrap().differentiate();
        derivs.push(next);
    }

    let top = certify_sign(&derivs[order as usize], x, max_depth)?;
    let mut subdivisions = top.subdivisions;
    let mut leaves = top.leaves;
    let mut max_depth_hit = top.max_depth_hit;
    let mut trace: Vec<CascadeStep> = Vec::new();

    let indeterminate = |trace: Vec<CascadeStep>, subdivisions, leaves, max_depth_hit| {
        Ok(SignCertificate {
            target: e.clone(),
            domain: x,
            verdict: SignVerdict::Indeterminate,
            subdivisions,
            leaves,
            max_depth_hit,
            cascade_trace: trace,
        })
    };

    let mut current = top.verdict;
    if current == SignVerdict::Indeterminate {
        return indeterminate(trace, subdivisions, leaves, max_depth_hit);
    }

    for k in (0..order).rev() {
        let dk = &derivs[k as usize];
        let mut concluded = SignVerdict::Indeterminate;
        let mut used_endpoint = x.hi;
        let mut used_sign = SignVerdict::Indeterminate;
        for &endpoint in &[x.hi, x.lo] {
            let cert = certify_sign(dk, Interval::point(endpoint), max_depth)?;
            subdivisions += cert.subdivisions;
            leaves += cert.leaves;
            max_depth_hit |= cert.max_depth_hit;
            let is_right = endpoint == x.hi;
            concluded = match (current, cert.verdict, is_right) {
                (SignVerdict::Positive, SignVerdict::Negative, true) => SignVerdict::Negative,
                (SignVerdict::Positive, SignVerdict::Positive, false) => SignVerdict::Positive,
                (SignVerdict::Negative, SignVerdict::Positive, true) => SignVerdict::Positive,
                (SignVerdict::Negative, SignVerdict::Negative, false) => SignVerdict::Negative,
                _ => SignVerdict::Indeterminate,
            };
            used_endpoint = endpoint;
            used_sign = cert.verdict;
            if concluded != SignVerdict::Indeterminate {
                break;
            }
        }
        trace.push(CascadeStep {
            order: k,
            endpoint: used_endpoint,
            endpoint_sign: used_sign,
            interval_sign: concluded,
        });
        if concluded == SignVerdict::Indeterminate {
            return indeterminate(trace, subdivisions, leaves, max_depth_hit);
        }
        current = concluded;
    }

    Ok(SignCertificate {
        target: e.clone(),
        domain: x,
        verdict: current,
        subdivisions,
        leaves,
        max_depth_hit,
        cascade_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::DEFAULT_POLE_EPS;

    #[test]
    fn exp_enclosure_is_tight() {
        let e = MapExpr::parse("exp(z)").unwrap();
        let enc = ieval(&e, Interval::new(0.0, 1.0)).unwrap();
        let lo = 1.0;
        let hi = core::f64::consts::E;
        assert!(enc.lo <= lo && hi <= enc.hi);
        // at most 4 ulps of slack, measured at the upper endpoint
        let ulp_at_hi = hi.next_up() - hi;
        assert!(enc.width() <= (hi - lo) + 4.0 * ulp_at_hi);
    }

    #[test]
    fn pole_locus_contains_zero() {
        // e^x + x has a zero in [-1, 0] (the pole of 1/(e^x+x)).
        let e = MapExpr::parse("z+exp(z)").unwrap();
        let enc = ieval(&e, Interval::new(-1.0, 0.0)).unwrap();
        assert!(enc.contains(0.0));
        // endpoint signs straddle
        let at_l = ieval(&e, Interval::point(-1.0)).unwrap();
        let at_r = ieval(&e, Interval::point(0.0)).unwrap();
        assert!(at_l.hi < 0.0 && at_r.lo > 0.0);
    }

    #[test]
    fn point_evaluation_of_polynomial_plus_exp() {
        // scalar oracle at -0.72, frozen from the real evaluation path
        let p = MapExpr::parse("90*z^8+71.28*z^7+2*exp(z)").unwrap();
        let scalar = p
            .eval_real(-0.72, DEFAULT_POLE_EPS)
            .unwrap()
            .finite()
            .unwrap()
            .re;
        let enc = ieval(&p, Interval::point(-0.72)).unwrap();
        assert!(enc.contains(scalar));
        assert!(enc.contains(0.32352078924208090));
        assert!(enc.width() < 1e-12);
    }

    #[test]
    fn division_by_straddling_interval_names_the_divisor() {
        let e = MapExpr::parse("1/(z+exp(z))").unwrap();
        match ieval(&e, Interval::new(-1.0, 0.0)) {
            Err(IntervalError::DivisionByZero { subexpr }) => {
                assert_eq!(subexpr, "z+exp(z)");
            }
            other => panic!("expected division error, got {other:?}"),
        }
    }

    #[test]
    fn certify_one_plus_exp_positive() {
        let e = MapExpr::parse("1+exp(z)").unwrap();
        let cert = certify_sign(&e, Interval::new(-5.0, 5.0), DEFAULT_MAX_DEPTH).unwrap();
        assert_eq!(cert.verdict, SignVerdict::Positive);
    }

    #[test]
    fn sign_table_of_the_multiplier_numerator() {
        // phi(x) = e^x (1-x) / (e^x + x)^2: positive before 1, zero at 1,
        // negative after.
        let phi = MapExpr::parse("exp(z)*(1-z)/(exp(z)+z)^2").unwrap();
        let pos = certify_sign(&phi, Interval::new(0.0, 0.99), DEFAULT_MAX_DEPTH).unwrap();
        assert_eq!(pos.verdict, SignVerdict::Positive);
        let neg = certify_sign(&phi, Interval::new(1.5, 10.0), DEFAULT_MAX_DEPTH).unwrap();
        assert_eq!(neg.verdict, SignVerdict::Negative);
        // At the zero itself no sign can be certified; the enclosure is a
        // tight straddle of 0.
        let at_one = certify_sign(&phi, Interval::point(1.0), DEFAULT_MAX_DEPTH).unwrap();
        assert_eq!(at_one.verdict, SignVerdict::Indeterminate);
        let enc = ieval(&phi, Interval::point(1.0)).unwrap();
        assert!(enc.contains(0.0) && enc.width() < 1e-12);
    }

    #[test]
    fn cascade_on_linear_decreasing_function() {
        // q(x) = -x on [1,2]: q' = -1 < 0 and q < 0 at the left endpoint.
        let q = MapExpr::parse("-z").unwrap();
        let cert = cascade_sign(&q, Interval::new(1.0, 2.0), 1, DEFAULT_MAX_DEPTH).unwrap();
        assert_eq!(cert.verdict, SignVerdict::Negative);
        assert_eq!(cert.cascade_trace.len(), 1);
    }

    #[test]
    fn cascade_on_exp_is_positive() {
        let e = MapExpr::parse("exp(z)").unwrap();
        let cert = cascade_sign(&e, Interval::new(-3.0, 2.0), 1, DEFAULT_MAX_DEPTH).unwrap();
        assert_eq!(cert.verdict, SignVerdict::Positive);
    }

    #[test]
    fn cascade_certifies_p_positive_with_alternating_trace() {
        let p = MapExpr::parse("90*z^8+71.28*z^7+2*exp(z)").unwrap();
        let cert = cascade_sign(&p, Interval::new(-0.792, -0.72), 8, DEFAULT_MAX_DEPTH).unwrap();
        assert_eq!(cert.verdict, SignVerdict::Positive);
        // endpoint signs at t = -0.72 for orders 7 down to 0: - + - + - + - +
        let expect = [
            SignVerdict::Negative,
            SignVerdict::Positive,
            SignVerdict::Negative,
            SignVerdict::Positive,
            SignVerdict::Negative,
            SignVerdict::Positive,
            SignVerdict::Negative,
            SignVerdict::Positive,
        ];
        assert_eq!(cert.cascade_trace.len(), 8);
        for (step, want) in cert.cascade_trace.iter().zip(expect) {
            assert_eq!(step.endpoint_sign, want, "at order {}", step.order);
            assert_eq!(step.endpoint, -0.72);
        }
        let orders: Vec<u32> = cert.cascade_trace.iter().map(|s| s.order).collect();
        assert_eq!(orders, [7, 6, 5, 4, 3, 2, 1, 0]);
    }

    #[test]
    fn inclusion_monotonicity_spot_check() {
        let e = MapExpr::parse("exp(z)*(1-z)/(exp(z)+z)^2").unwrap();
        let outer = Interval::new(0.5, 3.0);
        let inner = Interval::new(1.0, 2.0);
        let eo = ieval(&e, outer).unwrap();
        let ei = ieval(&e, inner).unwrap();
        assert!(eo.contains_interval(&ei));
    }
}
