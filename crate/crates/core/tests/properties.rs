//! Property suites: enclosure soundness of interval evaluation, inclusion
//! monotonicity, symbolic-vs-finite-difference derivatives, print/parse
//! round trips and sign-certificate soundness against dense sampling.

use bovdyn_core::expr::{ExprNode, MapExpr, DEFAULT_POLE_EPS};
use bovdyn_core::interval::{certify_sign, ieval, Interval, SignVerdict, DEFAULT_MAX_DEPTH};
use bovdyn_core::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gen_node(rng: &mut ChaCha8Rng, depth: u32) -> ExprNode {
    if depth == 0 {
        return match rng.gen_range(0..3) {
            0 => ExprNode::Var,
            1 => ExprNode::Const(Complex::new(rng.gen_range(0.0..3.0), 0.0)),
            _ => ExprNode::Const(Complex::new(rng.gen_range(0.0..1.0), 0.0)),
        };
    }
    match rng.gen_range(0..9) {
        0 => ExprNode::Add(
            Box::new(gen_node(rng, depth - 1)),
            Box::new(gen_node(rng, depth - 1)),
        ),
        1 => ExprNode::Sub(
            Box::new(gen_node(rng, depth - 1)),
            Box::new(gen_node(rng, depth - 1)),
        ),
        2 => ExprNode::Mul(
            Box::new(gen_node(rng, depth - 1)),
            Box::new(gen_node(rng, depth - 1)),
        ),
        3 => ExprNode::Div(
            Box::new(gen_node(rng, depth - 1)),
            Box::new(gen_node(rng, depth - 1)),
        ),
        4 => ExprNode::Neg(Box::new(gen_node(rng, depth - 1))),
        5 => ExprNode::IntPow(Box::new(gen_node(rng, depth - 1)), rng.gen_range(-2..=4)),
        6 => ExprNode::Exp(Box::new(gen_node(rng, depth - 1))),
        _ => gen_node(rng, 0),
    }
}

fn gen_interval(rng: &mut ChaCha8Rng) -> Interval {
    let lo = rng.gen_range(-3.0..2.5);
    let w = rng.gen_range(0.0..1.5);
    Interval::new(lo, lo + w)
}

/// 1000 random (expression, interval, sample points) cases: whenever the
/// interval evaluation succeeds, every sampled scalar value lies inside
/// the returned enclosure.
#[test]
fn enclosure_property_thousand_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xB07D);
    let mut accepted = 0u32;
    let mut attempts = 0u32;
    while accepted < 1000 {
        attempts += 1;
        assert!(attempts < 50_000, "generator starved");
        let e = MapExpr::new(gen_node(&mut rng, 4));
        let x = gen_interval(&mut rng);
        let enc = match ieval(&e, x) {
            Ok(enc) => enc,
            Err(_) => continue, // division straddle or overflow: resample
        };
        let mut checked = false;
        for k in 0..16 {
            let t = x.lo + x.width() * (k as f64 + 0.5) / 16.0;
            if let Ok(out) = e.eval_real(t, DEFAULT_POLE_EPS) {
                if let Some(v) = out.finite() {
                    assert!(
                        enc.contains(v.re),
                        "value {} at {} outside {} for `{}` on {}",
                        v.re,
                        t,
                        enc,
                        e,
                        x
                    );
                    checked = true;
                }
            }
        }
        if checked {
            accepted += 1;
        }
    }
}

/// x ⊆ y implies ieval(e, x) ⊆ ieval(e, y), on random nests.
#[test]
fn inclusion_monotonicity_on_random_nests() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut accepted = 0u32;
    let mut attempts = 0u32;
    while accepted < 400 {
        attempts += 1;
        assert!(attempts < 50_000, "generator starved");
        let e = MapExpr::new(gen_node(&mut rng, 4));
        let outer = gen_interval(&mut rng);
        let a = rng.gen_range(0.0..1.0);
        let b = rng.gen_range(0.0..1.0);
        let (lo_f, hi_f) = if a <= b { (a, b) } else { (b, a) };
        let inner = Interval::new(
            outer.lo + lo_f * outer.width(),
            outer.lo + hi_f * outer.width(),
        );
        let (outer_enc, inner_enc) = match (ieval(&e, outer), ieval(&e, inner)) {
            (Ok(o), Ok(i)) => (o, i),
            _ => continue,
        };
        assert!(
            outer_enc.contains_interval(&inner_enc),
            "`{}`: {} on {} not inside {} on {}",
            e,
            inner_enc,
            inner,
            outer_enc,
            outer
        );
        accepted += 1;
    }
}

/// Symbolic derivatives agree with central finite differences at random
/// points kept away from poles, for the maps under study.
#[test]
fn symbolic_derivative_matches_finite_differences() {
    let maps = [
        MapExpr::parse("lambda/(exp(z)+z)")
            .unwrap()
            .with_real_param("lambda", 0.04),
        MapExpr::parse("lambda/(exp(z)+z)")
            .unwrap()
            .with_real_param("lambda", 4.0),
        MapExpr::parse("0.1/(z^9+exp(z))-0.99").unwrap(),
        MapExpr::parse("lambda*(1/(z+exp(z))-1)")
            .unwrap()
            .with_real_param("lambda", 0.5),
        MapExpr::parse("exp(z)*(1-z)/(exp(z)+z)^2").unwrap(),
        MapExpr::parse("90*z^8+71.28*z^7+2*exp(z)").unwrap(),
    ];
    let h = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    for map in &maps {
        let d = map.differentiate();
        let mut accepted = 0u32;
        let mut attempts = 0u32;
        while accepted < 100 {
            attempts += 1;
            assert!(attempts < 20_000, "sampling starved for {map}");
            let z = Complex::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let fp = map.eval(z + Complex::new(h, 0.0), DEFAULT_POLE_EPS);
            let fm = map.eval(z - Complex::new(h, 0.0), DEFAULT_POLE_EPS);
            let sym = d.eval(z, DEFAULT_POLE_EPS);
            let (fp, fm, sym) = match (fp, fm, sym) {
                (Ok(a), Ok(b), Ok(c)) => match (a.finite(), b.finite(), c.finite()) {
                    (Some(a), Some(b), Some(c)) => (a, b, c),
                    _ => continue,
                },
                _ => continue,
            };
            // stay away from poles, where the stencil degrades
            if fp.norm_sqr() > 1e8 || fm.norm_sqr() > 1e8 || sym.norm_sqr() > 1e8 {
                continue;
            }
            let fd = (fp - fm) / Complex::new(2.0 * h, 0.0);
            let err = (sym - fd).norm_sqr().sqrt() / (1.0 + sym.norm_sqr().sqrt());
            assert!(err < 1e-5, "{map}: at {z}, symbolic {sym} vs fd {fd}");
            accepted += 1;
        }
    }
}

/// Whenever a sign is certified, dense sampling finds no counterexample.
#[test]
fn certified_signs_survive_dense_sampling() {
    let cases = [
        ("exp(z)*(1-z)/(exp(z)+z)^2", Interval::new(0.0, 0.99)),
        ("exp(z)*(1-z)/(exp(z)+z)^2", Interval::new(1.5, 10.0)),
        ("90*z^8+71.28*z^7+2*exp(z)", Interval::new(-0.792, -0.72)),
        ("1+exp(z)", Interval::new(-5.0, 5.0)),
        ("z^2-2", Interval::new(1.5, 3.0)),
        ("z^3-z", Interval::new(-0.9, -0.1)),
    ];
    for (src, dom) in cases {
        let e = MapExpr::parse(src).unwrap();
        let cert = certify_sign(&e, dom, DEFAULT_MAX_DEPTH).unwrap();
        if cert.verdict == SignVerdict::Indeterminate {
            continue;
        }
        for k in 0..10_000 {
            let t = dom.lo + dom.width() * (k as f64 + 0.5) / 10_000.0;
            let v = e
                .eval_real(t, DEFAULT_POLE_EPS)
                .unwrap()
                .finite()
                .expect("no poles on certified domains")
                .re;
            match cert.verdict {
                SignVerdict::Positive => assert!(v > 0.0, "{src} at {t}: {v}"),
                SignVerdict::Negative => assert!(v < 0.0, "{src} at {t}: {v}"),
                SignVerdict::Indeterminate => unreachable!(),
            }
        }
    }
}

// Grammatical constants: nonnegative real or nonnegative imaginary.
fn arb_node() -> impl Strategy<Value = ExprNode> {
    let leaf = prop_oneof![
        Just(ExprNode::Var),
        (0.0..100.0f64).prop_map(|v| ExprNode::Const(Complex::new(v, 0.0))),
        (0.0..10.0f64).prop_map(|v| ExprNode::Const(Complex::new(0.0, v))),
        "[a-w][a-z_0-9]{0,6}"
            .prop_filter("reserved words", |s| s != "i" && s != "exp")
            .prop_map(ExprNode::Param),
    ];
    leaf.prop_recursive(5, 64, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| ExprNode::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| ExprNode::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| ExprNode::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| ExprNode::Div(Box::new(a), Box::new(b))),
            inner.clone().prop_map(|a| ExprNode::Neg(Box::new(a))),
            (inner.clone(), -9i32..=9)
                .prop_map(|(a, k)| ExprNode::IntPow(Box::new(a), k)),
            inner.clone().prop_map(|a| ExprNode::Exp(Box::new(a))),
        ]
    })
}

proptest! {
    /// Printing any tree built from grammatical atoms reparses to a
    /// structurally equal tree.
    #[test]
    fn print_parse_round_trip(root in arb_node()) {
        let e = MapExpr::new(root);
        let printed = e.to_string();
        let reparsed = MapExpr::parse(&printed)
            .unwrap_or_else(|err| panic!("`{printed}` failed to reparse: {err}"));
        prop_assert_eq!(e.root, reparsed.root);
    }
}
