//! Distinguished points of a map: real poles and fixed points by bracketed
//! bisection, periodic points by Newton refinement, multipliers by the
//! chain rule, and critical sets (closed form and Newton-hunted).

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::basin::Rect;
use crate::expr::{EvalError, EvalOutcome, MapExpr};
use crate::interval::Interval;
use crate::math;
use crate::Complex;

pub const ROOT_SCAN_CELLS: u32 = 1024;
pub const ROOT_REFINE_TOL: f64 = 1e-13;
pub const ROOT_DEDUP_TOL: f64 = 1e-10;
/// Bisection limits of pole crossings have huge residuals; genuine roots
/// refined to 1e-13 do not. Anything above this is discarded as a pole
/// artifact.
pub const POLE_ARTIFACT_RESIDUAL: f64 = 1e-3;
pub const NEWTON_MAX_STEPS: u32 = 100;
/// A record's location must satisfy |f^p(loc) - loc| below this.
pub const RECORD_RESIDUAL_TOL: f64 = 1e-9;
/// |.|m| - 1| below this counts as on the unit circle.
pub const UNIT_CIRCLE_TOL: f64 = 1e-6;
/// Largest root-of-unity order searched when classifying parabolic points.
pub const PARABOLIC_Q_MAX: u32 = 64;
/// Residual below which a root of f^2 - x counts as a period-1 point.
pub const TWO_CYCLE_FILTER_TOL: f64 = 1e-8;
pub const CRITICAL_RESIDUAL_TOL: f64 = 1e-10;
pub const CRITICAL_DEDUP_TOL: f64 = 1e-8;

/// Classification of a periodic point by its multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointClass {
    Attracting,
    Repelling,
    Parabolic { q: u32 },
    IrrationallyIndifferent,
    Superattracting,
}

impl core::fmt::Display for PointClass {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            PointClass::Attracting => f.write_str("attracting"),
            PointClass::Repelling => f.write_str("repelling"),
            PointClass::Parabolic { q } => write!(f, "parabolic(q={q})"),
            PointClass::IrrationallyIndifferent => f.write_str("irrationally-indifferent"),
            PointClass::Superattracting => f.write_str("superattracting"),
        }
    }
}

/// A located periodic point with its multiplier and provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointRecord {
    pub location: Complex,
    pub period: u32,
    pub multiplier: Complex,
    pub class: PointClass,
    pub bracket_or_seed: String,
}

impl FixedPointRecord {
    /// The class <-> multiplier invariant, assertable from the fields.
    pub fn class_invariant_holds(&self) -> bool {
        let m = math::cabs(self.multiplier);
        match self.class {
            PointClass::Superattracting => self.multiplier == Complex::new(0.0, 0.0),
            PointClass::Attracting => m < 1.0 && self.multiplier != Complex::new(0.0, 0.0),
            PointClass::Repelling => m > 1.0,
            PointClass::Parabolic { q } => {
                (m - 1.0).abs() < UNIT_CIRCLE_TOL
                    && math::cabs(cpowi(self.multiplier, q) - Complex::new(1.0, 0.0))
                        < UNIT_CIRCLE_TOL
            }
            PointClass::IrrationallyIndifferent => (m - 1.0).abs() < UNIT_CIRCLE_TOL,
        }
    }
}

/// Critical points paired index-wise with their values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalSet {
    pub points: Vec<Complex>,
    pub values: Vec<Complex>,
    /// Search region or closed-form index range, as text.
    pub window: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnalysisError {
    Eval(EvalError),
    /// Newton failed to converge; carries the best iterate seen.
    NewtonDivergence { best: Complex, residual: f64 },
}

impl core::fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            AnalysisError::Eval(e) => write!(f, "{e}"),
            AnalysisError::NewtonDivergence { best, residual } => write!(
                f,
                "Newton refinement diverged; best iterate {best} with residual {residual:e}"
            ),
        }
    }
}

impl core::error::Error for AnalysisError {}

impl From<EvalError> for AnalysisError {
    fn from(e: EvalError) -> Self {
        AnalysisError::Eval(e)
    }
}

fn cpowi(base: Complex, n: u32) -> Complex {
    let mut acc = Complex::new(1.0, 0.0);
    for _ in 0..n {
        acc *= base;
    }
    acc
}

/// Real roots of `e` on `x` by sign-change scanning and bisection.
///
/// The scan uses [`ROOT_SCAN_CELLS`] uniform cells; a missed double root
/// between grid points stays missed — acceptable because the maps under
/// study have well-separated simple roots. Cells whose endpoint values are
/// poles or overflow are skipped, and bisection limits with large residual
/// are dropped as pole-crossing artifacts.
pub fn find_real_roots(
    e: &MapExpr,
    x: Interval,
    max_roots: usize,
) -> Result<Vec<f64>, EvalError> {
    let value = |t: f64| -> Result<Option<f64>, EvalError> {
        Ok(match e.eval_real(t, crate::expr::DEFAULT_POLE_EPS)? {
            EvalOutcome::Finite(v) => Some(v.re),
            _ => None,
        })
    };

    let n = ROOT_SCAN_CELLS;
    let mut roots: Vec<f64> = Vec::new();
    let mut prev_t = x.lo;
    let mut prev_v = value(prev_t)?;
    for i in 1..=n {
        let t = x.lo + (x.hi - x.lo) * (i as f64) / (n as f64);
        let v = value(t)?;
        if let (Some(a), Some(b)) = (prev_v, v) {
            if a == 0.0 {
                roots.push(prev_t);
            } else if a * b < 0.0 {
                if let Some(r) = bisect(&value, prev_t, a, t, b)? {
                    roots.push(r);
                }
            }
        }
        prev_t = t;
        prev_v = v;
    }
    if prev_v == Some(0.0) {
        roots.push(prev_t);
    }

    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < ROOT_DEDUP_TOL);
    roots.truncate(max_roots);
    Ok(roots)
}

fn bisect<F>(value: &F, mut lo: f64, mut flo: f64, mut hi: f64, _fhi: f64) -> Result<Option<f64>, EvalError>
where
    F: Fn(f64) -> Result<Option<f64>, EvalError>,
{
    while hi - lo > ROOT_REFINE_TOL {
        let mid = lo * 0.5 + hi * 0.5;
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = match value(mid)? {
            Some(v) => v,
            None => return Ok(None), // pole inside the bracket
        };
        if fm == 0.0 {
            return Ok(Some(mid));
        }
        if flo * fm < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    let r = lo * 0.5 + hi * 0.5;
    match value(r)? {
        Some(v) if v.abs() < POLE_ARTIFACT_RESIDUAL => Ok(Some(r)),
        _ => Ok(None),
    }
}

fn orbit_points(
    e: &MapExpr,
    z: Complex,
    period: u32,
) -> Result<Option<Vec<Complex>>, EvalError> {
    let mut pts = Vec::with_capacity(period as usize + 1);
    pts.push(z);
    let mut w = z;
    for _ in 0..period {
        match e.eval(w, crate::expr::DEFAULT_POLE_EPS)? {
            EvalOutcome::Finite(v) => {
                w = v;
                pts.push(v);
            }
            _ => return Ok(None),
        }
    }
    Ok(Some(pts))
}

/// Refine an approximately periodic point by Newton on f^period(z) - z,
/// compute the cycle multiplier by the chain rule and classify it.
pub fn analyze_fixed_point(
    e: &MapExpr,
    x0: Complex,
    period: u32,
    provenance: &str,
) -> Result<FixedPointRecord, AnalysisError> {
    assert!(period >= 1);
    let df = e.differentiate();
    let mut z = x0;
    let mut best = x0;
    let mut best_res = f64::INFINITY;

    for _ in 0..NEWTON_MAX_STEPS {
        let pts = match orbit_points(e, z, period)? {
            Some(p) => p,
            None => break, // wandered into a pole; report divergence below
        };
        let fz = pts[period as usize] - z;
        let res = math::cabs(fz);
        if res < best_res {
            best_res = res;
            best = z;
        }
        if res < 1e-13 {
            break;
        }
        // (f^p)'(z) = prod f'(z_i)
        let mut dprod = Complex::new(1.0, 0.0);
        let mut ok = true;
        for &p in &pts[..period as usize] {
            match df.eval(p, crate::expr::DEFAULT_POLE_EPS)? {
                EvalOutcome::Finite(v) => dprod *= v,
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            break;
        }
        let fprime = dprod - Complex::new(1.0, 0.0);
        if math::cabs(fprime) < 1e-300 {
            break;
        }
        let step = fz / fprime;
        z -= step;
        if !z.re.is_finite() || !z.im.is_finite() {
            break;
        }
    }

    // final residual and multiplier at the best iterate
    let z = best;
    let pts = orbit_points(e, z, period)?.ok_or(AnalysisError::NewtonDivergence {
        best,
        residual: best_res,
    })?;
    let res = math::cabs(pts[period as usize] - z);
    if res >= RECORD_RESIDUAL_TOL {
        return Err(AnalysisError::NewtonDivergence {
            best,
            residual: res,
        });
    }
    let mut multiplier = Complex::new(1.0, 0.0);
    for &p in &pts[..period as usize] {
        match df.eval(p, crate::expr::DEFAULT_POLE_EPS)? {
            EvalOutcome::Finite(v) => multiplier *= v,
            _ => {
                return Err(AnalysisError::NewtonDivergence {
                    best,
                    residual: res,
                })
            }
        }
    }

    Ok(FixedPointRecord {
        location: z,
        period,
        multiplier,
        class: classify(multiplier),
        bracket_or_seed: provenance.to_string(),
    })
}

fn classify(m: Complex) -> PointClass {
    if m == Complex::new(0.0, 0.0) {
        return PointClass::Superattracting;
    }
    let mag = math::cabs(m);
    if (mag - 1.0).abs() < UNIT_CIRCLE_TOL {
        for q in 1..=PARABOLIC_Q_MAX {
            if math::cabs(cpowi(m, q) - Complex::new(1.0, 0.0)) < UNIT_CIRCLE_TOL {
                return PointClass::Parabolic { q };
            }
        }
        PointClass::IrrationallyIndifferent
    } else if mag < 1.0 {
        PointClass::Attracting
    } else {
        PointClass::Repelling
    }
}

/// Genuine 2-cycles of `e` on a real interval: roots of f^2(x) - x with
/// the fixed points of f filtered out. Returns the record for the smallest
/// such root, or `None` when there is no 2-cycle on the interval.
pub fn find_two_cycle(
    e: &MapExpr,
    x: Interval,
) -> Result<Option<FixedPointRecord>, AnalysisError> {
    let f2 = e.compose(e);
    let h = MapExpr {
        root: crate::expr::ExprNode::Sub(
            alloc::boxed::Box::new(f2.root.clone()),
            alloc::boxed::Box::new(crate::expr::ExprNode::Var),
        ),
        params: f2.params.clone(),
    };
    let roots = find_real_roots(&h, x, 64)?;
    for r in roots {
        let fixed_residual = match e.eval_real(r, crate::expr::DEFAULT_POLE_EPS)? {
            EvalOutcome::Finite(v) => (v.re - r).abs(),
            _ => continue,
        };
        if fixed_residual < TWO_CYCLE_FILTER_TOL {
            continue; // a period-1 point, not a 2-cycle
        }
        let rec = analyze_fixed_point(
            e,
            Complex::new(r, 0.0),
            2,
            &format!("two-cycle bracket in [{}, {}]", x.lo, x.hi),
        )?;
        return Ok(Some(rec));
    }
    Ok(None)
}

/// Closed-form critical set of the family lambda/(e^z + z): critical
/// points i*pi*(2k+1) with values lambda/(-1 + i*pi*(2k+1)). Every point
/// is verified against the symbolic derivative of the map.
pub fn critical_set_closed_form(
    lambda: Complex,
    k_lo: i64,
    k_hi: i64,
) -> Result<CriticalSet, AnalysisError> {
    assert!(k_lo <= k_hi);
    let f = MapExpr::parse("lambda/(exp(z)+z)")
        .expect("family source is grammatical")
        .with_param("lambda", lambda);
    let df = f.differentiate();
    let mut points = Vec::new();
    let mut values = Vec::new();
    for k in k_lo..=k_hi {
        let zk = Complex::new(0.0, core::f64::consts::PI * (2 * k + 1) as f64);
        let vk = lambda / Complex::new(-1.0, core::f64::consts::PI * (2 * k + 1) as f64);
        if let EvalOutcome::Finite(d) = df.eval(zk, crate::expr::DEFAULT_POLE_EPS)? {
            debug_assert!(
                math::cabs(d) < CRITICAL_RESIDUAL_TOL,
                "closed-form critical point failed verification"
            );
            if math::cabs(d) >= CRITICAL_RESIDUAL_TOL {
                continue;
            }
        }
        points.push(zk);
        values.push(vk);
    }
    Ok(CriticalSet {
        points,
        values,
        window: format!("closed form, k in [{k_lo}, {k_hi}]"),
    })
}

/// Hunt critical points (roots of f') by Newton from a uniform grid of
/// seeds over `window`. Converged roots are deduplicated and paired with
/// their values f(root). Roots outside the window are kept: the window
/// constrains seeds, not results.
pub fn find_critical_points_newton(
    e: &MapExpr,
    window: Rect,
    grid: u32,
) -> Result<CriticalSet, EvalError> {
    assert!(grid >= 4);
    let df = e.differentiate();
    let d2f = df.differentiate();

    let mut found: Vec<Complex> = Vec::new();
    for gy in 0..grid {
        for gx in 0..grid {
            let fx = (gx as f64 + 0.5) / grid as f64;
            let fy = (gy as f64 + 0.5) / grid as f64;
            let seed = Complex::new(
                window.center.re - window.width / 2.0 + fx * window.width,
                window.center.im - window.height / 2.0 + fy * window.height,
            );
            if let Some(root) = newton_root(&df, &d2f, seed)? {
                found.push(root);
            }
        }
    }

    found.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut points: Vec<Complex> = Vec::new();
    'next: for cand in found {
        for kept in &points {
            if math::cabs(cand - *kept) < CRITICAL_DEDUP_TOL {
                continue 'next;
            }
        }
        points.push(cand);
    }

    let mut values = Vec::with_capacity(points.len());
    let mut kept_points = Vec::with_capacity(points.len());
    for p in points {
        if let EvalOutcome::Finite(v) = e.eval(p, crate::expr::DEFAULT_POLE_EPS)? {
            kept_points.push(p);
            values.push(v);
        }
    }

    Ok(CriticalSet {
        points: kept_points,
        values,
        window: format!(
            "newton seeds on {}x{} grid over center ({}, {}), {}x{}",
            grid, grid, window.center.re, window.center.im, window.width, window.height
        ),
    })
}

fn newton_root(df: &MapExpr, d2f: &MapExpr, seed: Complex) -> Result<Option<Complex>, EvalError> {
    let mut z = seed;
    for _ in 0..NEWTON_MAX_STEPS {
        let v = match df.eval(z, crate::expr::DEFAULT_POLE_EPS)? {
            EvalOutcome::Finite(v) => v,
            _ => return Ok(None),
        };
        if math::cabs(v) < CRITICAL_RESIDUAL_TOL {
            return Ok(Some(z));
        }
        let d = match d2f.eval(z, crate::expr::DEFAULT_POLE_EPS)? {
            EvalOutcome::Finite(d) => d,
            _ => return Ok(None),
        };
        if math::cabs(d) < 1e-300 {
            return Ok(None);
        }
        let step = v / d;
        z -= step;
        if !z.re.is_finite() || !z.im.is_finite() || math::cabs(z) > 1e8 {
            return Ok(None);
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::DEFAULT_POLE_EPS;

    fn f_lambda(lam: f64) -> MapExpr {
        MapExpr::parse("lambda/(exp(z)+z)")
            .unwrap()
            .with_real_param("lambda", lam)
    }

    #[test]
    fn pole_of_f_by_bisection() {
        let e = MapExpr::parse("exp(z)+z").unwrap();
        let roots = find_real_roots(&e, Interval::new(-1.0, 0.0), 8).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - (-0.5671432904097838)).abs() < 1e-12);
    }

    #[test]
    fn fixed_points_of_f_on_the_real_line() {
        // f(x) - x with f = 1/(e^x+x); positive fixed point near 0.478 and
        // negative fixed point near -1.1676 (both bisection oracles).
        let g = MapExpr::parse("1/(exp(z)+z)-z").unwrap();
        let pos = find_real_roots(&g, Interval::new(0.0, 1.0), 8).unwrap();
        assert_eq!(pos.len(), 1);
        assert!((pos[0] - 0.4781723972404880).abs() < 1e-10);
        let neg = find_real_roots(&g, Interval::new(-1.5, -1.0), 8).unwrap();
        assert_eq!(neg.len(), 1);
        assert!((neg[0] - (-1.1675855268127522)).abs() < 1e-10);
    }

    #[test]
    fn no_sign_change_means_no_roots() {
        let e = MapExpr::parse("z").unwrap();
        let roots = find_real_roots(&e, Interval::new(1.0, 2.0), 8).unwrap();
        assert!(roots.is_empty());
    }

    #[test]
    fn pole_crossings_are_not_roots() {
        // f3(x) - x changes sign across the pole of f3 at ~-0.9044; the
        // scan over [-3, 3] must report exactly the two genuine fixed
        // points.
        let g = MapExpr::parse("0.1/(z^9+exp(z))-0.99-z").unwrap();
        let roots = find_real_roots(&g, Interval::new(-3.0, 3.0), 16).unwrap();
        assert_eq!(roots.len(), 2, "roots: {roots:?}");
        assert!((roots[0] - (-1.0624770649299284)).abs() < 1e-9);
        assert!((roots[1] - (-0.7436148768575142)).abs() < 1e-9);
    }

    #[test]
    fn attracting_fixed_point_of_the_small_lambda_regime() {
        let e = f_lambda(0.04);
        let g = MapExpr::parse("lambda/(exp(z)+z)-z")
            .unwrap()
            .with_real_param("lambda", 0.04);
        let roots = find_real_roots(&g, Interval::new(0.0, 1.0), 8).unwrap();
        assert_eq!(roots.len(), 1);
        let rec =
            analyze_fixed_point(&e, Complex::new(roots[0], 0.0), 1, "bracket (0,1)").unwrap();
        assert_eq!(rec.class, PointClass::Attracting);
        assert!((rec.multiplier.re - (-0.0705240170302036)).abs() < 1e-9);
        assert_eq!(rec.multiplier.im, 0.0);
        assert!(rec.multiplier.re > -1.0 && rec.multiplier.re < 0.0);
        assert!(rec.class_invariant_holds());
    }

    #[test]
    fn parabolic_fixed_point_of_the_half_family() {
        // lambda*(1/(z+e^z)-1) at lambda = 1/2: multiplier exactly -1.
        let e = MapExpr::parse("lambda*(1/(z+exp(z))-1)")
            .unwrap()
            .with_real_param("lambda", 0.5);
        let rec = analyze_fixed_point(&e, Complex::new(0.0, 0.0), 1, "origin").unwrap();
        assert_eq!(rec.location, Complex::new(0.0, 0.0));
        assert_eq!(rec.multiplier, Complex::new(-1.0, 0.0));
        assert_eq!(rec.class, PointClass::Parabolic { q: 2 });
        assert!(rec.class_invariant_holds());
    }

    #[test]
    fn siegel_multiplier_is_irrationally_indifferent() {
        // lambda = e^{2 pi i t}/(-2) with t the golden rotation number.
        let t = (math::sqrt(5.0) - 1.0) / 2.0;
        let theta = 2.0 * core::f64::consts::PI * t;
        let lam = Complex::new(math::cos(theta), math::sin(theta)) / Complex::new(-2.0, 0.0);
        let e = MapExpr::parse("lambda*(1/(z+exp(z))-1)")
            .unwrap()
            .with_param("lambda", lam);
        let rec = analyze_fixed_point(&e, Complex::new(0.0, 0.0), 1, "origin").unwrap();
        assert_eq!(rec.class, PointClass::IrrationallyIndifferent);
        assert!((math::cabs(rec.multiplier) - 1.0).abs() < 1e-12);
        assert!(rec.class_invariant_holds());
    }

    #[test]
    fn two_attracting_fixed_points_with_multiplier_identity() {
        // 0.1/(z^9+e^z) - 0.99: fixed points in [-0.904, -0.72] and
        // [-1.069, -1], multipliers matching -10(x+0.99)^2 (9x^8+e^x).
        let e = MapExpr::parse("0.1/(z^9+exp(z))-0.99").unwrap();
        let g = MapExpr::parse("0.1/(z^9+exp(z))-0.99-z").unwrap();
        let in_a = find_real_roots(&g, Interval::new(-0.904, -0.72), 4).unwrap();
        let in_b = find_real_roots(&g, Interval::new(-1.069, -1.0), 4).unwrap();
        assert_eq!((in_a.len(), in_b.len()), (1, 1));
        let h = MapExpr::parse("10*(z+0.99)^2*(9*z^8+exp(z))").unwrap();
        for (root, bracket) in [(in_a[0], "[-0.904,-0.72]"), (in_b[0], "[-1.069,-1]")] {
            let rec = analyze_fixed_point(&e, Complex::new(root, 0.0), 1, bracket).unwrap();
            assert_eq!(rec.class, PointClass::Attracting);
            let hval = h
                .eval_real(rec.location.re, DEFAULT_POLE_EPS)
                .unwrap()
                .finite()
                .unwrap()
                .re;
            assert!(
                math::cabs(rec.multiplier - Complex::new(-hval, 0.0)) < 1e-8,
                "chain rule {} vs closed form {}",
                rec.multiplier,
                -hval
            );
            let mag = math::cabs(rec.multiplier);
            assert!(mag > 0.0 && mag < 1.0);
        }
    }

    #[test]
    fn two_cycle_above_the_threshold() {
        let e = f_lambda(4.0);
        let rec = find_two_cycle(&e, Interval::new(0.0, 1.0)).unwrap().unwrap();
        assert_eq!(rec.period, 2);
        assert!((rec.location.re - 0.23133854400935460).abs() < 1e-9);
        // cycle partner f(a1) > 1
        let partner = e
            .eval(rec.location, DEFAULT_POLE_EPS)
            .unwrap()
            .finite()
            .unwrap();
        assert!(partner.re > 1.0);
        assert!((partner.re - 2.6816402783195895).abs() < 1e-8);
        assert!(math::cabs(rec.multiplier) <= 1.0 + 1e-9);
        assert!((rec.multiplier.re - 0.8486263507576732).abs() < 1e-8);
    }

    #[test]
    fn no_two_cycle_in_the_attracting_regime() {
        // lambda = 0.04 on (0,1): the only root of f^2(x)-x is the fixed
        // point, which is filtered out. Oracle: dense sampling of
        // f^2(x)-x finds a single sign change, at x_lambda.
        let e = f_lambda(0.04);
        let rec = find_two_cycle(&e, Interval::new(1e-6, 1.0)).unwrap();
        assert!(rec.is_none());
    }

    #[test]
    fn constant_sign_interval_has_no_two_cycle() {
        // f(x) = x + 1: f^2(x) - x = 2 > 0 everywhere.
        let e = MapExpr::parse("z+1").unwrap();
        let rec = find_two_cycle(&e, Interval::new(0.0, 1.0)).unwrap();
        assert!(rec.is_none());
    }

    #[test]
    fn closed_form_critical_values() {
        let lam = Complex::new(0.04, 0.0);
        let cs = critical_set_closed_form(lam, -1, 0).unwrap();
        assert_eq!(cs.points.len(), 2);
        // k = 0: i*pi with value lambda/(-1+i*pi)
        let pi = core::f64::consts::PI;
        assert_eq!(cs.points[1], Complex::new(0.0, pi));
        let v0 = cs.values[1];
        assert!((math::cabs(v0) - 0.04 / math::sqrt(1.0 + pi * pi)).abs() < 1e-15);
        // k = -1 is the conjugate with the same modulus
        assert_eq!(cs.points[0], Complex::new(0.0, -pi));
        assert!((math::cabs(cs.values[0]) - math::cabs(v0)).abs() < 1e-18);
    }

    #[test]
    fn closed_form_values_accumulate_at_zero() {
        let lam = Complex::new(0.04, 0.0);
        let cs = critical_set_closed_form(lam, 0, 100).unwrap();
        let m10 = math::cabs(cs.values[10]);
        let m100 = math::cabs(cs.values[100]);
        assert!(m100 < m10);
        // strictly decreasing in k >= 0
        for w in cs.values.windows(2) {
            assert!(math::cabs(w[1]) < math::cabs(w[0]));
        }
    }

    #[test]
    fn newton_finds_the_first_two_critical_points() {
        let e = f_lambda(1.0);
        let window = Rect::from_corners(-1.0, 1.0, 0.0, 7.0);
        let cs = find_critical_points_newton(&e, window, 32).unwrap();
        let pi = core::f64::consts::PI;
        for target in [Complex::new(0.0, pi), Complex::new(0.0, 3.0 * pi)] {
            assert!(
                cs.points.iter().any(|p| math::cabs(*p - target) < 1e-7),
                "missing critical point near {target}",
            );
        }
    }

    #[test]
    fn newton_on_quadratic_exponential_family() {
        // critical points of 1/(z^2+e^z) are the roots of 2z+e^z; the only
        // real one is near -0.3517337 (bisection oracle).
        let e = MapExpr::parse("1/(z^2+exp(z))").unwrap();
        let cs =
            find_critical_points_newton(&e, Rect::from_corners(-2.0, 0.0, -1.0, 1.0), 16).unwrap();
        assert!(cs
            .points
            .iter()
            .any(|p| (p.re - (-0.3517337112491958)).abs() < 1e-8 && p.im.abs() < 1e-8));
    }

    #[test]
    fn map_without_critical_points_yields_empty_set() {
        let e = MapExpr::parse("z").unwrap();
        let cs =
            find_critical_points_newton(&e, Rect::from_corners(-1.0, 1.0, -1.0, 1.0), 8).unwrap();
        assert!(cs.points.is_empty());
    }
}
