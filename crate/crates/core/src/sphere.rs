//! Pole-aware orbit iteration with spherical-metric bookkeeping.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::expr::{EvalError, EvalOutcome, MapExpr};
use crate::math;
use crate::Complex;

/// A point on the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpherePoint {
    Finite(Complex),
    Infinity,
}

impl From<Complex> for SpherePoint {
    fn from(z: Complex) -> Self {
        SpherePoint::Finite(z)
    }
}

/// Chordal distance 2|a-b| / sqrt((1+|a|^2)(1+|b|^2)), with the usual
/// limit forms at infinity. Symmetric, in [0, 2], zero iff equal.
pub fn chordal_distance(a: SpherePoint, b: SpherePoint) -> f64 {
    match (a, b) {
        (SpherePoint::Infinity, SpherePoint::Infinity) => 0.0,
        (SpherePoint::Finite(z), SpherePoint::Infinity)
        | (SpherePoint::Infinity, SpherePoint::Finite(z)) => {
            2.0 / math::hypot(1.0, math::cabs(z))
        }
        (SpherePoint::Finite(a), SpherePoint::Finite(b)) => {
            let sa = math::hypot(1.0, math::cabs(a));
            let sb = math::hypot(1.0, math::cabs(b));
            2.0 * math::cabs(a - b) / (sa * sb)
        }
    }
}

/// Orbit iteration controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitConfig {
    pub max_iter: u32,
    /// Chordal tolerance for cycle agreement.
    pub conv_eps: f64,
    /// Chordal distance to infinity below which the orbit counts as escaped.
    pub escape_eps: f64,
    /// Largest cycle period the detector looks for.
    pub period_max: u32,
    pub pole_eps: f64,
}

impl Default for OrbitConfig {
    fn default() -> Self {
        OrbitConfig {
            max_iter: 10_000,
            conv_eps: 1e-9,
            escape_eps: 1e-6,
            period_max: 4,
            pole_eps: crate::expr::DEFAULT_POLE_EPS,
        }
    }
}

/// Number of successive agreements required before a cycle is declared.
pub const CONFIRM_WINDOW: u32 = 8;

/// A detected period collapses to a divisor when the cycle points agree
/// within this multiple of `conv_eps`. Orbits spiralling into a fixed
/// point with negative multiplier satisfy the period-2 test slightly
/// before the period-1 test; genuine cycles are separated by far more.
pub const PERIOD_COLLAPSE_FACTOR: f64 = 10.0;

/// The fate of an iterated seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OrbitFate {
    ConvergedToCycle { cycle: Vec<Complex>, period: u32 },
    /// Index of the first orbit point chordally within `escape_eps` of
    /// infinity.
    Escaped { index: u32 },
    /// Index of the orbit point whose image hit a pole.
    PoleHit { index: u32 },
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitResult {
    pub fate: OrbitFate,
    pub iterations_used: u32,
    /// Last finite orbit point.
    pub final_point: Complex,
}

/// Iterate `e` from `seed`, classifying the orbit.
///
/// Cycle detection compares z_n against z_{n-p} for p up to `period_max`
/// (smallest period first) and requires [`CONFIRM_WINDOW`] successive
/// agreements under `conv_eps` in the chordal metric. Orbits that reach
/// the neighbourhood of infinity stop there: iteration past the essential
/// singularity is numerically meaningless. A pole hit terminates the orbit
/// with its own fate, keeping the backward orbit of infinity
/// distinguishable from escape.
pub fn iterate_orbit(
    e: &MapExpr,
    seed: Complex,
    cfg: &OrbitConfig,
) -> Result<OrbitResult, EvalError> {
    let pmax = cfg.period_max.max(1) as usize;
    // history of the last pmax points, most recent last
    let mut history: Vec<Complex> = Vec::with_capacity(pmax + 1);
    history.push(seed);
    let mut agree = alloc::vec![0u32; pmax + 1];
    let mut z = seed;

    for n in 0..cfg.max_iter {
        let next = match e.eval(z, cfg.pole_eps)? {
            EvalOutcome::Finite(v) => v,
            EvalOutcome::PoleHit { .. } => {
                return Ok(OrbitResult {
                    fate: OrbitFate::PoleHit { index: n },
                    iterations_used: n,
                    final_point: z,
                });
            }
            EvalOutcome::Overflow => {
                return Ok(OrbitResult {
                    fate: OrbitFate::Escaped { index: n + 1 },
                    iterations_used: n + 1,
                    final_point: z,
                });
            }
        };

        if chordal_distance(next.into(), SpherePoint::Infinity) < cfg.escape_eps {
            return Ok(OrbitResult {
                fate: OrbitFate::Escaped { index: n + 1 },
                iterations_used: n + 1,
                final_point: next,
            });
        }

        history.push(next);
        if history.len() > pmax + 1 {
            history.remove(0);
        }

        for p in 1..=pmax.min(history.len() - 1) {
            let prev = history[history.len() - 1 - p];
            if chordal_distance(next.into(), prev.into()) < cfg.conv_eps {
                agree[p] += 1;
                if agree[p] >= CONFIRM_WINDOW {
                    let mut cycle: Vec<Complex> =
                        history[history.len() - p..].iter().copied().collect();
                    let period = least_period(&cycle, cfg.conv_eps * PERIOD_COLLAPSE_FACTOR);
                    cycle.truncate(period as usize);
                    return Ok(OrbitResult {
                        fate: OrbitFate::ConvergedToCycle { cycle, period },
                        iterations_used: n + 1,
                        final_point: next,
                    });
                }
            } else {
                agree[p] = 0;
            }
        }
        z = next;
    }

    Ok(OrbitResult {
        fate: OrbitFate::Undecided,
        iterations_used: cfg.max_iter,
        final_point: z,
    })
}

fn least_period(cycle: &[Complex], eps: f64) -> u32 {
    let p = cycle.len();
    'divisors: for q in 1..p {
        if p % q != 0 {
            continue;
        }
        for i in 0..p - q {
            if chordal_distance(cycle[i].into(), cycle[i + q].into()) >= eps {
                continue 'divisors;
            }
        }
        return q as u32;
    }
    p as u32
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::DEFAULT_POLE_EPS;

    fn c(re: f64) -> Complex {
        Complex::new(re, 0.0)
    }

    #[test]
    fn chordal_antipodal_and_coincident() {
        assert_eq!(
            chordal_distance(c(0.0).into(), SpherePoint::Infinity),
            2.0
        );
        assert_eq!(chordal_distance(c(1.0).into(), c(1.0).into()), 0.0);
    }

    #[test]
    fn chordal_of_one_and_i() {
        // 2|1-i| / sqrt(2*2) = sqrt(2)
        let d = chordal_distance(c(1.0).into(), Complex::new(0.0, 1.0).into());
        assert!((d - core::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn chordal_is_symmetric_and_bounded() {
        let pts = [
            c(0.0),
            c(1e3),
            Complex::new(-2.0, 7.0),
            Complex::new(1e100, -1e100),
        ];
        for &a in &pts {
            for &b in &pts {
                let d1 = chordal_distance(a.into(), b.into());
                let d2 = chordal_distance(b.into(), a.into());
                assert_eq!(d1, d2);
                assert!((0.0..=2.0).contains(&d1));
            }
        }
    }

    #[test]
    fn attracting_fixed_point_regime() {
        // lambda = 0.04: every orbit from (0, 1) settles on the fixed point
        // near 0.0372 (bisection oracle: 0.0372054377433517).
        let e = MapExpr::parse("lambda/(exp(z)+z)")
            .unwrap()
            .with_real_param("lambda", 0.04);
        let r = iterate_orbit(&e, c(0.2), &OrbitConfig::default()).unwrap();
        match r.fate {
            OrbitFate::ConvergedToCycle { period, ref cycle } => {
                assert_eq!(period, 1);
                assert!((cycle[0].re - 0.0372054377433517).abs() < 1e-6);
            }
            ref other => panic!("unexpected fate {other:?}"),
        }
    }

    #[test]
    fn two_cycle_regime() {
        // lambda = 4 > 1+e: seeds in (0,1) converge to the 2-cycle
        // {a1, f(a1)} with a1 ~ 0.2313385440 (bisection oracle on f^2-x).
        let e = MapExpr::parse("lambda/(exp(z)+z)")
            .unwrap()
            .with_real_param("lambda", 4.0);
        let r = iterate_orbit(&e, c(0.5), &OrbitConfig::default()).unwrap();
        match r.fate {
            OrbitFate::ConvergedToCycle { period, ref cycle } => {
                assert_eq!(period, 2);
                let a1 = 0.23133854400935460;
                let hit = cycle.iter().any(|p| (p.re - a1).abs() < 1e-6);
                assert!(hit, "cycle {cycle:?} misses a1");
            }
            ref other => panic!("unexpected fate {other:?}"),
        }
    }

    #[test]
    fn seed_on_the_pole_dies_immediately() {
        let e = MapExpr::parse("lambda/(exp(z)+z)")
            .unwrap()
            .with_real_param("lambda", 0.04);
        let x0 = -0.5671432904097838;
        let r = iterate_orbit(&e, c(x0), &OrbitConfig::default()).unwrap();
        assert_eq!(r.fate, OrbitFate::PoleHit { index: 0 });
    }

    #[test]
    fn orbit_is_deterministic() {
        let e = MapExpr::parse("lambda/(exp(z)+z)")
            .unwrap()
            .with_real_param("lambda", 4.0);
        let seed = Complex::new(0.31, 0.11);
        let a = iterate_orbit(&e, seed, &OrbitConfig::default()).unwrap();
        let b = iterate_orbit(&e, seed, &OrbitConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cycle_sanity_reapplication_stays_put() {
        let cfg = OrbitConfig::default();
        let e = MapExpr::parse("lambda/(exp(z)+z)")
            .unwrap()
            .with_real_param("lambda", 4.0);
        let r = iterate_orbit(&e, c(0.5), &cfg).unwrap();
        if let OrbitFate::ConvergedToCycle { cycle, period } = r.fate {
            let mut w = cycle[0];
            for _ in 0..period {
                w = e.eval(w, cfg.pole_eps).unwrap().finite().unwrap();
            }
            assert!(
                chordal_distance(w.into(), cycle[0].into()) < 10.0 * cfg.conv_eps,
                "cycle point moved"
            );
        } else {
            panic!("expected cycle");
        }
    }

    #[test]
    fn even_subsequence_increases_below_the_fixed_point() {
        // lambda = 0.04, seeds in (0, x_lambda): x < f^2(x) < f^4(x) < ...
        let e = MapExpr::parse("lambda/(exp(z)+z)")
            .unwrap()
            .with_real_param("lambda", 0.04)
            .inline_params()
            .unwrap();
        let x_lam = 0.0372054377433517;
        for k in 1..=20 {
            let seed = x_lam * k as f64 / 21.0;
            let mut prev = seed;
            let mut z = c(seed);
            for step in 1..=60 {
                z = e.eval(z, DEFAULT_POLE_EPS).unwrap().finite().unwrap();
                if step % 2 == 0 {
                    if (prev - x_lam).abs() > 1e-12 {
                        assert!(
                            z.re > prev,
                            "even subsequence not increasing at seed {seed}"
                        );
                    }
                    prev = z.re;
                }
            }
        }
    }
}
