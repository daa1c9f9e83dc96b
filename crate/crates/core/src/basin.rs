//! Basin-of-attraction classification over pixel grids and a pixel-level
//! Julia connectivity probe.
//!
//! Classification runs in two stages so callers may parallelise: the
//! per-pixel orbit stage ([`classify_pixels`] / [`classify_row`]) is pure
//! and embarrassingly parallel, while the attractor matching/appending
//! stage ([`assemble`]) is sequential in scan order to keep the attractor
//! numbering deterministic.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::analysis::{analyze_fixed_point, FixedPointRecord};
use crate::expr::{EvalError, EvalOutcome, MapExpr};
use crate::sphere::{chordal_distance, iterate_orbit, OrbitConfig, OrbitFate};
use crate::Complex;

/// Axis-aligned window in the plane, given by center and extent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub center: Complex,
    pub width: f64,
    pub height: f64,
}

impl Rect {
    pub fn new(cx: f64, cy: f64, width: f64, height: f64) -> Self {
        assert!(width >= 0.0 && height >= 0.0);
        Rect {
            center: Complex::new(cx, cy),
            width,
            height,
        }
    }

    pub fn from_corners(re_lo: f64, re_hi: f64, im_lo: f64, im_hi: f64) -> Self {
        assert!(re_lo <= re_hi && im_lo <= im_hi);
        Rect {
            center: Complex::new((re_lo + re_hi) / 2.0, (im_lo + im_hi) / 2.0),
            width: re_hi - re_lo,
            height: im_hi - im_lo,
        }
    }

    /// Seed for pixel (row, col): pixel centers, top row at max imaginary
    /// part.
    pub fn pixel_center(&self, nx: u32, ny: u32, row: u32, col: u32) -> Complex {
        let x = self.center.re - self.width / 2.0 + (col as f64 + 0.5) * self.width / nx as f64;
        let y = self.center.im + self.height / 2.0 - (row as f64 + 0.5) * self.height / ny as f64;
        Complex::new(x, y)
    }
}

/// Grid cell codes: attractor indices are >= 0, the rest are reserved.
pub const ESCAPED: i32 = -1;
pub const POLE: i32 = -2;
pub const UNDECIDED: i32 = -3;

/// Human-readable label for a fate code.
pub fn code_label(code: i32) -> String {
    match code {
        ESCAPED => String::from("ESCAPED"),
        POLE => String::from("POLE"),
        UNDECIDED => String::from("UNDECIDED"),
        k => alloc::format!("{k}"),
    }
}

/// Per-pixel outcome of the orbit stage, before attractor matching.
#[derive(Debug, Clone, PartialEq)]
pub enum RawFate {
    Cycle { cycle: Vec<Complex>, period: u32 },
    Escaped,
    Pole,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenderConfig {
    pub orbit: OrbitConfig,
    /// Chordal matching tolerance between a converged orbit and a known
    /// attractor cycle.
    pub match_eps: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            orbit: OrbitConfig::default(),
            match_eps: 1e-4,
        }
    }
}

pub const MAX_RESOLUTION: u32 = 8192;

/// A classified pixel grid with the attractor table it refers to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinImage {
    pub window: Rect,
    pub nx: u32,
    pub ny: u32,
    /// Row-major fate codes; `cells.len() == nx*ny`.
    pub cells: Vec<i32>,
    pub attractors: Vec<FixedPointRecord>,
    /// (code, fraction of pixels), attractor codes ascending, then the
    /// reserved codes.
    pub stats: Vec<(i32, f64)>,
}

/// Summary without the cell grid, as stored in experiment bundles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinSummary {
    pub window: Rect,
    pub nx: u32,
    pub ny: u32,
    pub attractors: Vec<FixedPointRecord>,
    pub stats: Vec<(i32, f64)>,
}

impl BasinImage {
    pub fn summary(&self) -> BasinSummary {
        BasinSummary {
            window: self.window,
            nx: self.nx,
            ny: self.ny,
            attractors: self.attractors.clone(),
            stats: self.stats.clone(),
        }
    }

    pub fn recompute_stats(&self) -> Vec<(i32, f64)> {
        compute_stats(&self.cells)
    }
}

fn compute_stats(cells: &[i32]) -> Vec<(i32, f64)> {
    let total = cells.len();
    let mut counts: alloc::collections::BTreeMap<i32, u64> = alloc::collections::BTreeMap::new();
    for &c in cells {
        *counts.entry(c).or_insert(0) += 1;
    }
    let mut stats: Vec<(i32, f64)> = Vec::with_capacity(counts.len());
    // attractor codes ascending first, then ESCAPED, POLE, UNDECIDED
    for (&code, &n) in counts.iter().filter(|(c, _)| **c >= 0) {
        stats.push((code, n as f64 / total as f64));
    }
    for special in [ESCAPED, POLE, UNDECIDED] {
        if let Some(&n) = counts.get(&special) {
            stats.push((special, n as f64 / total as f64));
        }
    }
    stats
}

/// Orbit stage for one row of pixels.
pub fn classify_row(
    e: &MapExpr,
    window: Rect,
    nx: u32,
    ny: u32,
    row: u32,
    cfg: &RenderConfig,
) -> Result<Vec<RawFate>, EvalError> {
    let mut out = Vec::with_capacity(nx as usize);
    for col in 0..nx {
        let seed = window.pixel_center(nx, ny, row, col);
        let r = iterate_orbit(e, seed, &cfg.orbit)?;
        out.push(match r.fate {
            OrbitFate::ConvergedToCycle { cycle, period } => RawFate::Cycle { cycle, period },
            OrbitFate::Escaped { .. } => RawFate::Escaped,
            OrbitFate::PoleHit { .. } => RawFate::Pole,
            OrbitFate::Undecided => RawFate::Undecided,
        });
    }
    Ok(out)
}

/// Orbit stage for the whole grid, sequential.
pub fn classify_pixels(
    e: &MapExpr,
    window: Rect,
    nx: u32,
    ny: u32,
    cfg: &RenderConfig,
) -> Result<Vec<RawFate>, EvalError> {
    let mut fates = Vec::with_capacity((nx as usize) * (ny as usize));
    for row in 0..ny {
        fates.extend(classify_row(e, window, nx, ny, row, cfg)?);
    }
    Ok(fates)
}

fn cycle_points(e: &MapExpr, rec: &FixedPointRecord, pole_eps: f64) -> Vec<Complex> {
    let mut pts = alloc::vec![rec.location];
    let mut w = rec.location;
    for _ in 1..rec.period {
        match e.eval(w, pole_eps) {
            Ok(EvalOutcome::Finite(v)) => {
                w = v;
                pts.push(v);
            }
            _ => break,
        }
    }
    pts
}

/// Matching/appending stage. `fates` must be row-major of length `nx*ny`.
///
/// Converged pixels are matched against the known attractor cycles within
/// `match_eps`; unmatched ones append a new refined attractor record in
/// scan order. Pixels whose new attractor cannot be refined are marked
/// UNDECIDED rather than polluting the table.
pub fn assemble(
    e: &MapExpr,
    window: Rect,
    nx: u32,
    ny: u32,
    fates: Vec<RawFate>,
    attractors: &[FixedPointRecord],
    cfg: &RenderConfig,
) -> BasinImage {
    assert_eq!(fates.len(), (nx as usize) * (ny as usize));
    let mut table: Vec<FixedPointRecord> = attractors.to_vec();
    let mut cycles: Vec<Vec<Complex>> = table
        .iter()
        .map(|r| cycle_points(e, r, cfg.orbit.pole_eps))
        .collect();

    let mut cells = Vec::with_capacity(fates.len());
    for fate in fates {
        let code = match fate {
            RawFate::Escaped => ESCAPED,
            RawFate::Pole => POLE,
            RawFate::Undecided => UNDECIDED,
            RawFate::Cycle { cycle, period } => {
                let mut matched = None;
                'search: for (idx, known) in cycles.iter().enumerate() {
                    for kp in known {
                        for cp in &cycle {
                            if chordal_distance((*cp).into(), (*kp).into()) < cfg.match_eps {
                                matched = Some(idx as i32);
                                break 'search;
                            }
                        }
                    }
                }
                match matched {
                    Some(idx) => idx,
                    None => match analyze_fixed_point(e, cycle[0], period, "render: auto") {
                        Ok(rec) => {
                            let idx = table.len() as i32;
                            cycles.push(cycle_points(e, &rec, cfg.orbit.pole_eps));
                            table.push(rec);
                            idx
                        }
                        Err(_) => UNDECIDED,
                    },
                }
            }
        };
        cells.push(code);
    }

    let stats = compute_stats(&cells);
    BasinImage {
        window,
        nx,
        ny,
        cells,
        attractors: table,
        stats,
    }
}

/// Classify every pixel of the window and label basins. Sequential; the
/// CLI front end provides a parallel driver with identical output.
pub fn render(
    e: &MapExpr,
    window: Rect,
    nx: u32,
    ny: u32,
    attractors: &[FixedPointRecord],
    cfg: &RenderConfig,
) -> Result<BasinImage, EvalError> {
    assert!(nx <= MAX_RESOLUTION && ny <= MAX_RESOLUTION);
    let fates = classify_pixels(e, window, nx, ny, cfg)?;
    Ok(assemble(e, window, nx, ny, fates, attractors, cfg))
}

// ---------------------------------------------------------------------------
// Connectivity probe
// ---------------------------------------------------------------------------

/// One resolution rung of the probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeRung {
    pub resolution: u32,
    /// Pixel extent in plane units (larger of the two axes).
    pub pixel_size: f64,
    pub julia_pixels: u64,
    pub components: u64,
    /// Bounding-box extent of the largest 4-connected Julia-pixel
    /// component, in plane units.
    pub largest_diameter: f64,
}

/// Heuristic resolution ladder for Julia-set connectivity. Explicitly
/// non-rigorous: a shrinking largest component under refinement suggests
/// dust, a stable one suggests continua.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityReport {
    pub window: Rect,
    pub rungs: Vec<ProbeRung>,
}

impl ConnectivityReport {
    /// Ratios of successive largest diameters (finer / coarser).
    pub fn diameter_ratios(&self) -> Vec<f64> {
        self.rungs
            .windows(2)
            .map(|w| {
                if w[0].largest_diameter == 0.0 {
                    0.0
                } else {
                    w[1].largest_diameter / w[0].largest_diameter
                }
            })
            .collect()
    }
}

/// Julia pixels are pixels whose closed 4-neighborhood holds at least two
/// distinct fate codes.
fn julia_mask(cells: &[i32], nx: usize, ny: usize) -> Vec<bool> {
    let mut mask = alloc::vec![false; cells.len()];
    for r in 0..ny {
        for c in 0..nx {
            let here = cells[r * nx + c];
            let mut distinct = false;
            if r > 0 && cells[(r - 1) * nx + c] != here {
                distinct = true;
            }
            if !distinct && r + 1 < ny && cells[(r + 1) * nx + c] != here {
                distinct = true;
            }
            if !distinct && c > 0 && cells[r * nx + c - 1] != here {
                distinct = true;
            }
            if !distinct && c + 1 < nx && cells[r * nx + c + 1] != here {
                distinct = true;
            }
            mask[r * nx + c] = distinct;
        }
    }
    mask
}

/// 4-connected component labelling by explicit-stack flood fill. Returns
/// (component count, largest bounding-box extent in pixels on each axis).
fn label_components(mask: &[bool], nx: usize, ny: usize) -> (u64, usize, usize) {
    let mut seen = alloc::vec![false; mask.len()];
    let mut components = 0u64;
    let mut best_w = 0usize;
    let mut best_h = 0usize;
    let mut stack: Vec<(usize, usize)> = Vec::new();

    for r in 0..ny {
        for c in 0..nx {
            let i = r * nx + c;
            if !mask[i] || seen[i] {
                continue;
            }
            components += 1;
            let (mut min_r, mut max_r, mut min_c, mut max_c) = (r, r, c, c);
            seen[i] = true;
            stack.push((r, c));
            while let Some((pr, pc)) = stack.pop() {
                min_r = min_r.min(pr);
                max_r = max_r.max(pr);
                min_c = min_c.min(pc);
                max_c = max_c.max(pc);
                let mut visit = |qr: usize, qc: usize, stack: &mut Vec<(usize, usize)>| {
                    let qi = qr * nx + qc;
                    if mask[qi] && !seen[qi] {
                        seen[qi] = true;
                        stack.push((qr, qc));
                    }
                };
                if pr > 0 {
                    visit(pr - 1, pc, &mut stack);
                }
                if pr + 1 < ny {
                    visit(pr + 1, pc, &mut stack);
                }
                if pc > 0 {
                    visit(pr, pc - 1, &mut stack);
                }
                if pc + 1 < nx {
                    visit(pr, pc + 1, &mut stack);
                }
            }
            let w = max_c - min_c + 1;
            let h = max_r - min_r + 1;
            if w.max(h) > best_w.max(best_h) {
                best_w = w;
                best_h = h;
            }
        }
    }
    (components, best_w, best_h)
}

/// Run the probe over an increasing resolution ladder.
pub fn connectivity_probe(
    e: &MapExpr,
    window: Rect,
    resolutions: &[u32],
    cfg: &RenderConfig,
) -> Result<ConnectivityReport, EvalError> {
    assert!(resolutions.len() >= 2, "need at least two resolutions");
    assert!(
        resolutions.windows(2).all(|w| w[0] < w[1]),
        "resolutions must increase"
    );
    let mut rungs = Vec::with_capacity(resolutions.len());
    for &res in resolutions {
        let img = render(e, window, res, res, &[], cfg)?;
        let nx = res as usize;
        let ny = res as usize;
        let mask = julia_mask(&img.cells, nx, ny);
        let julia_pixels = mask.iter().filter(|&&b| b).count() as u64;
        let (components, bw, bh) = label_components(&mask, nx, ny);
        let pw = window.width / res as f64;
        let ph = window.height / res as f64;
        let largest_diameter = (bw as f64 * pw).max(bh as f64 * ph);
        rungs.push(ProbeRung {
            resolution: res,
            pixel_size: pw.max(ph),
            julia_pixels,
            components,
            largest_diameter,
        });
    }
    Ok(ConnectivityReport { window, rungs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::SpherePoint;

    fn f_lambda(lam: f64) -> MapExpr {
        MapExpr::parse("lambda/(exp(z)+z)")
            .unwrap()
            .with_real_param("lambda", lam)
            .inline_params()
            .unwrap()
    }

    #[test]
    fn constant_map_is_a_single_basin() {
        let e = MapExpr::parse("0.3").unwrap();
        let img = render(&e, Rect::new(0.0, 0.0, 4.0, 4.0), 16, 16, &[], &RenderConfig::default())
            .unwrap();
        assert_eq!(img.attractors.len(), 1);
        assert_eq!(img.stats, alloc::vec![(0, 1.0)]);
        assert!(img.cells.iter().all(|&c| c == 0));
        // the constant's fixed point is superattracting
        assert_eq!(
            img.attractors[0].class,
            crate::analysis::PointClass::Superattracting
        );
    }

    #[test]
    fn small_lambda_regime_is_dominated_by_one_basin() {
        // Orbit-sampling oracle: with lambda = 0.04 nearly every seed in
        // the window converges to x_lambda.
        let e = f_lambda(0.04);
        let img = render(&e, Rect::new(0.0, 0.0, 6.0, 6.0), 64, 64, &[], &RenderConfig::default())
            .unwrap();
        let frac0: f64 = img
            .stats
            .iter()
            .filter(|(c, _)| *c == 0)
            .map(|(_, f)| *f)
            .sum();
        assert!(frac0 >= 0.99, "basin fraction {frac0}");
        let sum: f64 = img.stats.iter().map(|(_, f)| f).sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert_eq!(img.cells.len(), 64 * 64);
    }

    #[test]
    fn pixel_classification_matches_orbit_on_seeds() {
        let e = f_lambda(0.04);
        let cfg = RenderConfig::default();
        let window = Rect::new(0.0, 0.0, 6.0, 6.0);
        let img = render(&e, window, 32, 32, &[], &cfg).unwrap();
        // spot-check a scattering of pixels against a direct orbit run
        for (row, col) in [(0u32, 0u32), (5, 20), (16, 16), (31, 31), (10, 3)] {
            let seed = window.pixel_center(32, 32, row, col);
            let orbit = iterate_orbit(&e, seed, &cfg.orbit).unwrap();
            let code = img.cells[(row * 32 + col) as usize];
            match orbit.fate {
                OrbitFate::ConvergedToCycle { ref cycle, .. } => {
                    assert!(code >= 0);
                    let rec = &img.attractors[code as usize];
                    assert!(
                        chordal_distance(cycle[0].into(), rec.location.into()) < 1e-3
                    );
                }
                OrbitFate::Escaped { .. } => assert_eq!(code, ESCAPED),
                OrbitFate::PoleHit { .. } => assert_eq!(code, POLE),
                OrbitFate::Undecided => assert_eq!(code, UNDECIDED),
            }
        }
    }

    #[test]
    fn stats_recomputation_is_exact() {
        let e = f_lambda(4.0);
        let img = render(&e, Rect::new(0.0, 0.0, 6.0, 6.0), 48, 48, &[], &RenderConfig::default())
            .unwrap();
        assert_eq!(img.stats, img.recompute_stats());
        for &(code, _) in &img.stats {
            if code >= 0 {
                assert!((code as usize) < img.attractors.len());
            }
        }
    }

    #[test]
    fn single_basin_has_no_julia_pixels() {
        let e = MapExpr::parse("0.3").unwrap();
        let rep = connectivity_probe(
            &e,
            Rect::new(0.0, 0.0, 2.0, 2.0),
            &[16, 32],
            &RenderConfig::default(),
        )
        .unwrap();
        for rung in &rep.rungs {
            assert_eq!(rung.julia_pixels, 0);
            assert_eq!(rung.components, 0);
            assert_eq!(rung.largest_diameter, 0.0);
        }
        assert!(rep.rungs[0].pixel_size > rep.rungs[1].pixel_size);
    }

    #[test]
    fn chordal_matching_respects_eps() {
        let a = Complex::new(0.0372054, 0.0);
        let b = Complex::new(0.0372055, 0.0);
        assert!(chordal_distance(SpherePoint::Finite(a), SpherePoint::Finite(b)) < 1e-4);
    }
}
