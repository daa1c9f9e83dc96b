//! Rayon-backed basin rendering. The per-pixel orbit stage fans out over
//! rows; the attractor matching stage stays sequential in scan order, so
//! the output is byte-identical to the sequential renderer.

use bovdyn_core::basin::{assemble, classify_row, BasinImage, RawFate, Rect, RenderConfig};
use bovdyn_core::expr::{EvalError, MapExpr};
use bovdyn_core::analysis::FixedPointRecord;
use rayon::prelude::*;

/// Honor `BOVDYN_THREADS` if set. Call once at startup; later calls are
/// no-ops.
pub fn init_thread_pool() {
    if let Ok(n) = std::env::var("BOVDYN_THREADS") {
        if let Ok(n) = n.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

pub fn render_parallel(
    e: &MapExpr,
    window: Rect,
    nx: u32,
    ny: u32,
    attractors: &[FixedPointRecord],
    cfg: &RenderConfig,
) -> Result<BasinImage, EvalError> {
    let rows: Result<Vec<Vec<RawFate>>, EvalError> = (0..ny)
        .into_par_iter()
        .map(|row| classify_row(e, window, nx, ny, row, cfg))
        .collect();
    let fates: Vec<RawFate> = rows?.into_iter().flatten().collect();
    Ok(assemble(e, window, nx, ny, fates, attractors, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_render_matches_sequential() {
        let e = MapExpr::parse("lambda/(exp(z)+z)")
            .unwrap()
            .with_real_param("lambda", 4.0)
            .inline_params()
            .unwrap();
        let window = Rect::new(0.0, 0.0, 6.0, 6.0);
        let cfg = RenderConfig::default();
        let par = render_parallel(&e, window, 48, 48, &[], &cfg).unwrap();
        let seq = bovdyn_core::basin::render(&e, window, 48, 48, &[], &cfg).unwrap();
        assert_eq!(par, seq);
    }
}
