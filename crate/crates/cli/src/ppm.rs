//! Binary PPM (P6) output with a fixed palette.
//!
//! Palette: attractor basins cycle through twelve colors in index order
//! (basin 0 blue, basin 1 yellow, then red, cyan, magenta, orange, teal,
//! purple, brown, pink, lime, slate); ESCAPED is white, POLE black,
//! UNDECIDED green. Output bytes depend only on the image content.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use bovdyn_core::basin::{code_label, BasinImage, ESCAPED, POLE, UNDECIDED};

pub const ATTRACTOR_COLORS: [[u8; 3]; 12] = [
    [45, 90, 205],   // blue
    [235, 205, 50],  // yellow
    [205, 60, 50],   // red
    [70, 200, 220],  // cyan
    [200, 70, 200],  // magenta
    [235, 140, 40],  // orange
    [30, 150, 140],  // teal
    [130, 70, 190],  // purple
    [140, 95, 50],   // brown
    [235, 150, 180], // pink
    [150, 210, 60],  // lime
    [110, 125, 140], // slate
];
pub const ESCAPED_COLOR: [u8; 3] = [255, 255, 255];
pub const POLE_COLOR: [u8; 3] = [0, 0, 0];
pub const UNDECIDED_COLOR: [u8; 3] = [35, 125, 45];

pub fn color_of(code: i32) -> [u8; 3] {
    match code {
        ESCAPED => ESCAPED_COLOR,
        POLE => POLE_COLOR,
        UNDECIDED => UNDECIDED_COLOR,
        k => ATTRACTOR_COLORS[(k as usize) % ATTRACTOR_COLORS.len()],
    }
}

/// Raw P6 bytes for an image: header, then row-major RGB triples with the
/// top row at maximal imaginary part (the row order of `BasinImage`).
pub fn ppm_bytes(img: &BasinImage) -> Vec<u8> {
    let mut out = Vec::with_capacity(32 + img.cells.len() * 3);
    out.extend_from_slice(format!("P6\n{} {}\n255\n", img.nx, img.ny).as_bytes());
    for &code in &img.cells {
        out.extend_from_slice(&color_of(code));
    }
    out
}

pub fn write_ppm(img: &BasinImage, path: &Path) -> io::Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(&ppm_bytes(img))
}

/// Stats CSV: one `code,fraction` row per fate code present.
pub fn stats_csv(img: &BasinImage) -> String {
    let mut out = String::from("code,fraction\n");
    for &(code, fraction) in &img.stats {
        out.push_str(&format!("{},{}\n", code_label(code), fraction));
    }
    out
}

pub fn write_stats_csv(img: &BasinImage, path: &Path) -> io::Result<()> {
    fs::write(path, stats_csv(img))
}
