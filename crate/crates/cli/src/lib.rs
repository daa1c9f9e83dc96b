//! IO, file formats and pipeline drivers for the meromorphic-dynamics
//! toolkit: PPM rendering, canonical JSON experiment bundles, a rayon
//! render driver and the scripted example pipelines behind `repro`.

pub mod bundle;
pub mod parallel;
pub mod ppm;
pub mod repro;
