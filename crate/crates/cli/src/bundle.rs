//! Experiment bundles: named analysis artifacts for one map, saved as
//! canonical JSON so runs can be diffed and replayed.
//!
//! Canonical form: object keys sorted (serialization goes through
//! `serde_json::Value`, whose map is ordered), floats as shortest
//! round-trip decimals, two-space indentation. `save` is a pure function
//! of the bundle content; the creation timestamp is part of the content
//! and can be pinned through `BOVDYN_TIMESTAMP` for reproducible runs.

use std::fs;
use std::io::Write;
use std::path::Path;

use bovdyn_core::analysis::{CriticalSet, FixedPointRecord};
use bovdyn_core::basin::{BasinSummary, ConnectivityReport};
use bovdyn_core::checkers::HypothesisReport;
use bovdyn_core::interval::SignCertificate;
use bovdyn_core::{Complex, MapExpr};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum Artifact {
    FixedPoint(FixedPointRecord),
    SignCertificate(SignCertificate),
    Hypothesis(HypothesisReport),
    Connectivity(ConnectivityReport),
    CriticalSet(CriticalSet),
    BasinStats(BasinSummary),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedArtifact {
    pub name: String,
    #[serde(flatten)]
    pub artifact: Artifact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentBundle {
    pub schema_version: u32,
    pub tool_version: String,
    /// Seconds since the Unix epoch, as text. Excluded from reproducibility
    /// comparisons; override with `BOVDYN_TIMESTAMP` to pin it.
    pub created_unix: String,
    pub map: MapExpr,
    pub artifacts: Vec<NamedArtifact>,
}

#[derive(Debug)]
pub enum BundleError {
    Io(std::io::Error),
    Json(serde_json::Error),
    SchemaMismatch { found: u32, expected: u32 },
}

impl std::fmt::Display for BundleError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BundleError::Io(e) => write!(f, "bundle io error: {e}"),
            BundleError::Json(e) => write!(f, "bundle json error: {e}"),
            BundleError::SchemaMismatch { found, expected } => {
                write!(f, "bundle schema version {found}, this tool reads {expected}")
            }
        }
    }
}

impl std::error::Error for BundleError {}

impl From<std::io::Error> for BundleError {
    fn from(e: std::io::Error) -> Self {
        BundleError::Io(e)
    }
}

impl From<serde_json::Error> for BundleError {
    fn from(e: serde_json::Error) -> Self {
        BundleError::Json(e)
    }
}

impl ExperimentBundle {
    pub fn new(map: MapExpr, timestamp_override: Option<&str>) -> Self {
        ExperimentBundle {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            created_unix: timestamp_override.map(str::to_string).unwrap_or_else(|| {
                std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_secs().to_string())
                    .unwrap_or_else(|_| "0".to_string())
            }),
            map,
            artifacts: Vec::new(),
        }
    }

    pub fn push(&mut self, name: &str, artifact: Artifact) {
        self.artifacts.push(NamedArtifact {
            name: name.to_string(),
            artifact,
        });
    }

    /// Canonical JSON text of the bundle.
    pub fn to_canonical_json(&self) -> Result<String, BundleError> {
        // Round-tripping through Value sorts every object's keys.
        let value = serde_json::to_value(self)?;
        let mut text = serde_json::to_string_pretty(&value)?;
        text.push('\n');
        Ok(text)
    }
}

pub fn save_bundle(bundle: &ExperimentBundle, path: &Path) -> Result<(), BundleError> {
    let text = bundle.to_canonical_json()?;
    let mut file = fs::File::create(path)?;
    file.write_all(text.as_bytes())?;
    Ok(())
}

pub fn load_bundle(path: &Path) -> Result<ExperimentBundle, BundleError> {
    let text = fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let found = value
        .get("schema_version")
        .and_then(|v| v.as_u64())
        .unwrap_or(0) as u32;
    if found != SCHEMA_VERSION {
        return Err(BundleError::SchemaMismatch {
            found,
            expected: SCHEMA_VERSION,
        });
    }
    Ok(serde_json::from_value(value)?)
}

/// Helper for params supplied as `name=re[,im]` on the command line.
pub fn parse_param(text: &str) -> Result<(String, Complex), String> {
    let (name, value) = text
        .split_once('=')
        .ok_or_else(|| format!("expected name=re[,im], got `{text}`"))?;
    if name.is_empty() {
        return Err(format!("empty parameter name in `{text}`"));
    }
    let (re, im) = match value.split_once(',') {
        Some((re, im)) => (re, im),
        None => (value, "0"),
    };
    let re: f64 = re
        .trim()
        .parse()
        .map_err(|_| format!("bad real part in `{text}`"))?;
    let im: f64 = im
        .trim()
        .parse()
        .map_err(|_| format!("bad imaginary part in `{text}`"))?;
    Ok((name.trim().to_string(), Complex::new(re, im)))
}

/// Windows are `cx,cy,w,h`.
pub fn parse_window(text: &str) -> Result<bovdyn_core::basin::Rect, String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 4 {
        return Err(format!("expected cx,cy,w,h, got `{text}`"));
    }
    let nums: Result<Vec<f64>, _> = parts.iter().map(|p| p.trim().parse::<f64>()).collect();
    let nums = nums.map_err(|_| format!("bad number in window `{text}`"))?;
    if nums[2] <= 0.0 || nums[3] <= 0.0 {
        return Err("window extent must be positive".to_string());
    }
    Ok(bovdyn_core::basin::Rect::new(
        nums[0], nums[1], nums[2], nums[3],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn param_forms() {
        let (name, v) = parse_param("lambda=0.04").unwrap();
        assert_eq!(name, "lambda");
        assert_eq!(v, Complex::new(0.04, 0.0));
        let (_, v) = parse_param("lambda=-0.4,0.25").unwrap();
        assert_eq!(v, Complex::new(-0.4, 0.25));
        assert!(parse_param("nonsense").is_err());
    }

    #[test]
    fn window_form() {
        let r = parse_window("-0.9,0,3,3").unwrap();
        assert_eq!(r.center, Complex::new(-0.9, 0.0));
        assert_eq!((r.width, r.height), (3.0, 3.0));
        assert!(parse_window("1,2,3").is_err());
        assert!(parse_window("1,2,-3,4").is_err());
    }
}
