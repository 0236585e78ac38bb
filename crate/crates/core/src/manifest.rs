//! JSON manifests consumed by the command-line tool.
//!
//! A manifest bundles the pieces of a multi-file setup: widths plus netlist
//! paths. Paths are resolved relative to the manifest's own directory, so a
//! directory of netlists plus its manifest moves as a unit.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ManifestError {
    #[error("manifest is not valid JSON: {0}")]
    Json(String),
    #[error("manifest version {found} is not supported; this build reads version {MANIFEST_VERSION}")]
    Version { found: u32 },
}

/// A verifier-pair or relation bundle for the construct commands.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct ConstructManifest {
    pub version: u32,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(flatten)]
    pub spec: ConstructSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstructSpec {
    /// A yes/no verifier pair. Both netlists must be single-output
    /// predicates over `instance_bits + witness_bits` inputs.
    Decision { instance_bits: usize, witness_bits: usize, yes: String, no: String },
    /// A solution predicate over `instance_bits + solution_bits` inputs.
    Search { instance_bits: usize, solution_bits: usize, predicate: String },
}

/// Party widths plus netlist references for a process-function setup.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct CtcManifest {
    pub version: u32,
    pub parties: Vec<PartyWidths>,
    /// Netlist of the future-to-past boundary map.
    pub process: String,
    /// Optional per-party operation netlists, one per party in order.
    #[serde(default)]
    pub locals: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub struct PartyWidths {
    pub input_bits: usize,
    pub output_bits: usize,
}

fn check_version(found: u32) -> Result<(), ManifestError> {
    if found != MANIFEST_VERSION {
        return Err(ManifestError::Version { found });
    }
    Ok(())
}

impl ConstructManifest {
    pub fn from_json(text: &str) -> Result<Self, ManifestError> {
        let m: ConstructManifest =
            serde_json::from_str(text).map_err(|e| ManifestError::Json(e.to_string()))?;
        check_version(m.version)?;
        Ok(m)
    }
}

impl CtcManifest {
    pub fn from_json(text: &str) -> Result<Self, ManifestError> {
        let m: CtcManifest =
            serde_json::from_str(text).map_err(|e| ManifestError::Json(e.to_string()))?;
        check_version(m.version)?;
        Ok(m)
    }
}

/// Resolves a manifest-relative reference against the manifest's directory.
pub fn resolve_path(manifest_path: &Path, reference: &str) -> PathBuf {
    let reference = Path::new(reference);
    if reference.is_absolute() {
        return reference.to_path_buf();
    }
    match manifest_path.parent() {
        Some(dir) => dir.join(reference),
        None => reference.to_path_buf(),
    }
}
