//! Verification campaign manifests.
//!
//! A manifest is a plain JSON object, outside the document envelope, listing
//! scenario/trajectory file pairs. Relative paths resolve against the
//! directory holding the manifest.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{dotted, ParseError, Reader};
use crate::model::Scenario;
use crate::verify::BatchCase;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub scenario: PathBuf,
    pub trajectory: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub cases: Vec<ManifestEntry>,
}

pub fn parse_manifest(text: &str) -> Result<Manifest, ParseError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let manifest: Manifest = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = dotted(e.path());
        let inner = e.into_inner();
        if inner.is_data() {
            ParseError::Schema {
                path,
                message: inner.to_string(),
            }
        } else {
            inner.into()
        }
    })?;
    de.end()?;
    Ok(manifest)
}

/// Loads every case of `manifest`. A file that cannot be read or parsed
/// turns its case into [`BatchCase::Failed`]; loading never aborts.
pub fn load_cases(manifest: &Manifest, base_dir: &Path, reader: &Reader<'_>) -> Vec<BatchCase> {
    let mut scenarios: HashMap<PathBuf, Result<Scenario, String>> = HashMap::new();
    manifest
        .cases
        .iter()
        .map(|entry| {
            let sc_path = base_dir.join(&entry.scenario);
            let scenario = scenarios
                .entry(sc_path.clone())
                .or_insert_with(|| {
                    reader
                        .load::<Scenario>(&sc_path)
                        .map(|p| p.value)
                        .map_err(|e| e.to_string())
                })
                .clone();
            let trajectory = reader
                .load(&base_dir.join(&entry.trajectory))
                .map(|p| p.value)
                .map_err(|e| e.to_string());
            match (scenario, trajectory) {
                (Ok(scenario), Ok(trajectory)) => BatchCase::Loaded {
                    scenario,
                    trajectory,
                },
                (Err(error), _) | (_, Err(error)) => BatchCase::Failed {
                    scenario: entry.scenario.display().to_string(),
                    trajectory: entry.trajectory.display().to_string(),
                    error,
                },
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs() {
        let m = parse_manifest(r#"{"cases":[{"scenario":"s.json","trajectory":"t/a.json"}]}"#).unwrap();
        assert_eq!(m.cases[0].trajectory, PathBuf::from("t/a.json"));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(
            parse_manifest(r#"{"cases":[{"scenario":"s.json"}]}"#),
            Err(ParseError::Schema { .. })
        ));
        assert!(matches!(
            parse_manifest(r#"{"cases":[], "extra": 1}"#),
            Err(ParseError::Schema { .. })
        ));
        assert!(matches!(parse_manifest("{\"cases\": ["), Err(ParseError::Syntax { .. })));
    }
}
