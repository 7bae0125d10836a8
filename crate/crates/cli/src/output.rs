//! Result files and run manifests.

use std::io::Write;
use std::path::{Path, PathBuf};

use pa_core::{Dataset, Provenance};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::error::{CliError, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub input: InputDigest,
    pub config: Config,
    pub outputs: Vec<String>,
    pub runtime_seconds: f64,
    #[serde(skip_serializing_if = "serde_json::Map::is_empty")]
    pub details: serde_json::Map<String, serde_json::Value>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(CliError::io(path))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    std::fs::write(path, contents).map_err(CliError::io(path))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

/// Features, then the class name, then the provenance tag when given.
/// Reals are written in shortest round-trip form.
pub fn dataset_csv(d: &Dataset, label_name: &str, provenance: Option<&[Provenance]>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = d.feature_names.iter().map(String::as_str).collect();
    header.push(label_name);
    if provenance.is_some() {
        header.push("provenance");
    }
    w.write_record(&header)?;
    for (i, row) in d.features.rows().into_iter().enumerate() {
        let mut record: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        record.push(d.class_name(d.labels[i]).to_string());
        if let Some(p) = provenance {
            record.push(p[i].as_str().to_string());
        }
        w.write_record(&record)?;
    }
    w.flush().map_err(CliError::io("<csv buffer>"))?;
    w.into_inner().map_err(|e| CliError::io("<csv buffer>")(e.into_error()))
}

/// Writes `header` then `rows`, one per line.
pub fn lines_csv(header: &str, rows: impl IntoIterator<Item = String>) -> Vec<u8> {
    let mut out = Vec::new();
    writeln!(out, "{header}").expect("write to Vec");
    for row in rows {
        writeln!(out, "{row}").expect("write to Vec");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::input::{parse_csv_reader, CsvOptions};
    use ndarray::array;
    use pa_core::ClassTag;

    #[test]
    fn written_csv_reparses_to_identical_matrices() {
        let x = array![[0.1 + 0.2, -1e-17], [std::f64::consts::PI, 1e300], [2.0 / 3.0, -0.0]];
        let mut d = Dataset::new(
            x,
            vec![ClassTag::Minority, ClassTag::Majority, ClassTag::Majority],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        d.class_names = ["yes".into(), "no".into()];
        let prov = [
            Provenance::OriginalMinority,
            Provenance::MajorityPrototype,
            Provenance::MajorityPrototype,
        ];
        let bytes = dataset_csv(&d, "class", Some(&prov)).unwrap();
        let opts = CsvOptions {
            label: Some("class".into()),
            ignore_columns: vec!["provenance".into()],
            ..Default::default()
        };
        let back = parse_csv_reader(bytes.as_slice(), &opts).unwrap();
        assert_eq!(back.dataset.features, d.features);
        assert_eq!(back.dataset.labels, d.labels);
        assert_eq!(back.dataset.class_names, d.class_names);
        let again = dataset_csv(&back.dataset, "class", Some(&prov)).unwrap();
        assert_eq!(again, bytes);
    }
}
