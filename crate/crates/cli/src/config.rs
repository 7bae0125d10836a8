//! Resolved run configuration: built-in defaults, overlaid by a JSON config
//! file, overlaid by command-line flags.

use std::path::Path;

use pa_core::evaluation::{default_noise_grid, default_ratio_grid, Classifier, EvalOptions, DEFAULT_KNN_K};
use pa_core::{Method, PaConfig};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, Result};
use crate::input::CsvOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    None,
    Pa,
    Pao,
    Pau,
    Smote,
    Ros,
    Rus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierName {
    Knn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Config {
    pub method: MethodName,
    pub ratio: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub anchors: usize,
    pub iterations: usize,
    pub lr: f64,
    pub jitter: f64,
    pub seed: u64,
    pub keep_majority_at_full_ratio: bool,
    pub smote_k: usize,
    pub classifier: ClassifierName,
    pub k: usize,
    pub standardize: bool,
    pub global_standardize: bool,
    pub noise: f64,
    pub m: usize,
    pub ratios: Vec<f64>,
    pub levels: Vec<f64>,
    pub label: Option<String>,
    pub minority: Option<String>,
    pub encode_categoricals: bool,
    pub ignore_columns: Vec<String>,
}

impl Default for Config {
    fn default() -> Self {
        let pa = PaConfig::default();
        Self {
            method: MethodName::Pa,
            ratio: pa.ratio,
            gamma: pa.gamma,
            lambda: pa.lambda,
            anchors: pa.k_anchors,
            iterations: pa.iterations,
            lr: pa.lr,
            jitter: pa.jitter,
            seed: 0,
            keep_majority_at_full_ratio: false,
            smote_k: 5,
            classifier: ClassifierName::Knn,
            k: DEFAULT_KNN_K,
            standardize: true,
            global_standardize: false,
            noise: 0.0,
            m: pa_core::complexity::DEFAULT_NEIGHBORS,
            ratios: default_ratio_grid(),
            levels: default_noise_grid(),
            label: None,
            minority: None,
            encode_categoricals: false,
            ignore_columns: Vec::new(),
        }
    }
}

/// Reads a config file. A run manifest is accepted too, in which case its
/// recorded configuration is used.
pub fn read_config_file(path: &Path) -> Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: invalid JSON: {e}", path.display())))?;
    let mut map = match value {
        Value::Object(map) => map,
        _ => return Err(CliError::Usage(format!("{}: expected a JSON object", path.display()))),
    };
    if map.contains_key("command") {
        if let Some(Value::Object(inner)) = map.remove("config") {
            return Ok(inner);
        }
    }
    Ok(map)
}

fn overlay(base: &mut Map<String, Value>, layer: Map<String, Value>, origin: &str) -> Result<()> {
    for (key, value) in layer {
        if !base.contains_key(&key) {
            return Err(CliError::Usage(format!("unknown {origin} key `{key}`")));
        }
        base.insert(key, value);
    }
    Ok(())
}

impl Config {
    /// Defaults, then `file`, then `flags`. Keys are the kebab-case field
    /// names.
    pub fn resolve(file: Option<Map<String, Value>>, flags: Map<String, Value>) -> Result<Config> {
        let Value::Object(mut merged) = serde_json::to_value(Config::default())? else {
            unreachable!("config serializes to an object");
        };
        if let Some(file) = file {
            overlay(&mut merged, file, "config")?;
        }
        overlay(&mut merged, flags, "flag")?;
        let mut cfg: Config = serde_json::from_value(Value::Object(merged))
            .map_err(|e| CliError::Usage(format!("invalid configuration: {e}")))?;
        match cfg.method {
            MethodName::Pao => cfg.ratio = 1.0,
            MethodName::Pau => cfg.ratio = 0.0,
            _ => {}
        }
        Ok(cfg)
    }

    pub fn pa_config(&self) -> PaConfig {
        PaConfig {
            ratio: self.ratio,
            k_anchors: self.anchors,
            iterations: self.iterations,
            gamma: self.gamma,
            lambda: self.lambda,
            lr: self.lr,
            jitter: self.jitter,
            seed: self.seed,
            keep_majority_at_full_ratio: self.keep_majority_at_full_ratio,
        }
    }

    pub fn method(&self) -> Method {
        match self.method {
            MethodName::None => Method::None,
            MethodName::Pa | MethodName::Pao | MethodName::Pau => Method::Pa(self.pa_config()),
            MethodName::Smote => Method::Smote {
                k_neighbors: self.smote_k,
            },
            MethodName::Ros => Method::Ros,
            MethodName::Rus => Method::Rus,
        }
    }

    pub fn eval_options(&self) -> EvalOptions {
        EvalOptions {
            classifier: match self.classifier {
                ClassifierName::Knn => Classifier::Knn { k: self.k },
            },
            global_standardize: self.global_standardize,
            standardize: self.standardize,
            noise_level: self.noise,
        }
    }

    pub fn csv_options(&self) -> CsvOptions {
        CsvOptions {
            label: self.label.clone(),
            encode_categoricals: self.encode_categoricals,
            ignore_columns: self.ignore_columns.clone(),
        }
    }
}
