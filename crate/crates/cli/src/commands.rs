//! Command execution: load the input, run, write outputs and the manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use pa_core::evaluation::SweepRow;
use pa_core::{
    cross_validate, difficulty_index, fit_standardizer, noise_sweep, pa_resample_traced, partition, ratio_sweep,
    Dataset, EvaluationReport, PreprocessParams,
};
use serde_json::{json, Map, Value};

use crate::config::{Config, MethodName};
use crate::error::{CliError, Result};
use crate::input::{force_minority, load};
use crate::output::{dataset_csv, lines_csv, sha256_file, write_file, write_json, InputDigest, RunManifest, MANIFEST_FILE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Resample,
    Evaluate,
    SweepRatio,
    SweepNoise,
    Di,
    LossTrace,
}

impl CommandKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandKind::Resample => "resample",
            CommandKind::Evaluate => "evaluate",
            CommandKind::SweepRatio => "sweep-ratio",
            CommandKind::SweepNoise => "sweep-noise",
            CommandKind::Di => "di",
            CommandKind::LossTrace => "loss-trace",
        }
    }
}

/// Files produced by one command, plus manifest details and a one-line
/// summary for the terminal.
struct Produced {
    files: Vec<(&'static str, Vec<u8>)>,
    details: Map<String, Value>,
    summary: String,
}

pub struct Outcome {
    pub manifest: RunManifest,
    pub summary: String,
}

fn standardized(d: &Dataset, cfg: &Config) -> (Dataset, Option<PreprocessParams>) {
    if cfg.standardize {
        let params = fit_standardizer(d.features.view());
        (params.transform_dataset(d), Some(params))
    } else {
        (d.clone(), None)
    }
}

fn scaling_details(params: &Option<PreprocessParams>) -> Map<String, Value> {
    let mut details = Map::new();
    if let Some(p) = params {
        details.insert("standardization".into(), json!({"means": p.means, "stds": p.stds}));
    }
    details
}

fn json_bytes(value: &impl serde::Serialize) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn resample(d: &Dataset, label_name: &str, cfg: &Config) -> Result<Produced> {
    let (scaled, params) = standardized(d, cfg);
    let mut result = cfg.method().resample(&scaled, cfg.seed)?;
    if let Some(p) = &params {
        result.dataset.features = p.inverse_transform(result.dataset.features.view());
    }
    let out = &result.dataset;
    let mut details = scaling_details(&params);
    details.insert("counts".into(), json!({"minority": out.n_min(), "majority": out.n_maj()}));
    if let Some(reduced) = result.details.as_ref().and_then(|x| x.anchors.reduced_from) {
        details.insert("anchors_requested".into(), json!(reduced));
    }
    Ok(Produced {
        files: vec![("resampled.csv", dataset_csv(out, label_name, Some(&result.provenance))?)],
        summary: format!(
            "{}: {} rows ({} {}, {} {})",
            cfg.method().name(),
            out.n_rows(),
            out.n_min(),
            out.class_names[0],
            out.n_maj(),
            out.class_names[1]
        ),
        details,
    })
}

fn report_files(report: &EvaluationReport) -> Result<Vec<(&'static str, Vec<u8>)>> {
    Ok(vec![
        ("report.json", json_bytes(report)?),
        ("report.csv", lines_csv(EvaluationReport::CSV_HEADER, [report.csv_row()])),
    ])
}

fn evaluate(d: &Dataset, cfg: &Config) -> Result<Produced> {
    let report = cross_validate(d, &cfg.method(), &cfg.eval_options(), cfg.seed)?;
    Ok(Produced {
        files: report_files(&report)?,
        details: Map::new(),
        summary: format!("{}\n{}", EvaluationReport::CSV_HEADER, report.csv_row()),
    })
}

fn sweep(rows: Vec<SweepRow>) -> Result<Produced> {
    let csv_rows: Vec<String> = rows.iter().map(SweepRow::csv_row).collect();
    let summary = std::iter::once(SweepRow::CSV_HEADER.to_string())
        .chain(csv_rows.iter().cloned())
        .collect::<Vec<_>>()
        .join("\n");
    Ok(Produced {
        files: vec![
            ("sweep.csv", lines_csv(SweepRow::CSV_HEADER, csv_rows)),
            ("sweep.json", json_bytes(&rows)?),
        ],
        details: Map::new(),
        summary,
    })
}

fn di(d: &Dataset, cfg: &Config) -> Result<Produced> {
    let (scaled, _) = standardized(d, cfg);
    let report = difficulty_index(&scaled, cfg.m)?;
    let value = report.to_json();
    Ok(Produced {
        summary: value.to_string(),
        files: vec![("di.json", json_bytes(&value)?)],
        details: Map::new(),
    })
}

fn loss_trace(d: &Dataset, cfg: &Config) -> Result<Produced> {
    if !matches!(cfg.method, MethodName::Pa | MethodName::Pao | MethodName::Pau) {
        return Err(CliError::Usage("loss-trace needs a pa, pao or pau method".into()));
    }
    let (scaled, params) = standardized(d, cfg);
    let (x_maj, x_min) = partition(&scaled)?;
    let (_, traces) = pa_resample_traced(x_maj.view(), x_min.view(), &cfg.pa_config())?;
    let rows = [("minority", &traces.minority), ("majority", &traces.majority)]
        .into_iter()
        .flat_map(|(class, trace)| {
            trace
                .iter()
                .enumerate()
                .map(move |(i, loss)| format!("{class},{i},{loss}"))
        });
    let last = |t: &[f64]| t.last().map_or("-".to_string(), |v| v.to_string());
    Ok(Produced {
        files: vec![("loss_trace.csv", lines_csv("class,iteration,loss", rows))],
        summary: format!(
            "final loss: minority {}, majority {}",
            last(&traces.minority),
            last(&traces.majority)
        ),
        details: scaling_details(&params),
    })
}

/// Runs `kind` on `input`, writing its outputs and `manifest.json` into
/// `out`.
pub fn execute(kind: CommandKind, input: &Path, out: &Path, cfg: &Config) -> Result<Outcome> {
    let start = Instant::now();
    let sha256 = sha256_file(input)?;
    let mut loaded = load(input, &cfg.csv_options())?;
    if let Some(minority) = &cfg.minority {
        force_minority(&mut loaded.dataset, minority)?;
    }
    let d = &loaded.dataset;
    log::info!(
        "{}: {} rows, {} features, {} minority / {} majority",
        input.display(),
        d.n_rows(),
        d.n_features(),
        d.n_min(),
        d.n_maj()
    );

    let produced = match kind {
        CommandKind::Resample => resample(d, &loaded.label_name, cfg)?,
        CommandKind::Evaluate => evaluate(d, cfg)?,
        CommandKind::SweepRatio => sweep(ratio_sweep(d, &cfg.ratios, &cfg.pa_config(), &cfg.eval_options(), cfg.seed)?)?,
        CommandKind::SweepNoise => sweep(noise_sweep(d, &cfg.levels, &cfg.method(), &cfg.eval_options(), cfg.seed)?)?,
        CommandKind::Di => di(d, cfg)?,
        CommandKind::LossTrace => loss_trace(d, cfg)?,
    };

    std::fs::create_dir_all(out).map_err(CliError::io(out))?;
    for (name, bytes) in &produced.files {
        write_file(&out.join(name), bytes)?;
    }
    let manifest = RunManifest {
        command: kind.as_str().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        input: InputDigest {
            path: PathBuf::from(input),
            sha256,
        },
        config: cfg.clone(),
        outputs: produced.files.iter().map(|(name, _)| name.to_string()).collect(),
        runtime_seconds: start.elapsed().as_secs_f64(),
        details: produced.details,
    };
    write_json(&out.join(MANIFEST_FILE), &manifest)?;
    Ok(Outcome {
        manifest,
        summary: produced.summary,
    })
}
