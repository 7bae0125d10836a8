//! Command-line arguments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::commands::CommandKind;
use crate::config::{ClassifierName, MethodName};

#[derive(Debug, Parser)]
#[command(name = "pa", version, about = "Potential Anchoring resampling for imbalanced binary data")]
pub struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Resample a dataset and write it with a provenance column.
    Resample {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        pa: PaArgs,
        #[command(flatten)]
        method: MethodArgs,
        /// Skip standardization before resampling.
        #[arg(long)]
        no_standardize: bool,
    },
    /// 5x2 cross-validation of one resampling method.
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        pa: PaArgs,
        #[command(flatten)]
        method: MethodArgs,
        #[command(flatten)]
        eval: EvalArgs,
        /// Training-label noise level.
        #[arg(long)]
        noise: Option<f64>,
    },
    /// Cross-validate PA over a grid of ratios.
    SweepRatio {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        pa: PaArgs,
        #[command(flatten)]
        eval: EvalArgs,
        /// Comma-separated ratios (default 0.0, 0.1, ..., 1.0).
        #[arg(long, value_delimiter = ',')]
        ratios: Option<Vec<f64>>,
    },
    /// Cross-validate a method over a grid of label-noise levels.
    SweepNoise {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        pa: PaArgs,
        #[command(flatten)]
        method: MethodArgs,
        #[command(flatten)]
        eval: EvalArgs,
        /// Comma-separated noise levels (default 0.0, 0.04, ..., 0.2).
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<f64>>,
    },
    /// Data difficulty index and minority categories.
    Di {
        #[command(flatten)]
        common: CommonArgs,
        /// Neighbourhood size.
        #[arg(long)]
        m: Option<usize>,
        /// Use raw features instead of standardized ones.
        #[arg(long)]
        raw: bool,
    },
    /// Per-iteration loss of both prototype optimizations.
    LossTrace {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        pa: PaArgs,
        #[arg(long, value_enum)]
        method: Option<MethodName>,
        #[arg(long)]
        no_standardize: bool,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Input dataset (.dat/.keel as KEEL, anything else as CSV).
    pub input: PathBuf,
    /// Output directory.
    #[arg(long, env = "PA_OUTPUT_DIR", default_value = "pa-output")]
    pub out: PathBuf,
    /// JSON config file (or a previous run's manifest).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV label column, by name or zero-based index.
    #[arg(long)]
    pub label: Option<String>,
    /// Class value to treat as the minority regardless of counts.
    #[arg(long)]
    pub minority: Option<String>,
    /// Integer-encode non-numeric CSV feature columns.
    #[arg(long)]
    pub encode_categoricals: bool,
    /// CSV column to drop (repeatable).
    #[arg(long = "ignore-column")]
    pub ignore_columns: Vec<String>,
}

#[derive(Debug, Args)]
pub struct PaArgs {
    #[arg(long)]
    pub ratio: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub anchors: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub jitter: Option<f64>,
    /// At ratio 1, keep the original majority rows.
    #[arg(long)]
    pub keep_majority_at_full_ratio: bool,
}

#[derive(Debug, Args)]
pub struct MethodArgs {
    #[arg(long, value_enum)]
    pub method: Option<MethodName>,
    /// SMOTE neighbour count.
    #[arg(long)]
    pub smote_k: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, value_enum)]
    pub classifier: Option<ClassifierName>,
    /// KNN neighbour count.
    #[arg(long)]
    pub k: Option<usize>,
    /// Fit the standardizer on the whole dataset instead of each training fold.
    #[arg(long)]
    pub global_standardize: bool,
    #[arg(long)]
    pub no_standardize: bool,
}

/// Collects the flags that were actually given, keyed like the config file.
#[derive(Default)]
struct Flags(Map<String, Value>);

impl Flags {
    fn opt<T: Serialize>(&mut self, key: &str, value: &Option<T>) -> &mut Self {
        if let Some(v) = value {
            self.0.insert(key.into(), serde_json::to_value(v).expect("flag values serialize"));
        }
        self
    }

    fn set(&mut self, key: &str, on: bool, value: bool) -> &mut Self {
        if on {
            self.0.insert(key.into(), Value::Bool(value));
        }
        self
    }

    fn common(&mut self, c: &CommonArgs) -> &mut Self {
        self.opt("seed", &c.seed)
            .opt("label", &c.label)
            .opt("minority", &c.minority)
            .set("encode-categoricals", c.encode_categoricals, true);
        if !c.ignore_columns.is_empty() {
            self.opt("ignore-columns", &Some(&c.ignore_columns));
        }
        self
    }

    fn pa(&mut self, p: &PaArgs) -> &mut Self {
        self.opt("ratio", &p.ratio)
            .opt("gamma", &p.gamma)
            .opt("lambda", &p.lambda)
            .opt("anchors", &p.anchors)
            .opt("iterations", &p.iterations)
            .opt("lr", &p.lr)
            .opt("jitter", &p.jitter)
            .set("keep-majority-at-full-ratio", p.keep_majority_at_full_ratio, true)
    }

    fn method(&mut self, m: &MethodArgs) -> &mut Self {
        self.opt("method", &m.method).opt("smote-k", &m.smote_k)
    }

    fn eval(&mut self, e: &EvalArgs) -> &mut Self {
        self.opt("classifier", &e.classifier)
            .opt("k", &e.k)
            .set("global-standardize", e.global_standardize, true)
            .set("standardize", e.no_standardize, false)
    }
}

impl Command {
    pub fn kind(&self) -> CommandKind {
        match self {
            Command::Resample { .. } => CommandKind::Resample,
            Command::Evaluate { .. } => CommandKind::Evaluate,
            Command::SweepRatio { .. } => CommandKind::SweepRatio,
            Command::SweepNoise { .. } => CommandKind::SweepNoise,
            Command::Di { .. } => CommandKind::Di,
            Command::LossTrace { .. } => CommandKind::LossTrace,
        }
    }

    pub fn common(&self) -> &CommonArgs {
        match self {
            Command::Resample { common, .. }
            | Command::Evaluate { common, .. }
            | Command::SweepRatio { common, .. }
            | Command::SweepNoise { common, .. }
            | Command::Di { common, .. }
            | Command::LossTrace { common, .. } => common,
        }
    }

    /// The explicitly given flags as config-file keys.
    pub fn flags(&self) -> Map<String, Value> {
        let mut f = Flags::default();
        f.common(self.common());
        match self {
            Command::Resample {
                pa,
                method,
                no_standardize,
                ..
            } => {
                f.pa(pa).method(method).set("standardize", *no_standardize, false);
            }
            Command::Evaluate {
                pa, method, eval, noise, ..
            } => {
                f.pa(pa).method(method).eval(eval).opt("noise", noise);
            }
            Command::SweepRatio { pa, eval, ratios, .. } => {
                f.pa(pa).eval(eval).opt("ratios", ratios);
            }
            Command::SweepNoise {
                pa,
                method,
                eval,
                levels,
                ..
            } => {
                f.pa(pa).method(method).eval(eval).opt("levels", levels);
            }
            Command::Di { m, raw, .. } => {
                f.opt("m", m).set("standardize", *raw, false);
            }
            Command::LossTrace {
                pa,
                method,
                no_standardize,
                ..
            } => {
                f.pa(pa).opt("method", method).set("standardize", *no_standardize, false);
            }
        }
        f.0
    }
}
