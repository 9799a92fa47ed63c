//! Run manifests: the JSON file format, flag overrides and the resolved form
//! recorded in every summary.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sngca_core::{FamilySelection, ModelKind, ModelSpec, SngcaConfig, StopRule};

use crate::error::{CliError, CliResult};
use crate::io;

/// Manifest as written by hand or produced from flags. Every key is
/// optional; flags override file values key by key.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestFile {
    /// Model letter `A`–`E`.
    pub model: Option<String>,
    /// CSV with a header row, one sample per row.
    pub input: Option<PathBuf>,
    /// Sidecar JSON with the target basis, for ε on input data.
    pub truth: Option<PathBuf>,
    pub d: Option<usize>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[serde(rename = "J")]
    pub j: Option<usize>,
    #[serde(rename = "L")]
    pub l: Option<usize>,
    pub max_iter: Option<usize>,
    pub delta_stop: Option<f64>,
    #[serde(rename = "C_mvee")]
    pub c_mvee: Option<f64>,
    pub alpha: Option<f64>,
    pub m_hint: Option<usize>,
    pub seed: Option<u64>,
    pub replications: Option<usize>,
    /// `tanh` or `mixed`.
    pub family: Option<String>,
    pub damping: Option<f64>,
    pub noise_r: Option<f64>,
    /// `auto` or `fixed`.
    pub stop_rule: Option<String>,
}

impl ManifestFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::json(path, e))
    }

    /// Keys set in `over` replace those in `self`.
    pub fn overridden_by(self, over: ManifestFile) -> ManifestFile {
        ManifestFile {
            model: over.model.or(self.model),
            input: over.input.or(self.input),
            truth: over.truth.or(self.truth),
            d: over.d.or(self.d),
            n: over.n.or(self.n),
            j: over.j.or(self.j),
            l: over.l.or(self.l),
            max_iter: over.max_iter.or(self.max_iter),
            delta_stop: over.delta_stop.or(self.delta_stop),
            c_mvee: over.c_mvee.or(self.c_mvee),
            alpha: over.alpha.or(self.alpha),
            m_hint: over.m_hint.or(self.m_hint),
            seed: over.seed.or(self.seed),
            replications: over.replications.or(self.replications),
            family: over.family.or(self.family),
            damping: over.damping.or(self.damping),
            noise_r: over.noise_r.or(self.noise_r),
            stop_rule: over.stop_rule.or(self.stop_rule),
        }
    }
}

/// Fully resolved run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: SngcaConfig,
    /// Replication `r` generates data with seed `model.seed + r`.
    pub model: Option<ModelSpec>,
    pub input_path: Option<PathBuf>,
    pub truth_path: Option<PathBuf>,
    pub replications: usize,
    pub output_dir: PathBuf,
    pub created_unix: u64,
    pub version: String,
}

pub fn parse_model(s: &str) -> CliResult<ModelKind> {
    let mut chars = s.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => ModelKind::from_letter(c),
        _ => None,
    }
    .ok_or_else(|| CliError::Config(format!("unknown model {s:?}, expected one of A-E")))
}

pub fn parse_family(s: &str) -> CliResult<FamilySelection> {
    match s.to_ascii_lowercase().as_str() {
        "tanh" => Ok(FamilySelection::Tanh),
        "mixed" => Ok(FamilySelection::Mixed),
        _ => Err(CliError::Config(format!("unknown family {s:?}, expected tanh or mixed"))),
    }
}

pub fn parse_stop_rule(s: &str) -> CliResult<StopRule> {
    match s.to_ascii_lowercase().as_str() {
        "auto" => Ok(StopRule::Auto),
        "fixed" => Ok(StopRule::Fixed),
        _ => Err(CliError::Config(format!("unknown stop rule {s:?}, expected auto or fixed"))),
    }
}

pub fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl RunManifest {
    pub fn resolve(file: ManifestFile, output_dir: PathBuf) -> CliResult<Self> {
        let (model, d) = match (&file.model, &file.input) {
            (Some(m), None) => {
                let kind = parse_model(m)?;
                let d = file.d.unwrap_or(10);
                let spec = ModelSpec {
                    kind,
                    d,
                    n: file.n.unwrap_or(1000),
                    noise_r: file.noise_r,
                    seed: file.seed.unwrap_or(0),
                };
                spec.validate()?;
                (Some(spec), d)
            }
            (None, Some(path)) => {
                let d = io::csv_width(path)?;
                if let Some(given) = file.d.filter(|&g| g != d) {
                    return Err(CliError::Config(format!(
                        "d = {given} but {} has {d} columns",
                        path.display()
                    )));
                }
                (None, d)
            }
            _ => {
                return Err(CliError::Config(
                    "exactly one of model and input must be given".into(),
                ))
            }
        };
        if file.truth.is_some() && file.input.is_none() {
            return Err(CliError::Config(
                "truth applies to input data only; generated models carry their own".into(),
            ));
        }

        let mut config = SngcaConfig::for_dim(d);
        if let Some(v) = file.j {
            config.j = v;
        }
        if let Some(v) = file.l {
            config.l = v;
        }
        if let Some(v) = file.max_iter {
            config.max_iter = v;
        }
        if let Some(v) = file.delta_stop {
            config.delta_stop = v;
        }
        if let Some(v) = file.c_mvee {
            config.c_mvee = v;
        }
        if let Some(v) = file.alpha {
            config.alpha = v;
        }
        config.m_hint = file.m_hint;
        config.seed = file.seed.unwrap_or(0);
        if let Some(f) = &file.family {
            config.family = parse_family(f)?;
        }
        if let Some(v) = file.damping {
            config.damping = v;
        }
        if let Some(s) = &file.stop_rule {
            config.stop_rule = parse_stop_rule(s)?;
        }
        config.validate(d)?;

        let replications = file.replications.unwrap_or(1);
        if replications == 0 {
            return Err(CliError::Config("replications must be at least 1".into()));
        }
        Ok(RunManifest {
            config,
            model,
            input_path: file.input,
            truth_path: file.truth,
            replications,
            output_dir,
            created_unix: unix_now(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        })
    }
}
