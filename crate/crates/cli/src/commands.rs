use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sngca_core::{
    generate, run_sngca, Dataset, IterationRecord, ModelKind, ModelSpec, SngcaConfig, StopRule,
    SubspaceEstimate,
};

use crate::error::{CliError, CliResult};
use crate::io::{self, TruthSidecar};
use crate::manifest::{unix_now, RunManifest};

pub const ITERATIONS_FILE: &str = "iterations.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// Sidecar path for generated data: `data.csv` → `data.json`.
pub fn sidecar_path(data_path: &Path) -> PathBuf {
    data_path.with_extension("json")
}

pub fn cmd_generate(spec: &ModelSpec, out_path: &Path) -> CliResult<PathBuf> {
    let g = generate(spec)?;
    io::write_matrix(out_path, g.data.samples())?;
    let sidecar = TruthSidecar {
        model: spec.clone(),
        seed: spec.seed,
        truth_basis: g.truth.basis().rows().into_iter().map(|r| r.to_vec()).collect(),
    };
    let side = sidecar_path(out_path);
    io::write_json(&side, &sidecar)?;
    Ok(side)
}

/// One line of the per-iteration report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRow {
    pub replication: usize,
    pub iteration: usize,
    pub epsilon: Option<f64>,
    pub cosine: Option<f64>,
    pub m_estimated: usize,
    pub delta_star: f64,
    pub wall_ms: f64,
}

impl IterationRow {
    fn from_record(replication: usize, r: &IterationRecord) -> Self {
        IterationRow {
            replication,
            iteration: r.iteration,
            epsilon: r.error_vs_truth,
            cosine: r.cosine_vs_previous,
            m_estimated: r.estimate.m(),
            delta_star: r.ellipsoid.delta_star,
            wall_ms: r.wall_ms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub iteration: usize,
    /// Replications that reached this iteration.
    pub runs: usize,
    pub mean_epsilon: Option<f64>,
    /// Sample variance (N−1 denominator); absent below two runs.
    pub var_epsilon: Option<f64>,
    pub mean_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub manifest: RunManifest,
    pub iterations: Vec<IterationStats>,
    pub finished_unix: u64,
}

fn mean_var(values: &[f64]) -> (Option<f64>, Option<f64>) {
    let n = values.len();
    if n == 0 {
        return (None, None);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = (n > 1).then(|| {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64
    });
    (Some(mean), var)
}

pub fn summarize(rows: &[IterationRow]) -> Vec<IterationStats> {
    let last = rows.iter().map(|r| r.iteration).max().unwrap_or(0);
    (1..=last)
        .map(|k| {
            let at: Vec<&IterationRow> = rows.iter().filter(|r| r.iteration == k).collect();
            let eps: Vec<f64> = at.iter().filter_map(|r| r.epsilon).collect();
            let (mean_epsilon, var_epsilon) = mean_var(&eps);
            IterationStats {
                iteration: k,
                runs: at.len(),
                mean_epsilon,
                var_epsilon,
                mean_m: at.iter().map(|r| r.m_estimated as f64).sum::<f64>()
                    / at.len().max(1) as f64,
            }
        })
        .collect()
}

/// Runs `replications` seeds of the manifest. Replication `r` uses
/// algorithm seed `config.seed + r` and, for generated data, model seed
/// `model.seed + r`.
pub fn run_replications(manifest: &RunManifest) -> CliResult<Vec<IterationRow>> {
    let shared: Option<(Dataset, Option<SubspaceEstimate>)> = match &manifest.input_path {
        Some(path) => {
            let data = Dataset::new(io::read_matrix(path)?)?;
            let truth = manifest
                .truth_path
                .as_deref()
                .map(|p| io::read_json::<TruthSidecar>(p)?.subspace())
                .transpose()?;
            Some((data, truth))
        }
        None => None,
    };
    let per_rep: Vec<Vec<IterationRow>> = (0..manifest.replications)
        .into_par_iter()
        .map(|rep| -> CliResult<Vec<IterationRow>> {
            let mut cfg = manifest.config.clone();
            cfg.seed = cfg.seed.wrapping_add(rep as u64);
            let records = match (&shared, &manifest.model) {
                (Some((data, truth)), _) => run_sngca(data, &cfg, truth.as_ref())?,
                (None, Some(spec)) => {
                    let mut spec = spec.clone();
                    spec.seed = spec.seed.wrapping_add(rep as u64);
                    let g = generate(&spec)?;
                    run_sngca(&g.data, &cfg, Some(&g.truth))?
                }
                (None, None) => {
                    return Err(CliError::Config("manifest has neither model nor input".into()))
                }
            };
            Ok(records.iter().map(|r| IterationRow::from_record(rep, r)).collect())
        })
        .collect::<CliResult<_>>()?;
    Ok(per_rep.into_iter().flatten().collect())
}

/// Runs the manifest and writes `iterations.csv` and `summary.json` into
/// its output directory.
pub fn cmd_run(manifest: &RunManifest) -> CliResult<RunSummary> {
    let dir = &manifest.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let rows = run_replications(manifest)?;
    io::write_rows(&dir.join(ITERATIONS_FILE), &rows)?;
    let summary = RunSummary {
        manifest: manifest.clone(),
        iterations: summarize(&rows),
        finished_unix: unix_now(),
    };
    io::write_json(&dir.join(SUMMARY_FILE), &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkSuite {
    /// ε per iteration, five fixed iterations.
    Progress,
    /// Final ε against the noise-spread exponent `r`.
    Noise,
    /// Final ε against the dimension `d`.
    Dims,
}

impl BenchmarkSuite {
    pub fn name(self) -> &'static str {
        match self {
            BenchmarkSuite::Progress => "progress",
            BenchmarkSuite::Noise => "noise",
            BenchmarkSuite::Dims => "dims",
        }
    }

    fn default_model(self) -> ModelKind {
        match self {
            BenchmarkSuite::Progress => ModelKind::UniformDisk,
            BenchmarkSuite::Noise | BenchmarkSuite::Dims => ModelKind::SuperGauss,
        }
    }

    fn default_grid(self) -> Vec<f64> {
        match self {
            BenchmarkSuite::Progress => vec![10.0],
            BenchmarkSuite::Noise => (1..=8).map(f64::from).collect(),
            BenchmarkSuite::Dims => vec![5.0, 10.0, 15.0, 20.0],
        }
    }

    fn grid_label(self) -> &'static str {
        match self {
            BenchmarkSuite::Progress => "iteration",
            BenchmarkSuite::Noise => "r",
            BenchmarkSuite::Dims => "d",
        }
    }
}

/// Scale of a benchmark grid. Defaults are desk-sized; the full experiments
/// use 100 replications and the dimension grid up to 40 and beyond.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkOptions {
    pub suite: BenchmarkSuite,
    pub out_dir: PathBuf,
    pub model: Option<ModelKind>,
    pub reps: usize,
    pub n: usize,
    pub seed: u64,
    /// Noise exponents for `noise`, dimensions for `dims`, the single
    /// dimension for `progress`.
    pub grid: Option<Vec<f64>>,
}

impl BenchmarkOptions {
    pub fn new(suite: BenchmarkSuite, out_dir: PathBuf) -> Self {
        BenchmarkOptions {
            suite,
            out_dir,
            model: None,
            reps: 5,
            n: 1000,
            seed: 0,
            grid: None,
        }
    }
}

/// One cell of a benchmark grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkCell {
    pub value: f64,
    pub runs: usize,
    pub mean_epsilon: f64,
    pub var_epsilon: Option<f64>,
}

fn cell_config(d: usize, seed: u64, fixed_iters: Option<usize>) -> SngcaConfig {
    let mut cfg = SngcaConfig::for_dim(d);
    // the target dimension is given a priori in these experiments
    cfg.m_hint = Some(2);
    cfg.seed = seed;
    if let Some(k) = fixed_iters {
        cfg.max_iter = k;
        cfg.stop_rule = StopRule::Fixed;
    }
    cfg
}

fn final_epsilons(
    kind: ModelKind,
    d: usize,
    noise_r: Option<f64>,
    opts: &BenchmarkOptions,
) -> CliResult<Vec<f64>> {
    (0..opts.reps)
        .into_par_iter()
        .map(|rep| {
            let seed = opts.seed.wrapping_add(rep as u64);
            let spec = ModelSpec {
                kind,
                d,
                n: opts.n,
                noise_r,
                seed,
            };
            let g = generate(&spec)?;
            let recs = run_sngca(&g.data, &cell_config(d, seed, None), Some(&g.truth))?;
            Ok(recs.last().and_then(|r| r.error_vs_truth).unwrap_or(f64::NAN))
        })
        .collect()
}

fn grid_dim(v: f64) -> CliResult<usize> {
    if v.fract() != 0.0 || v < 3.0 {
        return Err(CliError::Config(format!("dimension {v} must be an integer ≥ 3")));
    }
    Ok(v as usize)
}

pub fn run_benchmark(opts: &BenchmarkOptions) -> CliResult<Vec<BenchmarkCell>> {
    if opts.reps == 0 {
        return Err(CliError::Config("reps must be at least 1".into()));
    }
    let kind = opts.model.unwrap_or(opts.suite.default_model());
    let grid = opts.grid.clone().unwrap_or_else(|| opts.suite.default_grid());
    let cell = |value: f64, eps: &[f64]| {
        let (mean, var) = mean_var(eps);
        BenchmarkCell {
            value,
            runs: eps.len(),
            mean_epsilon: mean.unwrap_or(f64::NAN),
            var_epsilon: var,
        }
    };
    match opts.suite {
        BenchmarkSuite::Progress => {
            let d = match grid.as_slice() {
                [d] => grid_dim(*d)?,
                _ => return Err(CliError::Config("progress takes a single dimension".into())),
            };
            let per_rep: Vec<Vec<f64>> = (0..opts.reps)
                .into_par_iter()
                .map(|rep| -> CliResult<Vec<f64>> {
                    let seed = opts.seed.wrapping_add(rep as u64);
                    let g = generate(&ModelSpec::new(kind, d, opts.n, seed))?;
                    let recs = run_sngca(&g.data, &cell_config(d, seed, Some(5)), Some(&g.truth))?;
                    Ok(recs.iter().filter_map(|r| r.error_vs_truth).collect())
                })
                .collect::<CliResult<_>>()?;
            Ok((0..5)
                .map(|k| {
                    let eps: Vec<f64> = per_rep.iter().filter_map(|e| e.get(k).copied()).collect();
                    cell((k + 1) as f64, &eps)
                })
                .collect())
        }
        BenchmarkSuite::Noise => grid
            .iter()
            .map(|&r| Ok(cell(r, &final_epsilons(kind, 10, Some(r), opts)?)))
            .collect(),
        BenchmarkSuite::Dims => grid
            .iter()
            .map(|&d| Ok(cell(d, &final_epsilons(kind, grid_dim(d)?, None, opts)?)))
            .collect(),
    }
}

/// Runs a suite and writes `<suite>.csv` with columns
/// `<grid label>,runs,mean_epsilon,var_epsilon`.
pub fn cmd_benchmark(opts: &BenchmarkOptions) -> CliResult<PathBuf> {
    let cells = run_benchmark(opts)?;
    std::fs::create_dir_all(&opts.out_dir).map_err(|e| CliError::io(&opts.out_dir, e))?;
    let path = opts.out_dir.join(format!("{}.csv", opts.suite.name()));
    let mut wtr = csv::Writer::from_path(&path).map_err(|e| CliError::csv(&path, e))?;
    let fail = |e| CliError::csv(&path, e);
    wtr.write_record([opts.suite.grid_label(), "runs", "mean_epsilon", "var_epsilon"])
        .map_err(fail)?;
    for c in &cells {
        wtr.write_record([
            c.value.to_string(),
            c.runs.to_string(),
            c.mean_epsilon.to_string(),
            c.var_epsilon.map_or(String::new(), |v| v.to_string()),
        ])
        .map_err(fail)?;
    }
    wtr.flush().map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}
