//! End-to-end runs: data → sparse code → affinity → spectral clustering →
//! metrics, plus trial sweeps over noise rate or subspace density.

use std::fmt;
use std::io;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::coefficients::CoefficientMatrix;
use crate::dataset::{generate_synthetic, load_matrix, pca_project, Dataset, SynthConfig};
use crate::error::{Error, Result};
use crate::metrics::{clustering_accuracy, connectivity, subspace_preserving_rate, EvalReport};
use crate::omp::{omp_sparse_code, OmpParams, DEFAULT_EPS};
use crate::rcomp::{rcomp_sparse_code, RcompParams};
use crate::spectral::{build_affinity, spectral_cluster};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Omp,
    Rcomp,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Omp => "omp",
            Method::Rcomp => "rcomp",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "omp" => Ok(Method::Omp),
            "rcomp" => Ok(Method::Rcomp),
            other => Err(Error::ConfigInvalid(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Synth(SynthConfig),
    File {
        points: PathBuf,
        labels: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub method: Method,
    pub k: usize,
    pub rcon: usize,
    pub eps: f64,
    pub block_reciprocal: bool,
    /// Defaults to the number of ground-truth classes.
    pub n_clusters: Option<usize>,
    pub seed: u64,
    /// Optional PCA target dimension applied after loading.
    pub pca: Option<usize>,
    pub data: DataSource,
}

impl ExperimentConfig {
    pub fn synthetic(method: Method, synth: SynthConfig) -> Self {
        ExperimentConfig {
            method,
            k: synth.subspace_dim,
            rcon: 2,
            eps: DEFAULT_EPS,
            block_reciprocal: true,
            n_clusters: None,
            seed: synth.seed,
            pca: None,
            data: DataSource::Synth(synth),
        }
    }
}

/// Everything produced by one run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: EvalReport,
    pub predicted: Vec<usize>,
    pub coefficients: CoefficientMatrix,
}

pub fn load_data(config: &ExperimentConfig) -> Result<Dataset> {
    let data = match &config.data {
        DataSource::Synth(s) => generate_synthetic(s)?,
        DataSource::File { points, labels } => load_matrix(points, labels.as_deref())?,
    };
    match config.pca {
        Some(p) => pca_project(&data, p).map_err(|e| e.in_stage("pca")),
        None => Ok(data),
    }
}

/// Codes `data` with the configured method; returns the coefficients and the
/// number of fallback first selections.
pub fn sparse_code(data: &Dataset, config: &ExperimentConfig) -> Result<(CoefficientMatrix, usize)> {
    match config.method {
        Method::Omp => {
            let params = OmpParams {
                k: config.k,
                eps: config.eps,
            };
            Ok((omp_sparse_code(data, &params)?, 0))
        }
        Method::Rcomp => {
            let params = RcompParams {
                k: config.k,
                rcon: config.rcon,
                eps: config.eps,
                block_reciprocal: config.block_reciprocal,
            };
            let (c, ledger) = rcomp_sparse_code(data, &params)?;
            Ok((c, ledger.fallback_count()))
        }
    }
}

/// Runs the pipeline on already-loaded data.
pub fn run_on(data: &Dataset, config: &ExperimentConfig) -> Result<RunOutput> {
    let n_clusters = match (config.n_clusters, data.n_classes()) {
        (Some(c), _) => c,
        (None, Some(c)) => c,
        (None, None) => {
            return Err(Error::ConfigInvalid(
                "cluster count required for unlabelled data".into(),
            ))
        }
    };

    let t0 = Instant::now();
    let (coefficients, fallback_count) = sparse_code(data, config).map_err(|e| e.in_stage("coding"))?;
    let elapsed_coding_s = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let w = build_affinity(&coefficients);
    let predicted = spectral_cluster(&w, n_clusters, config.seed).map_err(|e| e.in_stage("spectral"))?;
    let elapsed_spectral_s = t1.elapsed().as_secs_f64();

    let (accuracy_pct, conn, spr) = match data.labels() {
        Some(truth) => (
            clustering_accuracy(truth, &predicted)?,
            connectivity(&w, truth)?,
            subspace_preserving_rate(&coefficients, truth)?,
        ),
        None => (f64::NAN, f64::NAN, f64::NAN),
    };

    Ok(RunOutput {
        report: EvalReport {
            accuracy_pct,
            connectivity: conn,
            subspace_preserving_rate: spr,
            fallback_count,
            isolated_count: w.isolated_count(),
            elapsed_coding_s,
            elapsed_spectral_s,
        },
        predicted,
        coefficients,
    })
}

pub fn run_pipeline(config: &ExperimentConfig) -> Result<RunOutput> {
    let data = load_data(config).map_err(|e| e.in_stage("load"))?;
    run_on(&data, config)
}

pub fn run_single(config: &ExperimentConfig) -> Result<EvalReport> {
    run_pipeline(config).map(|o| o.report)
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    Noise(Vec<f64>),
    PointsPerSubspace(Vec<usize>),
}

impl SweepAxis {
    fn len(&self) -> usize {
        match self {
            SweepAxis::Noise(v) => v.len(),
            SweepAxis::PointsPerSubspace(v) => v.len(),
        }
    }

    fn apply(&self, idx: usize, base: &SynthConfig) -> SynthConfig {
        match self {
            SweepAxis::Noise(v) => SynthConfig {
                noise_rate: v[idx],
                ..*base
            },
            SweepAxis::PointsPerSubspace(v) => SynthConfig {
                points_per_subspace: v[idx],
                ..*base
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Template run; its data source must be synthetic.
    pub base: ExperimentConfig,
    pub methods: Vec<Method>,
    pub axis: SweepAxis,
    pub trials: usize,
    /// Run trials on the rayon pool. Timings then include contention.
    pub parallel: bool,
}

/// Trial index, or the per-value mean row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trial {
    Index(usize),
    Mean,
}

impl Serialize for Trial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Trial::Index(i) => s.serialize_u64(*i as u64),
            Trial::Mean => s.serialize_str("mean"),
        }
    }
}

impl<'de> Deserialize<'de> for Trial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == "mean" {
            return Ok(Trial::Mean);
        }
        s.parse().map(Trial::Index).map_err(serde::de::Error::custom)
    }
}

/// One CSV record. Column order is the file's header order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub method: Method,
    pub k: usize,
    pub rcon: Option<usize>,
    pub noise: Option<f64>,
    pub points_per_subspace: Option<usize>,
    pub trial: Trial,
    pub accuracy_pct: f64,
    pub connectivity: f64,
    pub subspace_preserving_rate: f64,
    pub fallback_count: f64,
    pub isolated_count: f64,
    pub coding_s: f64,
    pub spectral_s: f64,
}

pub const CSV_HEADER: &str = "method,k,rcon,noise,points_per_subspace,trial,accuracy_pct,connectivity,subspace_preserving_rate,fallback_count,isolated_count,coding_s,spectral_s";

fn millis(s: f64) -> f64 {
    (s * 1000.0).round() / 1000.0
}

impl SweepRow {
    pub fn from_report(config: &ExperimentConfig, trial: Trial, r: &EvalReport) -> Self {
        let (noise, pps) = match &config.data {
            DataSource::Synth(s) => (Some(s.noise_rate), Some(s.points_per_subspace)),
            DataSource::File { .. } => (None, None),
        };
        SweepRow {
            method: config.method,
            k: config.k,
            rcon: (config.method == Method::Rcomp).then_some(config.rcon),
            noise,
            points_per_subspace: pps,
            trial,
            accuracy_pct: r.accuracy_pct,
            connectivity: r.connectivity,
            subspace_preserving_rate: r.subspace_preserving_rate,
            fallback_count: r.fallback_count as f64,
            isolated_count: r.isolated_count as f64,
            coding_s: millis(r.elapsed_coding_s),
            spectral_s: millis(r.elapsed_spectral_s),
        }
    }

    fn mean_of(rows: &[SweepRow]) -> SweepRow {
        let n = rows.len() as f64;
        let avg = |f: fn(&SweepRow) -> f64| rows.iter().map(f).sum::<f64>() / n;
        SweepRow {
            trial: Trial::Mean,
            accuracy_pct: avg(|r| r.accuracy_pct),
            connectivity: avg(|r| r.connectivity),
            subspace_preserving_rate: avg(|r| r.subspace_preserving_rate),
            fallback_count: avg(|r| r.fallback_count),
            isolated_count: avg(|r| r.isolated_count),
            coding_s: millis(avg(|r| r.coding_s)),
            spectral_s: millis(avg(|r| r.spectral_s)),
            ..rows[0].clone()
        }
    }
}

/// Data rows in (value, method, trial) order, followed by one mean row per
/// (value, method). Trial `t` uses seed `base.seed + t` for both the data and
/// the clustering.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    let DataSource::Synth(base_synth) = &config.base.data else {
        return Err(Error::ConfigInvalid("sweeps need a synthetic data source".into()));
    };
    if config.trials < 1 {
        return Err(Error::ConfigInvalid("trials must be >= 1".into()));
    }
    if config.axis.len() == 0 {
        return Err(Error::ConfigInvalid("sweep list is empty".into()));
    }
    if config.methods.is_empty() {
        return Err(Error::ConfigInvalid("no methods to sweep".into()));
    }

    let mut jobs = Vec::new();
    for v in 0..config.axis.len() {
        for &method in &config.methods {
            for t in 0..config.trials {
                let seed = config.base.seed.wrapping_add(t as u64);
                let synth = SynthConfig {
                    seed,
                    ..config.axis.apply(v, base_synth)
                };
                jobs.push((
                    t,
                    ExperimentConfig {
                        method,
                        seed,
                        data: DataSource::Synth(synth),
                        ..config.base.clone()
                    },
                ));
            }
        }
    }

    let run = |(t, cfg): &(usize, ExperimentConfig)| -> Result<SweepRow> {
        let report = run_single(cfg)?;
        Ok(SweepRow::from_report(cfg, Trial::Index(*t), &report))
    };
    let rows: Vec<SweepRow> = if config.parallel {
        jobs.par_iter().map(run).collect::<Result<_>>()?
    } else {
        jobs.iter().map(run).collect::<Result<_>>()?
    };

    let means: Vec<SweepRow> = rows.chunks(config.trials).map(SweepRow::mean_of).collect();
    Ok(rows.into_iter().chain(means).collect())
}

pub fn write_rows<W: io::Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn read_rows<R: io::Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::ConfigInvalid(format!("unexpected CSV header {:?}", header.join(","))));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}
