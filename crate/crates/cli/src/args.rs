use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use rcomp_core::dataset::SynthConfig;
use rcomp_core::experiment::{DataSource, ExperimentConfig, Method};

#[derive(Debug, Parser)]
#[command(name = "rcomp", version, about = "Restricted-connection OMP subspace clustering")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster one dataset and report metrics as a CSV row.
    #[command(args_override_self = true)]
    Cluster {
        #[command(flatten)]
        common: CommonArgs,
        /// CSV output (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write predicted labels here.
        #[arg(long)]
        pred: Option<PathBuf>,
    },
    /// Repeat synthetic trials over a list of noise rates or densities.
    #[command(args_override_self = true)]
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_delimiter = ',', conflicts_with = "sweep_points")]
        sweep_noise: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        sweep_points: Option<Vec<usize>>,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        /// Run trials concurrently.
        #[arg(long)]
        parallel: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic dataset as DMAT plus a labels file.
    #[command(args_override_self = true)]
    Gen {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// omp or rcomp; sweeps accept a comma list.
    #[arg(long, default_value = "rcomp")]
    pub method: String,
    /// Neighbors per point (defaults to the subspace dimension for --synth).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub rcon: usize,
    #[arg(long, default_value_t = rcomp_core::omp::DEFAULT_EPS)]
    pub eps: f64,
    /// Let a point pick back a point that picked it first.
    #[arg(long)]
    pub no_reciprocal_block: bool,
    /// Cluster count (defaults to the number of label classes).
    #[arg(long)]
    pub clusters: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// DMAT input file.
    #[arg(long, conflicts_with = "synth")]
    pub data: Option<PathBuf>,
    /// Synthetic data: n,d,D,points_per_subspace,noise.
    #[arg(long)]
    pub synth: Option<String>,
    /// Labels file (input for --data, output for gen).
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Project onto this many principal components first.
    #[arg(long)]
    pub pca: Option<usize>,
}

impl CommonArgs {
    pub fn methods(&self) -> Result<Vec<Method>> {
        let methods = self
            .method
            .split(',')
            .map(|m| m.parse::<Method>())
            .collect::<Result<Vec<_>, _>>()?;
        if methods.is_empty() {
            bail!("no method given");
        }
        Ok(methods)
    }

    pub fn synth_config(&self) -> Result<Option<SynthConfig>> {
        let Some(spec) = &self.synth else {
            return Ok(None);
        };
        let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
        let [n, d, amb, pps, noise] = parts.as_slice() else {
            bail!("--synth wants n,d,D,points_per_subspace,noise; got {spec:?}");
        };
        let int = |s: &str, what: &str| s.parse::<usize>().with_context(|| format!("--synth {what}: {s:?}"));
        Ok(Some(SynthConfig {
            n_subspaces: int(n, "n")?,
            subspace_dim: int(d, "d")?,
            ambient_dim: int(amb, "D")?,
            points_per_subspace: int(pps, "points_per_subspace")?,
            noise_rate: noise.parse().with_context(|| format!("--synth noise: {noise:?}"))?,
            seed: self.seed,
        }))
    }

    pub fn experiment(&self, method: Method) -> Result<ExperimentConfig> {
        let (data, default_k) = match (self.synth_config()?, &self.data) {
            (Some(s), None) => (DataSource::Synth(s), Some(s.subspace_dim)),
            (None, Some(p)) => (
                DataSource::File {
                    points: p.clone(),
                    labels: self.labels.clone(),
                },
                None,
            ),
            _ => bail!("give exactly one of --data or --synth"),
        };
        let Some(k) = self.k.or(default_k) else {
            bail!("--k is required with --data");
        };
        Ok(ExperimentConfig {
            method,
            k,
            rcon: self.rcon,
            eps: self.eps,
            block_reciprocal: !self.no_reciprocal_block,
            n_clusters: self.clusters,
            seed: self.seed,
            pca: self.pca,
            data,
        })
    }
}

/// Splices `key=value` lines from `--config FILE` in right after the
/// subcommand, so flags given on the command line win.
pub fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut config = None;
    let mut it = argv.into_iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            config = Some(PathBuf::from(it.next().context("--config needs a path")?));
        } else if let Some(p) = s.strip_prefix("--config=") {
            config = Some(PathBuf::from(p));
        } else {
            rest.push(a);
        }
    }
    let Some(path) = config else {
        return Ok(rest);
    };
    let text = fs::read_to_string(&path).with_context(|| format!("reading config {}", path.display()))?;
    let injected = parse_config(&text).with_context(|| format!("config {}", path.display()))?;
    if rest.len() < 2 {
        bail!("--config needs a subcommand");
    }
    let mut out: Vec<OsString> = rest.drain(..2).collect();
    out.extend(injected.into_iter().map(OsString::from));
    out.extend(rest);
    Ok(out)
}

fn parse_config(text: &str) -> Result<Vec<String>> {
    let mut args = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("line {}: expected key=value", n + 1);
        };
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        match value.trim() {
            "true" => args.push(format!("--{key}")),
            "false" => {}
            v => {
                args.push(format!("--{key}"));
                args.push(v.to_string());
            }
        }
    }
    Ok(args)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_lines() {
        let args = parse_config("# comment\nk = 4\nsweep_noise=0,0.5\nparallel=true\nno-reciprocal-block=false\n").unwrap();
        assert_eq!(args, vec!["--k", "4", "--sweep-noise", "0,0.5", "--parallel"]);
        assert!(parse_config("k 4").is_err());
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.cfg");
        fs::write(&p, "k=3\nrcon=5\nsynth=2,2,6,10,0\n").unwrap();
        let argv: Vec<OsString> = ["rcomp", "cluster", "--rcon", "1", "--config", p.to_str().unwrap()]
            .iter()
            .map(OsString::from)
            .collect();
        let cli = Cli::parse_from(expand_config(argv).unwrap());
        let Command::Cluster { common, .. } = cli.command else {
            panic!("wrong subcommand")
        };
        assert_eq!(common.k, Some(3));
        assert_eq!(common.rcon, 1);
        let cfg = common.experiment(Method::Rcomp).unwrap();
        assert!(matches!(cfg.data, DataSource::Synth(s) if s.points_per_subspace == 10));
    }

    #[test]
    fn synth_spec_errors() {
        let cli = Cli::parse_from(["rcomp", "gen", "--synth", "3,6,40", "--out", "x"]);
        let Command::Gen { common, .. } = cli.command else { panic!() };
        assert!(common.synth_config().is_err());
    }
}
