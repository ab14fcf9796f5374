//! `rcomp`: run sparse subspace clustering on DMAT files or synthetic data.

mod args;

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::Parser;

use rcomp_core::dataset::{generate_synthetic, save_labels, save_matrix};
use rcomp_core::experiment::{run_pipeline, run_sweep, write_rows, SweepConfig, SweepRow, Trial};

use crate::args::{expand_config, Cli, Command, CommonArgs};

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn cluster(common: &CommonArgs, out: Option<&Path>, pred: Option<&Path>) -> Result<()> {
    let methods = common.methods()?;
    if methods.len() != 1 {
        bail!("cluster takes a single --method");
    }
    let config = common.experiment(methods[0])?;
    let output = run_pipeline(&config).context("cluster")?;
    let r = &output.report;
    eprintln!(
        "{}: accuracy {:.2}%  connectivity {:.4}  subspace-preserving {:.4}  fallbacks {}  isolated {}  coding {:.3}s  spectral {:.3}s",
        config.method,
        r.accuracy_pct,
        r.connectivity,
        r.subspace_preserving_rate,
        r.fallback_count,
        r.isolated_count,
        r.elapsed_coding_s,
        r.elapsed_spectral_s
    );
    if let Some(p) = pred {
        save_labels(&output.predicted, p).context("writing predicted labels")?;
    }
    let row = SweepRow::from_report(&config, Trial::Index(0), r);
    write_rows(open_output(out)?, &[row]).context("writing CSV")?;
    Ok(())
}

fn sweep(common: &CommonArgs, axis: rcomp_core::SweepAxis, trials: usize, parallel: bool, out: Option<&Path>) -> Result<()> {
    let methods = common.methods()?;
    let base = common.experiment(methods[0])?;
    let rows = run_sweep(&SweepConfig {
        base,
        methods,
        axis,
        trials,
        parallel,
    })
    .context("sweep")?;
    write_rows(open_output(out)?, &rows).context("writing CSV")?;
    Ok(())
}

fn gen(common: &CommonArgs, out: &Path, labels: Option<&Path>) -> Result<()> {
    let Some(synth) = common.synth_config()? else {
        bail!("gen needs --synth n,d,D,pps,noise");
    };
    let data = generate_synthetic(&synth).context("gen")?;
    save_matrix(data.points(), out)?;
    if let (Some(p), Some(l)) = (labels, data.labels()) {
        save_labels(l, p)?;
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let argv = expand_config(std::env::args_os().collect())?;
    let cli = Cli::parse_from(argv);
    match &cli.command {
        Command::Cluster { common, out, pred } => cluster(common, out.as_deref(), pred.as_deref()),
        Command::Sweep {
            common,
            sweep_noise,
            sweep_points,
            trials,
            parallel,
            out,
        } => {
            let axis = match (sweep_noise, sweep_points) {
                (Some(v), None) => rcomp_core::SweepAxis::Noise(v.clone()),
                (None, Some(v)) => rcomp_core::SweepAxis::PointsPerSubspace(v.clone()),
                _ => bail!("give exactly one of --sweep-noise or --sweep-points"),
            };
            sweep(common, axis, *trials, *parallel, out.as_deref())
        }
        Command::Gen { common, out } => gen(common, out, common.labels.as_deref()),
    }
}
