//! Trajectory writers.

use std::io::{self, Write};

use metriplectic::analysis::{TrajectoryRecord, TrajectorySummary};
use metriplectic::config::RunConfig;
use metriplectic::{DiagnosticSample, Vec3};
use serde::Serialize;

pub const CSV_HEADER: &str = "t,x,y,z,H,S,sigma2,ortho";

/// Indices of the monitored samples to write: every `every`-th one plus
/// the last.
fn kept(n: usize, every: usize) -> impl Iterator<Item = usize> {
    let every = every.max(1);
    (0..n).filter(move |&i| i % every == 0 || i + 1 == n)
}

/// One row per kept sample, floats with 17 significant digits.
pub fn write_csv(w: &mut dyn Write, rec: &TrajectoryRecord, every: usize) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    let samples: Vec<(f64, &DiagnosticSample)> = rec.samples().collect();
    for i in kept(samples.len(), every) {
        let (t, d) = samples[i];
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            t,
            d.x.x,
            d.x.y,
            d.x.z,
            d.h_val,
            d.s_val,
            d.sigma2(),
            d.ortho_residual
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Meta<'a> {
    version: &'static str,
    config: &'a RunConfig,
}

#[derive(Serialize)]
struct Sample {
    t: f64,
    x: Vec3,
    #[serde(rename = "H")]
    h: f64,
    #[serde(rename = "S")]
    s: f64,
    sigma2: f64,
    ortho: f64,
    xi: Vec3,
    regular: bool,
}

#[derive(Serialize)]
struct Document<'a> {
    meta: Meta<'a>,
    samples: Vec<Sample>,
    summary: &'a TrajectorySummary,
}

pub fn write_json(w: &mut dyn Write, cfg: &RunConfig, rec: &TrajectoryRecord) -> io::Result<()> {
    let all: Vec<(f64, &DiagnosticSample)> = rec.samples().collect();
    let samples = kept(all.len(), cfg.output.every)
        .map(|i| {
            let (t, d) = all[i];
            Sample { t, x: d.x, h: d.h_val, s: d.s_val, sigma2: d.sigma2(), ortho: d.ortho_residual, xi: d.xi, regular: d.regular }
        })
        .collect();
    let doc = Document { meta: Meta { version: env!("CARGO_PKG_VERSION"), config: cfg }, samples, summary: &rec.summary };
    serde_json::to_writer_pretty(&mut *w, &doc)?;
    writeln!(w)
}
