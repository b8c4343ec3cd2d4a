//! The simulation driver behind `decmhd run`.

use std::path::{Path, PathBuf};

use crate::cases::build_initial_state;
use crate::diagnostics::{DiagnosticsRecord, MagneticGauge};
use crate::error::{Error, Result};
use crate::integrator::{advance, State};
use crate::io::config::RunConfig;
use crate::io::output::{write_metadata, CsvWriter, Progress};
use crate::io::snapshot::write_snapshot;

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub initial: DiagnosticsRecord,
    /// Every record written to `diagnostics.csv`, in order.
    pub records: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<PathBuf>,
    pub final_state: State,
    pub anchor: f64,
}

pub fn snapshot_name(step: usize) -> String {
    format!("snap_{step:06}.bin")
}

/// Runs `cfg` and writes `diagnostics.csv`, `metadata.json` and snapshots
/// into `cfg.output_dir`. Outputs written before a failure are kept, and the
/// metadata records the failure.
pub fn run(cfg: &RunConfig) -> Result<RunSummary> {
    let dir = cfg.output_dir.as_path();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let meta = dir.join("metadata.json");

    let s0 = build_initial_state(&cfg.case, &cfg.grid)?;
    let initial = DiagnosticsRecord::sample(0, &s0, 0.0, None)?;
    write_metadata(
        &meta,
        cfg,
        &Progress {
            status: "running",
            steps_completed: 0,
            anchor: 0.0,
            initial: &initial,
            last: None,
            error: None,
        },
    )?;

    let mut csv = CsvWriter::create(&dir.join("diagnostics.csv"))?;
    let mut snapshots = Vec::new();
    if cfg.snapshot_initial {
        snapshots.push(snapshot(dir, 0, &s0)?);
    }

    let mut gauge = MagneticGauge::default();
    let mut records = Vec::new();
    let mut completed = 0;
    let result = advance(&s0, cfg.ht, cfg.n_steps, &cfg.newton, |info| {
        gauge.update(info.previous, info.state, cfg.ht)?;
        completed = info.step;
        let last = info.step == cfg.n_steps;
        if info.step % cfg.diag_every == 0 || last {
            let r = DiagnosticsRecord::sample(info.step, info.state, gauge.anchor, Some(info.report))?;
            csv.write(&r)?;
            records.push(r);
        }
        if info.step % cfg.snapshot_every == 0 || last {
            snapshots.push(snapshot(dir, info.step, info.state)?);
        }
        Ok(())
    });

    let (status, error) = match &result {
        Ok(_) => ("completed", None),
        Err(e) => ("failed", Some(e.to_string())),
    };
    write_metadata(
        &meta,
        cfg,
        &Progress {
            status,
            steps_completed: completed,
            anchor: gauge.anchor,
            initial: &initial,
            last: records.last(),
            error,
        },
    )?;
    Ok(RunSummary {
        initial,
        records,
        snapshots,
        final_state: result?,
        anchor: gauge.anchor,
    })
}

fn snapshot(dir: &Path, step: usize, s: &State) -> Result<PathBuf> {
    let p = dir.join(snapshot_name(step));
    write_snapshot(s, &p)?;
    Ok(p)
}
