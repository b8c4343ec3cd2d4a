//! Diagnostics CSV and run metadata.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::io::config::RunConfig;

pub const CSV_HEADER: &str =
    "step,t,e_kin,e_mag,e_total,cross_helicity,magnetic_helicity,div_v_max,div_b_max,newton_iters,residual_norm";

pub fn csv_row(r: &DiagnosticsRecord) -> String {
    format!(
        "{},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{},{:?}",
        r.step,
        r.t,
        r.e_kin,
        r.e_mag,
        r.e_total,
        r.cross_helicity,
        r.magnetic_helicity,
        r.div_v_max,
        r.div_b_max,
        r.newton_iterations,
        r.residual_norm
    )
}

/// Line-flushed CSV writer, so a failed run keeps every row written so far.
pub struct CsvWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl CsvWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = CsvWriter {
            path: path.to_path_buf(),
            out: BufWriter::new(f),
        };
        w.line(CSV_HEADER)?;
        Ok(w)
    }

    pub fn write(&mut self, r: &DiagnosticsRecord) -> Result<()> {
        self.line(&csv_row(r))
    }

    fn line(&mut self, s: &str) -> Result<()> {
        writeln!(self.out, "{s}")
            .and_then(|_| self.out.flush())
            .map_err(|e| Error::io(&self.path, e))
    }
}

pub(crate) struct Progress<'a> {
    pub status: &'a str,
    pub steps_completed: usize,
    pub anchor: f64,
    pub initial: &'a DiagnosticsRecord,
    pub last: Option<&'a DiagnosticsRecord>,
    pub error: Option<String>,
}

pub(crate) fn write_metadata(path: &Path, cfg: &RunConfig, p: &Progress) -> Result<()> {
    let g = &cfg.grid;
    let doc = json!({
        "program": "decmhd",
        "version": env!("CARGO_PKG_VERSION"),
        "status": p.status,
        "error": p.error,
        "case": {
            "spec": cfg.case,
            "v0": cfg.case.v0(g),
            "pressure": cfg.case.pressure(),
        },
        "grid": {
            "nx": g.nx, "ny": g.ny, "lx": g.lx, "ly": g.ly,
            "x0": g.x0, "y0": g.y0, "hx": g.hx, "hy": g.hy,
        },
        "time": {
            "ht": cfg.ht,
            "t_end": cfg.t_end,
            "n_steps": cfg.n_steps,
            "steps_completed": p.steps_completed,
        },
        "output": {
            "dir": cfg.output_dir,
            "snapshot_every": cfg.snapshot_every,
            "diag_every": cfg.diag_every,
            "snapshot_initial": cfg.snapshot_initial,
        },
        "solver": cfg.newton,
        "magnetic_gauge": {
            "anchor_slot": [0, 0],
            "initial_anchor": 0.0,
            "anchor": p.anchor,
        },
        "initial_diagnostics": p.initial,
        "last_diagnostics": p.last,
    });
    let text = serde_json::to_string_pretty(&doc).expect("metadata is valid JSON");
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}
