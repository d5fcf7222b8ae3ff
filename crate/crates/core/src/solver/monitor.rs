use std::fs::File;
use std::io::{BufWriter, Write};
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};

use super::invariants::{InvariantCalculator, InvariantReport, Invariants};
use super::State;
use crate::error::Result;
use crate::models::ModelSpec;
use crate::spectral::snapshot::write_snapshot;
use crate::spectral::{Grid, SpectralField};

/// What a monitor sees at an observation point.
pub struct Observation<'a> {
    pub step: usize,
    pub state: &'a State,
    /// True for the last state of a run.
    pub last: bool,
}

/// Observes a run every [`Monitor::every`] steps (and at the final step) and
/// may stop it early.
pub trait Monitor {
    fn every(&self) -> usize;
    fn observe(&mut self, obs: &Observation<'_>) -> Result<ControlFlow<()>>;
}

/// Records conserved quantities and optionally streams them to CSV.
pub struct InvariantMonitor {
    calc: InvariantCalculator,
    every: usize,
    initial: Option<Invariants>,
    reports: Vec<InvariantReport>,
    max_abs: Vec<f64>,
    csv: Option<BufWriter<File>>,
}

pub const MONITOR_COLUMNS: [&str; 8] = ["time", "Q", "E", "P", "dQ_rel", "dE_rel", "dP_rel", "max_abs_v"];

impl InvariantMonitor {
    pub fn new(model: &ModelSpec, grid: &Grid, every: usize) -> Result<Self> {
        Ok(InvariantMonitor {
            calc: InvariantCalculator::new(model, grid)?,
            every: every.max(1),
            initial: None,
            reports: Vec::new(),
            max_abs: Vec::new(),
            csv: None,
        })
    }

    /// Streams every report to `path` as it is produced.
    pub fn with_csv(mut self, path: &Path) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{}", MONITOR_COLUMNS.join(","))?;
        self.csv = Some(out);
        Ok(self)
    }

    pub fn reports(&self) -> &[InvariantReport] {
        &self.reports
    }

    pub fn max_abs(&self) -> &[f64] {
        &self.max_abs
    }

    pub fn last(&self) -> Option<&InvariantReport> {
        self.reports.last()
    }
}

impl Monitor for InvariantMonitor {
    fn every(&self) -> usize {
        self.every
    }

    fn observe(&mut self, obs: &Observation<'_>) -> Result<ControlFlow<()>> {
        let now = self.calc.evaluate(obs.state);
        let initial = *self.initial.get_or_insert(now);
        let report = InvariantReport::new(obs.state.time, now, initial);
        let max_abs = self.calc.max_abs_strain(obs.state);
        if let Some(out) = self.csv.as_mut() {
            let r = &report;
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.time, r.q, r.e, r.p, r.dq_rel, r.de_rel, r.dp_rel, max_abs
            )?;
            out.flush()?;
        }
        self.reports.push(report);
        self.max_abs.push(max_abs);
        Ok(ControlFlow::Continue(()))
    }
}

/// Writes snapshots of the first state component.
pub struct SnapshotWriter {
    dir: PathBuf,
    every: usize,
    model: String,
    written: Vec<PathBuf>,
}

impl SnapshotWriter {
    pub fn new(dir: &Path, every: usize, model: &str) -> Self {
        SnapshotWriter {
            dir: dir.to_path_buf(),
            every: every.max(1),
            model: model.to_string(),
            written: Vec::new(),
        }
    }

    /// Stems of the snapshots written so far.
    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

impl Monitor for SnapshotWriter {
    fn every(&self) -> usize {
        self.every
    }

    fn observe(&mut self, obs: &Observation<'_>) -> Result<ControlFlow<()>> {
        let stem = self.dir.join(format!("snapshot_{:08}", obs.step));
        let mut field = SpectralField::from_spectral(&obs.state.grid, obs.state.components[0].clone());
        write_snapshot(&stem, &mut field, obs.state.time, &self.model)?;
        self.written.push(stem);
        Ok(ControlFlow::Continue(()))
    }
}
