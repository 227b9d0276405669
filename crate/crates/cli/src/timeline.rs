//! On-disk timeline index (`timeline.json`) and its conversion to the
//! in-core [`Timeline`] with file-backed field handles.

use std::path::Path;

use serde::{Deserialize, Serialize};
use vortexcrit::grid::GridSpec;
use vortexcrit::solver::{Diagnostics, FieldHandle, RunStatus, Snapshot, Timeline};

use crate::error::{CliError, CliResult};

#[derive(Debug, Serialize, Deserialize)]
pub struct TimelineIndex {
    pub n: usize,
    pub box_length: f64,
    pub nu: f64,
    pub status: StatusIndex,
    pub snapshots: Vec<SnapshotIndex>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum StatusIndex {
    Completed,
    Unstable { time: f64, dt: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SnapshotIndex {
    pub index: usize,
    pub time: f64,
    /// Path of the stored field relative to the timeline directory.
    pub field: Option<String>,
    pub energy: f64,
    pub enstrophy: f64,
    pub helicity: f64,
    pub omega_linf: f64,
    pub omega_l1: f64,
}

impl TimelineIndex {
    pub fn from_timeline(timeline: &Timeline<f64>) -> Self {
        Self {
            n: timeline.grid.n(),
            box_length: timeline.grid.box_length(),
            nu: timeline.viscosity,
            status: match timeline.status {
                RunStatus::Completed => StatusIndex::Completed,
                RunStatus::Unstable { time, dt } => StatusIndex::Unstable { time, dt },
            },
            snapshots: timeline
                .snapshots()
                .iter()
                .map(|s| SnapshotIndex {
                    index: s.index,
                    time: s.time,
                    field: match &s.field {
                        Some(FieldHandle::File(p)) => Some(p.display().to_string()),
                        _ => None,
                    },
                    energy: s.diagnostics.energy,
                    enstrophy: s.diagnostics.enstrophy,
                    helicity: s.diagnostics.helicity,
                    omega_linf: s.diagnostics.omega_linf,
                    omega_l1: s.diagnostics.omega_l1,
                })
                .collect(),
        }
    }

    pub fn save(&self, dir: &Path) -> CliResult<()> {
        let path = dir.join("timeline.json");
        std::fs::write(&path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> CliResult<Self> {
        let path = dir.join("timeline.json");
        let text = std::fs::read_to_string(&path).map_err(|e| {
            CliError::Config(format!("cannot read timeline index {}: {e}", path.display()))
        })?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Rehydrate with field handles resolved against `dir`.
    pub fn to_timeline(&self, dir: &Path) -> CliResult<Timeline<f64>> {
        let grid = GridSpec::new(self.n, self.box_length)?;
        let mut timeline = Timeline::new(grid, self.nu);
        timeline.status = match self.status {
            StatusIndex::Completed => RunStatus::Completed,
            StatusIndex::Unstable { time, dt } => RunStatus::Unstable { time, dt },
        };
        for snap in &self.snapshots {
            timeline.push(Snapshot {
                index: snap.index,
                time: snap.time,
                diagnostics: Diagnostics {
                    energy: snap.energy,
                    enstrophy: snap.enstrophy,
                    helicity: snap.helicity,
                    omega_linf: snap.omega_linf,
                    omega_l1: snap.omega_l1,
                },
                field: snap.field.as_ref().map(|p| FieldHandle::File(dir.join(p))),
            })?;
        }
        Ok(timeline)
    }
}
