//! Structured run configuration: one TOML file with a section per module.
//! Unknown keys are hard errors, so typos in constant names cannot pass
//! silently.

use std::path::Path;

use serde::Deserialize;
use vortexcrit::grid::{GridSpec, MKConfig, RingConfig};
use vortexcrit::monitor::FrameworkConstants;
use vortexcrit::oscillation::{CentersMode, PhiArgument, WeightSpec};
use vortexcrit::solver::{CflConfig, EvolveConfig};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub grid: GridSection,
    pub rings: RingsSection,
    pub solver: SolverSection,
    pub sparseness: SparsenessSection,
    pub oscillation: OscillationSection,
    pub harmonic: HarmonicSection,
    pub monitor: MonitorSection,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            grid: GridSection::default(),
            rings: RingsSection::default(),
            solver: SolverSection::default(),
            sparseness: SparsenessSection::default(),
            oscillation: OscillationSection::default(),
            harmonic: HarmonicSection::default(),
            monitor: MonitorSection::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub n: usize,
    pub box_length: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { n: 64, box_length: 2.0 * std::f64::consts::PI }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RingsSection {
    pub radius: f64,
    pub core_radius: f64,
    pub circulation: f64,
    /// Half-angle between each ring plane and the symmetry plane, radians.
    pub inclination: f64,
    pub separation: f64,
}

impl Default for RingsSection {
    fn default() -> Self {
        Self {
            radius: 1.0,
            core_radius: 0.2,
            circulation: 1.0,
            inclination: std::f64::consts::FRAC_PI_3,
            separation: 0.2,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub nu: f64,
    pub t_final: f64,
    pub snapshot_interval: f64,
    pub cfl: f64,
    pub dt_max: f64,
    pub dealias: bool,
    pub store_fields: bool,
    pub output_dir: String,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            nu: 0.01,
            t_final: 2.0,
            snapshot_interval: 0.25,
            cfl: 0.5,
            dt_max: 0.1,
            dealias: true,
            store_fields: true,
            output_dir: "out".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SparsenessSection {
    /// Sparseness parameter δ; the proof's value is 3/4.
    pub delta: f64,
    /// Level-set cutoff λ; omitted → 1/(2M) from the fixed point.
    pub lambda: Option<f64>,
    /// "3d" (pointwise maximal component, FFT scan) or "1d" (union mask,
    /// sampled directions).
    pub mode: String,
    /// Direction count for 1D scans: 13 uses the lattice set; larger
    /// values append a Fibonacci-sphere sample.
    pub directions: usize,
}

impl Default for SparsenessSection {
    fn default() -> Self {
        Self { delta: 0.75, lambda: None, mode: "3d".into(), directions: 13 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OscillationSection {
    pub floor_fraction: f64,
    /// "power" | "log_composite" | "inverse_log" | "constant".
    pub weight: String,
    /// Log-composite order.
    pub k: u32,
    /// Power-weight exponent.
    pub alpha: f64,
    /// Use the strict zero-offset weight (restricted domain).
    pub strict_offset: bool,
    pub scales: Vec<f64>,
    pub stride: usize,
    /// "valid" | "all".
    pub centers: String,
}

impl Default for OscillationSection {
    fn default() -> Self {
        Self {
            floor_fraction: 1e-3,
            weight: "log_composite".into(),
            k: 1,
            alpha: 0.5,
            strict_offset: false,
            scales: vec![0.5, 0.25],
            stride: 1,
            centers: "valid".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HarmonicSection {
    pub grid_n: usize,
    pub alphas: Vec<f64>,
    /// Extra random slit sets per α (extremal-property sampling).
    pub random_per_alpha: usize,
    pub max_intervals: usize,
}

impl Default for HarmonicSection {
    fn default() -> Self {
        Self {
            grid_n: 512,
            alphas: vec![0.1, 0.25, 0.5, 0.75, 1.0],
            random_per_alpha: 0,
            max_intervals: 4,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonitorSection {
    pub c_star: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    /// Log-composite order of the predicted-scale weight (0 = no log
    /// factor).
    pub k: u32,
    /// "reciprocal" | "direct".
    pub phi_argument: String,
    /// Include a bmo summary per escape snapshot in the verdict.
    pub bmo_summary: bool,
}

impl Default for MonitorSection {
    fn default() -> Self {
        Self {
            c_star: 1.0,
            c1: 1.0,
            c2: 1.0,
            c3: 1.0,
            c4: 1.0,
            k: 1,
            phi_argument: "reciprocal".into(),
            bmo_summary: true,
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: Config = toml::from_str(&text).map_err(|e| {
            // toml errors carry line/column context in their Display.
            CliError::Config(format!("{}: {e}", path.display()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.grid_spec()?;
        self.mk_config()?;
        self.weight_spec()?;
        self.constants().validate()?;
        self.phi_argument()?;
        self.sparseness_mode()?;
        self.centers_mode()?;
        if !(self.sparseness.delta > 0.0 && self.sparseness.delta < 1.0) {
            return Err(CliError::Config("sparseness.delta must lie in (0, 1)".into()));
        }
        if let Some(l) = self.sparseness.lambda {
            if !(l > 0.0 && l < 1.0) {
                return Err(CliError::Config("sparseness.lambda must lie in (0, 1)".into()));
            }
        }
        Ok(())
    }

    pub fn grid_spec(&self) -> CliResult<GridSpec<f64>> {
        Ok(GridSpec::new(self.grid.n, self.grid.box_length)?)
    }

    pub fn mk_config(&self) -> CliResult<MKConfig<f64>> {
        let cfg = MKConfig {
            ring: RingConfig {
                radius: self.rings.radius,
                core_radius: self.rings.core_radius,
                circulation: self.rings.circulation,
                center: [0.0; 3],
                unit_normal: [1.0, 0.0, 0.0],
            },
            inclination: self.rings.inclination,
            separation: self.rings.separation,
            viscosity: self.solver.nu,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn evolve_config(&self) -> EvolveConfig<f64> {
        EvolveConfig {
            viscosity: self.solver.nu,
            t_final: self.solver.t_final,
            snapshot_interval: self.solver.snapshot_interval,
            cfl: CflConfig {
                c_cfl: self.solver.cfl,
                dt_max: self.solver.dt_max,
                explicit_viscous: false,
            },
            dealias: self.solver.dealias,
        }
    }

    pub fn weight_spec(&self) -> CliResult<WeightSpec<f64>> {
        Ok(match self.oscillation.weight.as_str() {
            "power" => WeightSpec::power(self.oscillation.alpha)?,
            "log_composite" => {
                if self.oscillation.strict_offset {
                    WeightSpec::log_composite_strict(self.oscillation.k)?
                } else {
                    WeightSpec::log_composite(self.oscillation.k)?
                }
            }
            "inverse_log" => WeightSpec::inverse_log(),
            "constant" => WeightSpec::constant(),
            other => {
                return Err(CliError::Config(format!(
                    "oscillation.weight must be power|log_composite|inverse_log|constant, got {other}"
                )))
            }
        })
    }

    pub fn constants(&self) -> FrameworkConstants<f64> {
        FrameworkConstants {
            c_star: self.monitor.c_star,
            c1: self.monitor.c1,
            c2: self.monitor.c2,
            c3: self.monitor.c3,
            c4: self.monitor.c4,
        }
    }

    pub fn phi_argument(&self) -> CliResult<PhiArgument> {
        match self.monitor.phi_argument.as_str() {
            "reciprocal" => Ok(PhiArgument::Reciprocal),
            "direct" => Ok(PhiArgument::Direct),
            other => Err(CliError::Config(format!(
                "monitor.phi_argument must be reciprocal|direct, got {other}"
            ))),
        }
    }

    pub fn sparseness_mode(&self) -> CliResult<&str> {
        match self.sparseness.mode.as_str() {
            m @ ("3d" | "1d") => Ok(m),
            other => Err(CliError::Config(format!(
                "sparseness.mode must be 3d|1d, got {other}"
            ))),
        }
    }

    pub fn centers_mode(&self) -> CliResult<CentersMode> {
        match self.oscillation.centers.as_str() {
            "valid" => Ok(CentersMode::ValidOnly),
            "all" => Ok(CentersMode::All),
            other => Err(CliError::Config(format!(
                "oscillation.centers must be valid|all, got {other}"
            ))),
        }
    }
}
