//! The criticality layer: closed-form scale formulas, escape-time
//! detection, and the verdict comparing the measured scale of sparseness
//! against the analyticity radius along a run.
//!
//! None of the calibration constants (`c_*`, `c₁`, `c₂`, `c₃`, `c₄`) have
//! known numeric values; they default to 1 and are echoed into every
//! report. `c_*` (initial-configuration threshold) and `c₃` (escape-time
//! radius) are kept separate.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonic::{solve_m, MSolution};
use crate::oscillation::{
    bmo_phi_norm, direction_field, BmoReport, CentersMode, OscillationField, PhiArgument,
    WeightSpec,
};
use crate::scalar::Scalar;
use crate::solver::Timeline;
use crate::sparseness::{sparseness_scale_pointwise, superlevel_mask};

/// Dimensionless calibration constants, all positive, defaults 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameworkConstants<T: Scalar> {
    pub c_star: T,
    pub c1: T,
    pub c2: T,
    pub c3: T,
    pub c4: T,
}

impl<T: Scalar> Default for FrameworkConstants<T> {
    fn default() -> Self {
        let one = T::one();
        Self { c_star: one, c1: one, c2: one, c3: one, c4: one }
    }
}

impl<T: Scalar> FrameworkConstants<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c_star", self.c_star),
            ("c1", self.c1),
            ("c2", self.c2),
            ("c3", self.c3),
            ("c4", self.c4),
        ] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "constant {name} must be positive and finite, got {}",
                    v.to_f64_lossy()
                )));
            }
        }
        Ok(())
    }
}

fn require_positive<T: Scalar>(name: &str, v: T) -> Result<()> {
    if !(v > T::zero()) || !v.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "{name} must be positive and finite, got {}",
            v.to_f64_lossy()
        )));
    }
    Ok(())
}

/// Core diameter scale `δ = (Γ/4π)^{1/2}·‖ω‖∞^{−1/2}`.
pub fn core_scale<T: Scalar>(gamma: T, omega_linf: T) -> Result<T> {
    require_positive("circulation", gamma)?;
    require_positive("omega_linf", omega_linf)?;
    Ok((gamma / (T::of(4.0) * T::PI())).sqrt() / omega_linf.sqrt())
}

/// Amplification `A_ω = δ₀²/δ(t)²`.
pub fn amplification<T: Scalar>(delta0: T, delta_t: T) -> Result<T> {
    require_positive("delta0", delta0)?;
    require_positive("delta_t", delta_t)?;
    Ok(delta0 * delta0 / (delta_t * delta_t))
}

/// Initial axial vorticity `ω₀ = Γ/(4πδ₀²)`.
pub fn axial_vorticity<T: Scalar>(gamma: T, delta0: T) -> Result<T> {
    require_positive("circulation", gamma)?;
    require_positive("delta0", delta0)?;
    Ok(gamma / (T::of(4.0) * T::PI() * delta0 * delta0))
}

/// Analyticity radius `ρ = (1/c)·ν^{1/2}·‖ω‖∞^{−1/2}` (pass `c_star` for
/// the configuration bound, `c3` in escape-time mode).
pub fn analyticity_radius<T: Scalar>(omega_linf: T, nu: T, c: T) -> Result<T> {
    require_positive("omega_linf", omega_linf)?;
    require_positive("nu", nu)?;
    require_positive("constant", c)?;
    Ok((nu / omega_linf).sqrt() / c)
}

/// Local existence window `T ≥ ν/(c₁‖ω₀‖∞)` with the analyticity radius
/// `t^{1/2}/c₂` valid for `t ∈ (0, T]`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LocalExistence<T: Scalar> {
    pub t_max: T,
    c2: T,
}

impl<T: Scalar> LocalExistence<T> {
    pub fn radius_at(&self, t: T) -> Result<T> {
        if !(t > T::zero() && t <= self.t_max) {
            return Err(Error::InvalidParameter(format!(
                "time {} outside the existence window (0, {}]",
                t.to_f64_lossy(),
                self.t_max.to_f64_lossy()
            )));
        }
        Ok(t.sqrt() / self.c2)
    }
}

pub fn local_existence<T: Scalar>(
    omega0_linf: T,
    nu: T,
    constants: &FrameworkConstants<T>,
) -> Result<LocalExistence<T>> {
    require_positive("omega0_linf", omega0_linf)?;
    require_positive("nu", nu)?;
    constants.validate()?;
    Ok(LocalExistence { t_max: nu / (constants.c1 * omega0_linf), c2: constants.c2 })
}

/// The initial-configuration Reynolds threshold `Γ/ν ≤ 4π/c_*²`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReynoldsCheck<T: Scalar> {
    pub satisfied: bool,
    pub ratio: T,
    pub bound: T,
}

pub fn reynolds_threshold<T: Scalar>(gamma: T, nu: T, c_star: T) -> Result<ReynoldsCheck<T>> {
    require_positive("circulation", gamma)?;
    require_positive("nu", nu)?;
    require_positive("c_star", c_star)?;
    let ratio = gamma / nu;
    let bound = T::of(4.0) * T::PI() / (c_star * c_star);
    Ok(ReynoldsCheck { satisfied: ratio <= bound, ratio, bound })
}

/// Time-independent ratio `δ(t)/ρ(t) = c_*·(Γ/4πν)^{1/2}` of the two scale
/// formulas (both are homogeneous of degree −½ in `‖ω‖∞`).
pub fn scale_ratio<T: Scalar>(gamma: T, nu: T, c_star: T) -> Result<T> {
    require_positive("circulation", gamma)?;
    require_positive("nu", nu)?;
    require_positive("c_star", c_star)?;
    Ok(c_star * (gamma / (T::of(4.0) * T::PI() * nu)).sqrt())
}

/// Formula-layer criticality: with the model scales substituted,
/// `δ(t) ≤ ρ(t)` for all times reduces to the Reynolds threshold, so this
/// delegates to [`reynolds_threshold`] exactly.
pub fn model_criticality<T: Scalar>(gamma: T, nu: T, c_star: T) -> Result<bool> {
    Ok(reynolds_threshold(gamma, nu, c_star)?.satisfied)
}

/// Model-predicted scale of sparseness `c₄·(φ_k(·)/‖ω‖∞)^{1/2}`, with the
/// weight evaluated at `‖ω‖∞` or its reciprocal per the convention (equal
/// for log-composite weights).
pub fn predicted_sparseness_scale<T: Scalar>(
    omega_linf: T,
    weight: &WeightSpec<T>,
    convention: PhiArgument,
    c4: T,
) -> Result<T> {
    require_positive("omega_linf", omega_linf)?;
    require_positive("c4", c4)?;
    let arg = match convention {
        PhiArgument::Reciprocal => T::one() / omega_linf,
        PhiArgument::Direct => omega_linf,
    };
    let phi = weight.eval_raw(arg)?;
    Ok(c4 * (phi / omega_linf).sqrt())
}

/// Escape times of a discrete `‖ω‖∞` series: indices `j` with
/// `linf_s > linf_j` for every later sample `s`; the final index is
/// excluded (no future samples).
pub fn detect_escape_times<T: Scalar>(linf: &[T]) -> Vec<usize> {
    if linf.len() < 2 {
        return Vec::new();
    }
    let mut escapes = Vec::new();
    let mut suffix_min = T::infinity();
    let mut flags = vec![false; linf.len()];
    for j in (0..linf.len() - 1).rev() {
        let future_min = suffix_min.min(linf[j + 1]);
        flags[j] = linf[j] < future_min;
        suffix_min = future_min;
    }
    for (j, &f) in flags.iter().enumerate() {
        if f {
            escapes.push(j);
        }
    }
    escapes
}

/// Magnitude `exp^{exp_height}(residual)`: a tetration value kept as the
/// number of exponentials that no longer fit in the float range plus the
/// largest residual that does. `exp_height = 0` means the value itself is
/// representable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TowerMagnitude {
    pub exp_height: u32,
    pub residual: f64,
}

impl TowerMagnitude {
    pub fn value(&self) -> Option<f64> {
        (self.exp_height == 0).then_some(self.residual)
    }

    /// Number of natural logs needed to bring the magnitude to or below
    /// `threshold` (≥ 1).
    pub fn iterated_log_height(&self, threshold: f64) -> u32 {
        let mut count = self.exp_height;
        let mut v = self.residual;
        while v > threshold {
            v = v.ln();
            count += 1;
        }
        count
    }
}

/// The crossover magnitude `e↑↑k` with `base_re` on top: the vorticity
/// level at which a height-`k` log-composite mechanism would enter the
/// sub-critical regime. Never overflows; exact when the tower fits.
pub fn tetration_crossover(k: u32, base_re: f64) -> Result<TowerMagnitude> {
    if k < 1 {
        return Err(Error::InvalidParameter("tower height must be ≥ 1".into()));
    }
    if !(base_re > 0.0) || !base_re.is_finite() {
        return Err(Error::InvalidParameter("Reynolds number must be positive".into()));
    }
    let max_exp_arg = f64::MAX.ln(); // ≈ 709.78
    let mut v = base_re;
    let mut pending = k;
    while pending > 0 && v <= max_exp_arg {
        v = v.exp();
        pending -= 1;
    }
    Ok(TowerMagnitude { exp_height: pending, residual: v })
}

/// Inputs controlling the verdict assembly.
#[derive(Debug, Clone)]
pub struct VerdictParams<T: Scalar> {
    pub constants: FrameworkConstants<T>,
    /// Log-composite order for the predicted scale (the weight below).
    pub k: u32,
    pub weight: WeightSpec<T>,
    pub phi_argument: PhiArgument,
    /// Direction-field bmo summary per escape snapshot, when configured.
    pub bmo: Option<BmoParams<T>>,
}

#[derive(Debug, Clone)]
pub struct BmoParams<T: Scalar> {
    pub floor_fraction: T,
    pub scales: Vec<T>,
    pub stride: usize,
    pub centers: CentersMode,
}

impl<T: Scalar> VerdictParams<T> {
    pub fn new(constants: FrameworkConstants<T>, k: u32, phi_argument: PhiArgument) -> Result<Self> {
        constants.validate()?;
        Ok(Self {
            constants,
            k,
            weight: if k == 0 {
                WeightSpec::constant()
            } else {
                WeightSpec::log_composite(k)?
            },
            phi_argument,
            bmo: None,
        })
    }

    pub fn with_bmo(mut self, bmo: BmoParams<T>) -> Self {
        self.bmo = Some(bmo);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Subcritical,
    Critical,
    Supercritical,
    Inconclusive,
}

/// Per-snapshot record of the criticality comparison.
#[derive(Debug, Clone, Serialize)]
pub struct CriticalityRow<T: Scalar> {
    pub time: T,
    pub omega_linf: T,
    pub omega_l1: T,
    pub escape: bool,
    /// Measured 3D scale of sparseness (pointwise maximal component);
    /// `None` on non-escape rows, `NaN`-free sentinel `not_sparse` when no
    /// scanned scale was sparse.
    pub r_s_measured: Option<T>,
    pub not_sparse_at_any_scale: bool,
    pub rho_s: T,
    pub r_s_predicted: T,
    pub r_s_predicted_alt: T,
    pub bmo_sup: Option<T>,
    pub bmo_total: Option<T>,
    /// `|V_t|·‖ω‖∞` and its log-compensated variant.
    pub compensated_l1: T,
    pub compensated_log: T,
}

/// The assembled verdict: parameters echoed, all series, and the regime
/// classification over the escape-time window.
#[derive(Debug, Clone, Serialize)]
pub struct CriticalityTimeline<T: Scalar> {
    pub lambda: T,
    pub delta: T,
    pub k: u32,
    pub constants: FrameworkConstants<T>,
    pub phi_argument: PhiArgument,
    pub rows: Vec<CriticalityRow<T>>,
    pub verdict: Verdict,
    pub reason: String,
}

/// Classify a run: per escape-time snapshot, measure the 3D scale of
/// sparseness of the super-level sets at `λ = 1/(2M)`, `δ = 3/4`, compare
/// with `ρ_s`, and report sub/criticality over the whole window.
pub fn criticality_verdict<T: Scalar>(
    timeline: &Timeline<T>,
    params: &VerdictParams<T>,
) -> Result<CriticalityTimeline<T>> {
    params.constants.validate()?;
    let MSolution { lambda, .. } = solve_m::<T>();
    let delta = T::of(0.75);
    let nu = timeline.viscosity;

    let linf_series: Vec<T> = timeline
        .snapshots()
        .iter()
        .map(|s| s.diagnostics.omega_linf)
        .collect();
    let escape_flags = {
        let idx = detect_escape_times(&linf_series);
        let mut flags = vec![false; linf_series.len()];
        for j in idx {
            flags[j] = true;
        }
        flags
    };

    let missing: Vec<usize> = timeline
        .snapshots()
        .iter()
        .zip(escape_flags.iter())
        .filter(|(s, &e)| e && s.field.is_none())
        .map(|(s, _)| s.index)
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingData(format!(
            "escape-time snapshots without stored fields: {missing:?}"
        )));
    }

    let mut rows = Vec::with_capacity(timeline.snapshots().len());
    for (snap, &escape) in timeline.snapshots().iter().zip(escape_flags.iter()) {
        let linf = snap.diagnostics.omega_linf;
        let mut row = CriticalityRow {
            time: snap.time,
            omega_linf: linf,
            omega_l1: snap.diagnostics.omega_l1,
            escape,
            r_s_measured: None,
            not_sparse_at_any_scale: false,
            rho_s: T::zero(),
            r_s_predicted: T::zero(),
            r_s_predicted_alt: T::zero(),
            bmo_sup: None,
            bmo_total: None,
            compensated_l1: T::zero(),
            compensated_log: T::zero(),
        };
        if linf > T::zero() && nu > T::zero() {
            row.rho_s = analyticity_radius(linf, nu, params.constants.c3)?;
        }
        if linf > T::zero() {
            row.r_s_predicted = predicted_sparseness_scale(
                linf,
                &params.weight,
                params.phi_argument,
                params.constants.c4,
            )?;
            let alt = match params.phi_argument {
                PhiArgument::Reciprocal => PhiArgument::Direct,
                PhiArgument::Direct => PhiArgument::Reciprocal,
            };
            row.r_s_predicted_alt =
                predicted_sparseness_scale(linf, &params.weight, alt, params.constants.c4)?;
        }

        if escape {
            let field = snap.field.as_ref().expect("checked above").load()?;
            let masks = superlevel_mask(&field, lambda)?;
            if !masks.degenerate_zero_field && !masks.union.is_empty() {
                let scan = sparseness_scale_pointwise(&masks, delta)?;
                row.r_s_measured = scan.scale;
                row.not_sparse_at_any_scale = scan.scale.is_none();
                let volume = masks.union.volume();
                row.compensated_l1 = volume * linf;
                let arg = match params.phi_argument {
                    PhiArgument::Reciprocal => T::one() / linf,
                    PhiArgument::Direct => linf,
                };
                row.compensated_log = volume * linf / params.weight.eval_raw(arg)?;
            }
            if let Some(bmo) = &params.bmo {
                let df = direction_field(&field, bmo.floor_fraction)?;
                if !df.degenerate_zero_field {
                    let of = OscillationField::direction(&df);
                    let report: BmoReport<T> =
                        bmo_phi_norm(&of, &params.weight, &bmo.scales, bmo.stride, bmo.centers)?;
                    row.bmo_sup = Some(report.sup_part);
                    row.bmo_total = Some(report.total);
                }
            }
        }
        rows.push(row);
    }

    let escape_rows: Vec<&CriticalityRow<T>> = rows.iter().filter(|r| r.escape).collect();
    let (verdict, reason) = if escape_rows.is_empty() {
        (Verdict::Inconclusive, "no escape times in the run window".to_string())
    } else {
        let all_below = escape_rows.iter().all(|r| match r.r_s_measured {
            Some(rs) => rs <= r.rho_s,
            None => false,
        });
        let within_factor_two = escape_rows.iter().all(|r| match r.r_s_measured {
            Some(rs) => {
                r.rho_s > T::zero()
                    && rs / r.rho_s <= T::of(2.0)
                    && rs / r.rho_s >= T::of(0.5)
            }
            None => false,
        });
        if all_below {
            (
                Verdict::Subcritical,
                "measured r_s ≤ ρ_s at every escape time".to_string(),
            )
        } else if within_factor_two {
            (
                Verdict::Critical,
                "measured r_s within a factor 2 of ρ_s throughout".to_string(),
            )
        } else {
            (
                Verdict::Supercritical,
                "measured r_s exceeds ρ_s beyond a factor 2 at some escape time".to_string(),
            )
        }
    };

    Ok(CriticalityTimeline {
        lambda,
        delta,
        k: params.k,
        constants: params.constants,
        phi_argument: params.phi_argument,
        rows,
        verdict,
        reason,
    })
}
