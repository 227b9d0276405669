//! Local mean oscillations of scalar and direction fields, weighted
//! `bmo_φ`-type norms, and the log-composite weight family.
//!
//! The mean oscillation over the cube `I(x, r)` (side length `r`, centered
//! at `x`) is `Ω(f, I) = |I|⁻¹ ∫_I |f − f_I|`. Cube means come from
//! summed-area tables built once per field; the absolute-deviation pass
//! walks each cube (`O(n³·m³)` per scale for side `m` cells — the table
//! only accelerates the means). A weight `φ` is positive and non-decreasing
//! on `(0, r_max)`; `bmo_φ` controls `Ω/φ(r)` uniformly over centers and
//! scales.
//!
//! The log-composite family `φ_k(r) = 1/log^k(offset + |log r|)` uses the
//! offset `e↑↑k − log 2` by default so that `φ_k` is positive and ≤ 1 on
//! all of `(0, ½)`; with offset 0 the positivity domain shrinks to
//! `r < exp(−e↑↑(k−1))`. Towers of height ≥ 4 overflow every IEEE format,
//! in which case the weight (and the Orlicz integrand below) is
//! indistinguishable from the constant 1 and is evaluated as exactly 1.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField3D, VectorField3D};
use crate::sat::Sat3;
use crate::scalar::Scalar;

/// Which argument the volume-decay / scale formulas hand to `φ_k`: the
/// paper-style direct `‖ω‖∞` or its reciprocal (the associated small
/// scale). For the log-composite family the two coincide, since
/// `|log s| = |log 1/s|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PhiArgument {
    Reciprocal,
    Direct,
}

/// `e↑↑k` (tower of e's of height k); saturates to infinity at k ≥ 4 in
/// either float width.
pub fn e_tower<T: Scalar>(k: u32) -> T {
    let mut v = T::one();
    for _ in 0..k {
        v = v.exp();
        if v.is_infinite() {
            return v;
        }
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum WeightKind<T: Scalar> {
    /// `φ(r) = r^α`, `0 < α ≤ 1` (the Hölder scale).
    Power { alpha: T },
    /// `φ_k(r) = 1/log^k(offset + |log r|)`, `k ≥ 1`.
    LogComposite { k: u32 },
    /// `φ(r) = 1/(offset + |log r|)` (the inner weight of the family).
    InverseLog,
    /// `φ ≡ 1` (plain bmo).
    Constant,
}

/// A scale weight with its regularization offset and largest admissible
/// scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightSpec<T: Scalar> {
    pub kind: WeightKind<T>,
    pub offset: T,
    pub r_max: T,
}

impl<T: Scalar> WeightSpec<T> {
    pub fn power(alpha: T) -> Result<Self> {
        if !(alpha > T::zero() && alpha <= T::one()) {
            return Err(Error::InvalidParameter(format!(
                "power weight needs 0 < α ≤ 1, got {}",
                alpha.to_f64_lossy()
            )));
        }
        Ok(Self { kind: WeightKind::Power { alpha }, offset: T::zero(), r_max: T::of(0.5) })
    }

    pub fn constant() -> Self {
        Self { kind: WeightKind::Constant, offset: T::zero(), r_max: T::of(0.5) }
    }

    pub fn inverse_log() -> Self {
        Self { kind: WeightKind::InverseLog, offset: T::zero(), r_max: T::of(0.5) }
    }

    /// Log-composite weight with the default positivity offset
    /// `e↑↑k − log 2`.
    pub fn log_composite(k: u32) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidParameter("log-composite order must be ≥ 1".into()));
        }
        let offset = e_tower::<T>(k) - T::LN_2();
        Ok(Self { kind: WeightKind::LogComposite { k }, offset, r_max: T::of(0.5) })
    }

    /// Strict variant with offset 0 and the positivity domain restricted
    /// accordingly.
    pub fn log_composite_strict(k: u32) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidParameter("log-composite order must be ≥ 1".into()));
        }
        let mut w = Self {
            kind: WeightKind::LogComposite { k },
            offset: T::zero(),
            r_max: T::of(0.5),
        };
        w.r_max = w.domain_sup().min(T::of(0.5));
        Ok(w)
    }

    pub fn with_offset(mut self, offset: T) -> Self {
        self.offset = offset;
        self
    }

    /// Supremum of the positivity domain in `(0, 1)`.
    pub fn domain_sup(&self) -> T {
        match self.kind {
            WeightKind::Power { .. } | WeightKind::Constant => self.r_max,
            WeightKind::InverseLog => {
                if self.offset >= T::zero() {
                    self.r_max
                } else {
                    (self.offset).exp().min(self.r_max)
                }
            }
            WeightKind::LogComposite { k } => {
                let need = e_tower::<T>(k - 1);
                if self.offset >= need {
                    self.r_max
                } else {
                    (self.offset - need).exp().min(self.r_max)
                }
            }
        }
    }

    /// Evaluate the weight formula at any positive argument (no `r_max`
    /// restriction); errors when a nested log leaves the positive domain.
    pub fn eval_raw(&self, s: T) -> Result<T> {
        if !(s > T::zero()) || !s.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "weight argument must be positive and finite, got {}",
                s.to_f64_lossy()
            )));
        }
        match self.kind {
            WeightKind::Constant => Ok(T::one()),
            WeightKind::Power { alpha } => Ok(s.powf(alpha)),
            WeightKind::InverseLog => {
                let v = self.offset + s.ln().abs();
                if v <= T::zero() {
                    return Err(Error::InvalidParameter(
                        "argument outside the positivity domain of 1/|log r|".into(),
                    ));
                }
                Ok(T::one() / v)
            }
            WeightKind::LogComposite { k } => {
                if self.offset.is_infinite() {
                    // e↑↑k overflowed: the weight differs from 1 by less
                    // than any representable amount.
                    return Ok(T::one());
                }
                let mut v = self.offset + s.ln().abs();
                for _ in 0..k {
                    if v <= T::zero() {
                        return Err(Error::InvalidParameter(format!(
                            "argument outside the positivity domain (sup r = {})",
                            self.domain_sup().to_f64_lossy()
                        )));
                    }
                    v = v.ln();
                }
                if v <= T::zero() {
                    return Err(Error::InvalidParameter(format!(
                        "argument outside the positivity domain (sup r = {})",
                        self.domain_sup().to_f64_lossy()
                    )));
                }
                Ok(T::one() / v)
            }
        }
    }

    /// Evaluate at a scale `r ∈ (0, r_max]`.
    pub fn phi_eval(&self, r: T) -> Result<T> {
        if !(r > T::zero() && r <= self.r_max) {
            return Err(Error::InvalidParameter(format!(
                "scale {} outside the weight domain (0, {}]",
                r.to_f64_lossy(),
                self.r_max.to_f64_lossy()
            )));
        }
        self.eval_raw(r)
    }
}

/// Unit vorticity-direction field with a validity floor.
#[derive(Debug, Clone)]
pub struct DirectionField<T: Scalar> {
    pub grid: GridSpec<T>,
    /// Unit vectors where valid, zero elsewhere.
    pub xi: [Vec<T>; 3],
    pub valid: Vec<bool>,
    /// True when the input field was identically zero.
    pub degenerate_zero_field: bool,
}

/// `ξ = ω/|ω|` (Euclidean) wherever `|ω| ≥ ε·max|ω|`.
pub fn direction_field<T: Scalar>(
    omega: &VectorField3D<T>,
    floor_fraction: T,
) -> Result<DirectionField<T>> {
    if !(floor_fraction > T::zero() && floor_fraction < T::one()) {
        return Err(Error::InvalidParameter(format!(
            "floor fraction must lie in (0, 1), got {}",
            floor_fraction.to_f64_lossy()
        )));
    }
    crate::spectral::ensure_finite(omega, "vorticity")?;
    let grid = *omega.grid();
    let cells = grid.cells();
    let mut max_mag = T::zero();
    for idx in 0..cells {
        let m = omega.euclid_at(idx);
        if m > max_mag {
            max_mag = m;
        }
    }
    let mut xi = [vec![T::zero(); cells], vec![T::zero(); cells], vec![T::zero(); cells]];
    let mut valid = vec![false; cells];
    let degenerate = max_mag == T::zero();
    if !degenerate {
        let floor = floor_fraction * max_mag;
        for idx in 0..cells {
            let m = omega.euclid_at(idx);
            if m >= floor {
                let v = omega.at(idx);
                xi[0][idx] = v[0] / m;
                xi[1][idx] = v[1] / m;
                xi[2][idx] = v[2] / m;
                valid[idx] = true;
            }
        }
    }
    Ok(DirectionField { grid, xi, valid, degenerate_zero_field: degenerate })
}

/// A field prepared for oscillation sweeps: data plus its summed-area
/// tables, built once and shared read-only across scales and centers.
pub enum OscillationField<T: Scalar> {
    Scalar {
        grid: GridSpec<T>,
        data: Vec<T>,
        sat: Sat3<T>,
    },
    Direction {
        grid: GridSpec<T>,
        xi: [Vec<T>; 3],
        valid: Vec<bool>,
        sats: [Sat3<T>; 3],
        valid_sat: Sat3<T>,
    },
}

impl<T: Scalar> OscillationField<T> {
    pub fn scalar(field: &ScalarField3D<T>) -> Self {
        let sat = Sat3::build(field.grid.n(), &field.data);
        OscillationField::Scalar { grid: field.grid, data: field.data.clone(), sat }
    }

    pub fn direction(df: &DirectionField<T>) -> Self {
        let n = df.grid.n();
        let sats = [
            Sat3::build(n, &df.xi[0]),
            Sat3::build(n, &df.xi[1]),
            Sat3::build(n, &df.xi[2]),
        ];
        let valid_real: Vec<T> = df
            .valid
            .iter()
            .map(|&b| if b { T::one() } else { T::zero() })
            .collect();
        let valid_sat = Sat3::build(n, &valid_real);
        OscillationField::Direction {
            grid: df.grid,
            xi: df.xi.clone(),
            valid: df.valid.clone(),
            sats,
            valid_sat,
        }
    }

    pub fn grid(&self) -> &GridSpec<T> {
        match self {
            OscillationField::Scalar { grid, .. } => grid,
            OscillationField::Direction { grid, .. } => grid,
        }
    }

    /// `‖f‖₁` over the box (for a direction field, the valid volume).
    pub fn l1(&self) -> T {
        match self {
            OscillationField::Scalar { grid, data, .. } => {
                data.iter().map(|v| v.abs()).sum::<T>() * grid.cell_volume()
            }
            OscillationField::Direction { grid, valid, .. } => {
                T::of(valid.iter().filter(|&&b| b).count() as f64) * grid.cell_volume()
            }
        }
    }

    pub fn valid_mask(&self) -> Option<&[bool]> {
        match self {
            OscillationField::Scalar { .. } => None,
            OscillationField::Direction { valid, .. } => Some(valid),
        }
    }
}

/// Cube side in cells for scale `r`; errors below 2 cells.
fn cube_cells<T: Scalar>(grid: &GridSpec<T>, r: T) -> Result<usize> {
    let m = (r / grid.spacing()).to_f64_lossy().round() as isize;
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "scale {} is below 2 grid cells (spacing {})",
            r.to_f64_lossy(),
            grid.spacing().to_f64_lossy()
        )));
    }
    Ok(m as usize)
}

/// Minimum fraction of valid cells a cube needs before the oscillation of
/// a direction field is reported for it.
const VALID_CUBE_FRACTION: f64 = 0.9;

/// Mean oscillation over the cube of `m` cells anchored at `center`.
/// Returns `Ok(None)` when a direction cube has fewer than 90% valid cells
/// (skipped and counted by the caller).
fn oscillation_at<T: Scalar>(
    field: &OscillationField<T>,
    center: (usize, usize, usize),
    m: usize,
) -> Option<T> {
    let grid = *field.grid();
    let n = grid.n() as i64;
    let half = (m / 2) as i64;
    let start = [
        center.0 as i64 - half,
        center.1 as i64 - half,
        center.2 as i64 - half,
    ];
    let sides = [m, m, m];
    let cube_count = (m * m * m) as f64;

    match field {
        OscillationField::Scalar { data, sat, .. } => {
            let mean = sat.periodic_box_sum([start[0] as isize, start[1] as isize, start[2] as isize], sides)
                / T::of(cube_count);
            let mut dev = T::zero();
            for dz in 0..m as i64 {
                let z = (start[2] + dz).rem_euclid(n) as usize;
                for dy in 0..m as i64 {
                    let y = (start[1] + dy).rem_euclid(n) as usize;
                    let row = grid.index(0, y, z);
                    for dx in 0..m as i64 {
                        let x = (start[0] + dx).rem_euclid(n) as usize;
                        dev += (data[row + x] - mean).abs();
                    }
                }
            }
            Some(dev / T::of(cube_count))
        }
        OscillationField::Direction { xi, valid, sats, valid_sat, .. } => {
            let anchor = [start[0] as isize, start[1] as isize, start[2] as isize];
            let valid_count = valid_sat.periodic_box_sum(anchor, sides).to_f64_lossy();
            if valid_count < VALID_CUBE_FRACTION * cube_count {
                return None;
            }
            let inv = T::one() / T::of(valid_count);
            let mean = [
                sats[0].periodic_box_sum(anchor, sides) * inv,
                sats[1].periodic_box_sum(anchor, sides) * inv,
                sats[2].periodic_box_sum(anchor, sides) * inv,
            ];
            let mut dev = T::zero();
            for dz in 0..m as i64 {
                let z = (start[2] + dz).rem_euclid(n) as usize;
                for dy in 0..m as i64 {
                    let y = (start[1] + dy).rem_euclid(n) as usize;
                    let row = grid.index(0, y, z);
                    for dx in 0..m as i64 {
                        let x = (start[0] + dx).rem_euclid(n) as usize;
                        let idx = row + x;
                        if valid[idx] {
                            let d0 = xi[0][idx] - mean[0];
                            let d1 = xi[1][idx] - mean[1];
                            let d2 = xi[2][idx] - mean[2];
                            dev += (d0 * d0 + d1 * d1 + d2 * d2).sqrt();
                        }
                    }
                }
            }
            Some(dev * inv)
        }
    }
}

/// Mean oscillation `Ω(f, I(x, r))` at one center. `Ok(None)` marks a cube
/// skipped for lack of valid cells.
pub fn mean_oscillation<T: Scalar>(
    field: &OscillationField<T>,
    center: (usize, usize, usize),
    r: T,
) -> Result<Option<T>> {
    let m = cube_cells(field.grid(), r)?;
    Ok(oscillation_at(field, center, m))
}

/// Which centers the sup ranges over for direction fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CentersMode {
    All,
    /// Only centers inside the valid (intense-vorticity) region.
    ValidOnly,
}

#[derive(Debug, Clone, Serialize)]
pub struct PerScaleRow<T: Scalar> {
    pub r: T,
    pub max_oscillation: T,
    pub phi: T,
    pub ratio: T,
    pub evaluated_cubes: usize,
    pub skipped_cubes: usize,
}

/// Weighted bmo report: `total = l1_part + sup_part` with the sup taken
/// over all evaluated centers and scales.
#[derive(Debug, Clone, Serialize)]
pub struct BmoReport<T: Scalar> {
    pub l1_part: T,
    pub sup_part: T,
    pub total: T,
    /// Physical center and scale attaining the sup, when any cube was
    /// evaluated.
    pub argmax_cube: Option<([T; 3], T)>,
    pub per_scale: Vec<PerScaleRow<T>>,
}

/// Sweep `Ω/φ` over cubes: every admissible scale in `scales`, centers on
/// the given stride. Scales above `weight.r_max` are rejected; scales
/// below two cells are skipped (a domain error if none survive).
pub fn bmo_phi_norm<T: Scalar>(
    field: &OscillationField<T>,
    weight: &WeightSpec<T>,
    scales: &[T],
    stride: usize,
    centers: CentersMode,
) -> Result<BmoReport<T>> {
    if stride == 0 {
        return Err(Error::InvalidParameter("stride must be ≥ 1".into()));
    }
    let grid = *field.grid();
    for &r in scales {
        if !(r > T::zero() && r <= weight.r_max) {
            return Err(Error::InvalidParameter(format!(
                "scale {} outside the weight domain (0, {}]",
                r.to_f64_lossy(),
                weight.r_max.to_f64_lossy()
            )));
        }
    }
    let admissible: Vec<(T, usize)> = scales
        .iter()
        .filter_map(|&r| cube_cells(&grid, r).ok().map(|m| (r, m)))
        .collect();
    if admissible.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no admissible scale at this resolution within r_max = {} (need ≥ 2 cells of {})",
            weight.r_max.to_f64_lossy(),
            grid.spacing().to_f64_lossy()
        )));
    }

    let n = grid.n();
    let mut centers_list: Vec<(usize, usize, usize)> = Vec::new();
    let valid = field.valid_mask();
    for z in (0..n).step_by(stride) {
        for y in (0..n).step_by(stride) {
            for x in (0..n).step_by(stride) {
                if centers == CentersMode::ValidOnly {
                    if let Some(v) = valid {
                        if !v[grid.index(x, y, z)] {
                            continue;
                        }
                    }
                }
                centers_list.push((x, y, z));
            }
        }
    }

    let mut per_scale = Vec::with_capacity(admissible.len());
    let mut sup = T::zero();
    let mut argmax: Option<([T; 3], T)> = None;
    for &(r, m) in &admissible {
        let phi = weight.phi_eval(r)?;
        let evaluated: Vec<(usize, T)> = centers_list
            .par_iter()
            .enumerate()
            .filter_map(|(ci, &c)| oscillation_at(field, c, m).map(|o| (ci, o)))
            .collect();
        let skipped = centers_list.len() - evaluated.len();
        let best = evaluated
            .iter()
            .max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite oscillation"));
        let max_osc = best.map(|&(_, o)| o).unwrap_or(T::zero());
        let ratio = max_osc / phi;
        if let Some(&(ci, _)) = best {
            if ratio > sup {
                sup = ratio;
                let (x, y, z) = centers_list[ci];
                argmax = Some((grid.position(x, y, z), r));
            }
        }
        per_scale.push(PerScaleRow {
            r,
            max_oscillation: max_osc,
            phi,
            ratio,
            evaluated_cubes: evaluated.len(),
            skipped_cubes: skipped,
        });
    }

    let l1_part = field.l1();
    Ok(BmoReport { l1_part, sup_part: sup, total: l1_part + sup, argmax_cube: argmax, per_scale })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NumericClassification {
    Convergent,
    Divergent,
    Ambiguous,
}

/// Outcome of the discontinuity criterion `∫₀^½ φ(r)/r dr = ∞`.
#[derive(Debug, Clone, Serialize)]
pub struct DiscontinuityReport {
    /// The criterion's answer (from the closed-form antiderivative class).
    pub admits_discontinuous: bool,
    pub numeric: NumericClassification,
    /// Numeric fit agrees with the symbolic classification.
    pub consistent: bool,
    /// `(r₀, ∫_{r₀} φ/r dr)` samples for decreasing cutoffs.
    pub integral_samples: Vec<(f64, f64)>,
}

/// Classify whether `bmo_φ` admits discontinuous functions: symbolically by
/// weight class (powers integrate, constants and inverse/iterated logs do
/// not), numerically by the growth of the truncated integral in `|log r₀|`.
pub fn discontinuity_criterion<T: Scalar>(weight: &WeightSpec<T>) -> Result<DiscontinuityReport> {
    let symbolic_divergent = match weight.kind {
        WeightKind::Power { .. } => false,
        WeightKind::Constant | WeightKind::InverseLog | WeightKind::LogComposite { .. } => true,
    };

    // ∫ φ(r)/r dr = ∫ φ(e^w) dw on w = log r; trapezoid per cutoff segment.
    let upper = weight.domain_sup().to_f64_lossy().min(0.5) * (1.0 - 1e-12);
    let cutoffs: Vec<f64> = (1..=8).map(|i| 10f64.powi(-2 * i)).collect();
    let segment = |w_lo: f64, w_hi: f64| -> Result<f64> {
        const POINTS: usize = 2048;
        let dw = (w_hi - w_lo) / (POINTS - 1) as f64;
        let mut sum = 0.0;
        for i in 0..POINTS {
            let w = w_lo + dw * i as f64;
            let phi = weight.eval_raw(T::of(w.exp()))?.to_f64_lossy();
            let trap = if i == 0 || i == POINTS - 1 { 0.5 } else { 1.0 };
            sum += trap * phi;
        }
        Ok(sum * dw)
    };

    let mut samples = Vec::with_capacity(cutoffs.len());
    let mut total = 0.0;
    let mut prev_w = upper.ln();
    for &r0 in &cutoffs {
        let w = r0.ln();
        total += segment(w, prev_w)?;
        samples.push((r0, total));
        prev_w = w;
    }

    let increments: Vec<f64> = samples
        .windows(2)
        .map(|p| p[1].1 - p[0].1)
        .collect();
    let ratios: Vec<f64> = increments
        .windows(2)
        .filter(|p| p[0] > 0.0)
        .map(|p| p[1] / p[0])
        .collect();
    let numeric = if increments.last().copied().unwrap_or(0.0) < 1e-10 * (total.abs() + 1.0) {
        NumericClassification::Convergent
    } else if ratios.is_empty() {
        NumericClassification::Ambiguous
    } else {
        let last = *ratios.last().unwrap();
        let first = ratios[0];
        if last >= 0.95 || last > first + 1e-6 {
            NumericClassification::Divergent
        } else {
            NumericClassification::Convergent
        }
    };
    let consistent = match numeric {
        NumericClassification::Convergent => !symbolic_divergent,
        NumericClassification::Divergent => symbolic_divergent,
        NumericClassification::Ambiguous => false,
    };
    Ok(DiscontinuityReport {
        admits_discontinuous: symbolic_divergent,
        numeric,
        consistent,
        integral_samples: samples,
    })
}

/// Orlicz-type modular `∫ |ω|·g_k(|ω|) dV` with the Young-type integrand
/// `g_k(s) = log^k(E_k + s)`, `E_k = e↑↑k` the smallest tower keeping every
/// nested log ≥ 1 (so `g_k ≥ 1` and the modular dominates `‖ω‖₁`). This is
/// the modular, not the Luxemburg norm. `k = 1` is an `L log L`-type
/// quantity; pointwise magnitudes are Euclidean, consistent with `‖ω‖₁`.
pub fn orlicz_modular<T: Scalar>(omega: &VectorField3D<T>, k: u32) -> Result<T> {
    if k < 1 {
        return Err(Error::InvalidParameter("orlicz order must be ≥ 1".into()));
    }
    crate::spectral::ensure_finite(omega, "vorticity")?;
    let e_k = e_tower::<T>(k);
    let g = |s: T| -> T {
        if e_k.is_infinite() {
            return T::one();
        }
        let mut v = e_k + s;
        for _ in 0..k {
            v = v.ln();
        }
        v
    };
    let grid = omega.grid();
    let mut sum = T::zero();
    for idx in 0..grid.cells() {
        let m = omega.euclid_at(idx);
        sum += m * g(m);
    }
    Ok(sum * grid.cell_volume())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::VectorField3D;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn unit_grid(n: usize) -> GridSpec<f64> {
        GridSpec::new(n, 1.0).unwrap()
    }

    /// sgn(x₁ − L/2) on the cell centers.
    fn sgn_field(g: GridSpec<f64>) -> ScalarField3D<f64> {
        let n = g.n();
        let data = (0..g.cells())
            .map(|i| if g.coords(i).0 >= n / 2 { 1.0 } else { -1.0 })
            .collect();
        ScalarField3D::new(g, data).unwrap()
    }

    #[test]
    fn phi_power_quarter() {
        let w = WeightSpec::power(1.0f64).unwrap();
        assert_eq!(w.phi_eval(0.25).unwrap(), 0.25);
    }

    #[test]
    fn phi_log_composite_unit_values() {
        // offset 0, r = e^{−e}: |log r| = e, log(e) = 1 → φ = 1.
        let w1 = WeightSpec::<f64>::log_composite_strict(1).unwrap();
        let r = (-std::f64::consts::E).exp();
        assert!((w1.eval_raw(r).unwrap() - 1.0).abs() < 1e-12);
        // k = 2, r = e^{−e^e}: log log(e^e) = 1 → φ = 1.
        let w2 = WeightSpec::<f64>::log_composite_strict(2).unwrap();
        let r2 = (-std::f64::consts::E.exp()).exp();
        assert!((w2.eval_raw(r2).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phi_domain_errors() {
        let w = WeightSpec::<f64>::log_composite(1).unwrap();
        assert!(w.phi_eval(0.6).is_err());
        assert!(w.phi_eval(0.0).is_err());
        // Strict mode: r above exp(−1) leaves the domain for k = 1.
        let ws = WeightSpec::<f64>::log_composite_strict(1).unwrap();
        assert!((ws.r_max - (-1.0f64).exp()).abs() < 1e-12);
        assert!(ws.eval_raw(0.4).is_err());
    }

    #[test]
    fn phi_default_offset_spans_half_and_is_monotone() {
        for k in 1..=3u32 {
            let w = WeightSpec::<f64>::log_composite(k).unwrap();
            let mut prev = 0.0;
            for i in 1..=400 {
                let r = 0.5 * i as f64 / 400.0;
                let phi = w.phi_eval(r).unwrap();
                assert!(phi > 0.0 && phi <= 1.0 + 1e-12, "φ_{k}({r}) = {phi}");
                assert!(phi >= prev - 1e-13, "φ_{k} not non-decreasing at {r}");
                prev = phi;
            }
        }
    }

    #[test]
    fn phi_tower_saturation_beyond_f64() {
        let w = WeightSpec::<f64>::log_composite(5).unwrap();
        assert_eq!(w.phi_eval(0.1).unwrap(), 1.0);
    }

    #[test]
    fn direction_field_basics() {
        let g = unit_grid(8);
        let mut field = VectorField3D::zeros(g);
        field.components_mut()[0].iter_mut().for_each(|v| *v = 3.0);
        let df = direction_field(&field, 1e-3).unwrap();
        assert!(df.valid.iter().all(|&b| b));
        assert!(df.xi[0].iter().all(|&v| (v - 1.0).abs() < 1e-15));
        // Homogeneity degree 0.
        let df2 = direction_field(&field.scaled(2.0), 1e-3).unwrap();
        assert_eq!(df.xi, df2.xi);
        assert_eq!(df.valid, df2.valid);
        // Zero field: flagged, not an error.
        let df0 = direction_field(&VectorField3D::zeros(g), 1e-3).unwrap();
        assert!(df0.degenerate_zero_field);
        assert!(df0.valid.iter().all(|&b| !b));
    }

    #[test]
    fn oscillation_of_constant_is_zero() {
        let g = unit_grid(16);
        let f = ScalarField3D::new(g, vec![2.5; g.cells()]).unwrap();
        let of = OscillationField::scalar(&f);
        let o = mean_oscillation(&of, (8, 8, 8), 0.25).unwrap().unwrap();
        assert_eq!(o, 0.0);
    }

    #[test]
    fn oscillation_of_sgn_at_centered_cube_is_one() {
        let g = unit_grid(32);
        let of = OscillationField::scalar(&sgn_field(g));
        for r in [0.5, 0.25, 0.125] {
            let o = mean_oscillation(&of, (16, 9, 23), r).unwrap().unwrap();
            let m = (r * 32.0).round();
            assert!((o - 1.0).abs() <= 2.0 / m, "Ω(sgn) = {o} at r = {r}");
        }
    }

    #[test]
    fn oscillation_of_linear_field_matches_calculus() {
        // f = x₁ over a cube of side r centered mid-box: continuum Ω = r/4.
        let g = unit_grid(64);
        let data: Vec<f64> = (0..g.cells())
            .map(|i| g.coords(i).0 as f64 * g.spacing())
            .collect();
        let of = OscillationField::scalar(&ScalarField3D::new(g, data).unwrap());
        let r = 0.25f64;
        let m = (r * 64.0).round();
        let o = mean_oscillation(&of, (32, 32, 32), r).unwrap().unwrap();
        assert!(
            (o - r / 4.0).abs() <= 2.0 / m * (r / 4.0) + 1e-12,
            "Ω(x₁) = {o}, expected ≈ {}",
            r / 4.0
        );
    }

    #[test]
    fn oscillation_too_small_scale_errors() {
        let g = unit_grid(8);
        let f = ScalarField3D::new(g, vec![0.0; g.cells()]).unwrap();
        let of = OscillationField::scalar(&f);
        assert!(mean_oscillation(&of, (4, 4, 4), 0.1).is_err());
    }

    #[test]
    fn oscillation_invariances() {
        let g = unit_grid(16);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let data: Vec<f64> = (0..g.cells()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let of = OscillationField::scalar(&ScalarField3D::new(g, data.clone()).unwrap());
        let o = mean_oscillation(&of, (8, 8, 8), 0.25).unwrap().unwrap();
        // 1-homogeneous.
        let scaled: Vec<f64> = data.iter().map(|v| -3.0 * v).collect();
        let of_s = OscillationField::scalar(&ScalarField3D::new(g, scaled).unwrap());
        let os = mean_oscillation(&of_s, (8, 8, 8), 0.25).unwrap().unwrap();
        assert!((os - 3.0 * o).abs() < 1e-12);
        // Mean-shift invariant.
        let shifted: Vec<f64> = data.iter().map(|v| v + 42.0).collect();
        let of_c = OscillationField::scalar(&ScalarField3D::new(g, shifted).unwrap());
        let oc = mean_oscillation(&of_c, (8, 8, 8), 0.25).unwrap().unwrap();
        assert!((oc - o).abs() < 1e-9);
    }

    #[test]
    fn sat_oscillation_equals_direct_loop() {
        let g = unit_grid(16);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        // Integer-valued data: SAT sums are exact, so equality is exact.
        let data: Vec<f64> = (0..g.cells()).map(|_| rng.gen_range(-3..4) as f64).collect();
        let of = OscillationField::scalar(&ScalarField3D::new(g, data.clone()).unwrap());
        let r = 0.25;
        let m = 4usize;
        for &center in &[(0usize, 0usize, 0usize), (8, 8, 8), (15, 3, 7)] {
            let got = mean_oscillation(&of, center, r).unwrap().unwrap();
            // Direct loop.
            let n = g.n() as i64;
            let half = (m / 2) as i64;
            let mut sum = 0.0;
            let mut cells = Vec::new();
            for dz in 0..m as i64 {
                for dy in 0..m as i64 {
                    for dx in 0..m as i64 {
                        let x = (center.0 as i64 - half + dx).rem_euclid(n) as usize;
                        let y = (center.1 as i64 - half + dy).rem_euclid(n) as usize;
                        let z = (center.2 as i64 - half + dz).rem_euclid(n) as usize;
                        let v = data[g.index(x, y, z)];
                        sum += v;
                        cells.push(v);
                    }
                }
            }
            let mean = sum / cells.len() as f64;
            let direct: f64 =
                cells.iter().map(|v| (v - mean).abs()).sum::<f64>() / cells.len() as f64;
            assert_eq!(got, direct, "center {center:?}");
        }
    }

    #[test]
    fn bmo_constant_field_has_zero_sup() {
        let g = unit_grid(16);
        let f = ScalarField3D::new(g, vec![1.0; g.cells()]).unwrap();
        let of = OscillationField::scalar(&f);
        let w = WeightSpec::constant();
        let rep = bmo_phi_norm(&of, &w, &[0.5, 0.25], 1, CentersMode::All).unwrap();
        assert_eq!(rep.sup_part, 0.0);
        assert!((rep.l1_part - 1.0).abs() < 1e-12);
        assert!((rep.total - rep.l1_part - rep.sup_part).abs() < 1e-15);
    }

    #[test]
    fn bmo_sgn_saturates_constant_weight_but_grows_with_log_weight() {
        let g = unit_grid(64);
        let of = OscillationField::scalar(&sgn_field(g));
        let w1 = WeightSpec::constant();
        let scales = [0.5, 0.25, 0.125, 0.0625];
        let rep = bmo_phi_norm(&of, &w1, &scales, 2, CentersMode::All).unwrap();
        assert!((rep.sup_part - 1.0).abs() < 1e-12, "sup {}", rep.sup_part);

        // Log-composite sup grows as finer scales join the set.
        let wk = WeightSpec::<f64>::log_composite(1).unwrap();
        let mut prev = 0.0;
        for upto in 1..=scales.len() {
            let rep = bmo_phi_norm(&of, &wk, &scales[..upto], 2, CentersMode::All).unwrap();
            assert!(
                rep.sup_part > prev,
                "sup did not grow: {} after {prev}",
                rep.sup_part
            );
            prev = rep.sup_part;
        }
    }

    #[test]
    fn bmo_unit_vector_sup_is_bounded_by_two() {
        let g = unit_grid(16);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut field = VectorField3D::zeros(g);
        for idx in 0..g.cells() {
            let v: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            field.set(idx, v);
        }
        let df = direction_field(&field, 1e-6).unwrap();
        let of = OscillationField::direction(&df);
        let rep = bmo_phi_norm(
            &of,
            &WeightSpec::constant(),
            &[0.5, 0.25],
            1,
            CentersMode::All,
        )
        .unwrap();
        assert!(rep.sup_part <= 2.0 + 1e-12);
    }

    #[test]
    fn bmo_rejects_empty_admissible_scales() {
        let g = unit_grid(8);
        let f = ScalarField3D::new(g, vec![0.0; g.cells()]).unwrap();
        let of = OscillationField::scalar(&f);
        let w = WeightSpec::constant();
        // 0.1 of a unit box at n = 8 is below 2 cells.
        let err = bmo_phi_norm(&of, &w, &[0.1], 1, CentersMode::All);
        assert!(err.is_err());
    }

    #[test]
    fn discontinuity_classification() {
        for alpha in [1.0f64, 0.5, 0.25] {
            let rep = discontinuity_criterion(&WeightSpec::power(alpha).unwrap()).unwrap();
            assert!(!rep.admits_discontinuous, "power({alpha})");
            assert_eq!(rep.numeric, NumericClassification::Convergent);
            assert!(rep.consistent);
        }
        let rep = discontinuity_criterion(&WeightSpec::<f64>::constant()).unwrap();
        assert!(rep.admits_discontinuous);
        assert_eq!(rep.numeric, NumericClassification::Divergent);
        assert!(rep.consistent);

        let rep = discontinuity_criterion(&WeightSpec::<f64>::inverse_log()).unwrap();
        assert!(rep.admits_discontinuous);
        assert_eq!(rep.numeric, NumericClassification::Divergent);
        assert!(rep.consistent);

        let rep = discontinuity_criterion(&WeightSpec::<f64>::log_composite(1).unwrap()).unwrap();
        assert!(rep.admits_discontinuous);
        assert_eq!(rep.numeric, NumericClassification::Divergent);
        assert!(rep.consistent);
    }

    #[test]
    fn orlicz_modular_values() {
        let g = unit_grid(8);
        assert_eq!(orlicz_modular(&VectorField3D::zeros(g), 1).unwrap(), 0.0);

        let c = 2.0;
        let mut field = VectorField3D::zeros(g);
        field.components_mut()[0].iter_mut().for_each(|v| *v = c);
        let vol = 1.0;
        let expect = c * (std::f64::consts::E + c).ln() * vol;
        let got = orlicz_modular(&field, 1).unwrap();
        assert!((got - expect).abs() < 1e-12 * expect);

        // Dominates the L¹ norm (g_k ≥ 1).
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let comps = [(); 3].map(|_| {
            (0..g.cells()).map(|_| rng.gen_range(-2.0..2.0)).collect::<Vec<f64>>()
        });
        let field = VectorField3D::from_components(g, comps).unwrap();
        let l1: f64 = (0..g.cells())
            .map(|i| field.euclid_at(i))
            .sum::<f64>()
            * g.cell_volume();
        for k in 1..=3u32 {
            assert!(orlicz_modular(&field, k).unwrap() >= l1);
        }
    }
}
