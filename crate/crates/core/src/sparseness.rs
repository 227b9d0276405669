//! Super-level sets of the vorticity and their sparseness at scale.
//!
//! A super-level set collects the cells where one signed component exceeds
//! `λ‖ω‖∞` (six masks, one per component and sign, plus their union and the
//! per-cell record of which component is locally maximal). 3D sparseness
//! around a center is the occupied fraction of a discrete ball, computed
//! for every center at once by FFT cross-correlation with the ball
//! indicator; 1D sparseness samples segments in a fixed direction set. The
//! scale of sparseness is the smallest scanned scale from which sparseness
//! holds up to `L/4`.

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, VectorField3D};
use crate::oscillation::{PhiArgument, WeightSpec};
use crate::scalar::Scalar;
use crate::solver::Timeline;
use crate::spectral::Spectral3;

/// Which super-level set a mask describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MaskTag {
    /// `ω^{axis,±} > λ‖ω‖∞` with `positive` selecting the sign.
    Component { axis: u8, positive: bool },
    /// Union over all six component masks.
    Union,
}

/// Boolean occupancy grid of one super-level set.
#[derive(Debug, Clone, Serialize)]
pub struct LevelSetMask<T: Scalar> {
    pub grid: GridSpec<T>,
    pub occupancy: Vec<bool>,
    pub lambda: T,
    pub threshold: T,
    pub tag: MaskTag,
}

impl<T: Scalar> LevelSetMask<T> {
    pub fn occupied_cells(&self) -> usize {
        self.occupancy.iter().filter(|&&b| b).count()
    }

    pub fn volume(&self) -> T {
        T::of(self.occupied_cells() as f64) * self.grid.cell_volume()
    }

    pub fn is_empty(&self) -> bool {
        self.occupancy.iter().all(|&b| !b)
    }
}

/// The six component masks, their union, and the per-cell locally maximal
/// component (the component achieving the pointwise max-norm).
#[derive(Debug, Clone)]
pub struct MaskSet<T: Scalar> {
    pub components: [LevelSetMask<T>; 6],
    pub union: LevelSetMask<T>,
    /// Index `2·axis + (0 if positive else 1)` of the locally maximal
    /// signed component at each cell.
    pub argmax_component: Vec<u8>,
    pub omega_linf: T,
    /// Set when the field is identically zero: no threshold is definable
    /// and every mask is empty.
    pub degenerate_zero_field: bool,
}

/// Index convention for the six signed components.
pub fn component_index(axis: usize, positive: bool) -> usize {
    2 * axis + usize::from(!positive)
}

/// Build the six `ω^{i,±} > λ‖ω‖∞` masks plus the union mask.
pub fn superlevel_mask<T: Scalar>(omega: &VectorField3D<T>, lambda: T) -> Result<MaskSet<T>> {
    if !(lambda > T::zero() && lambda < T::one()) {
        return Err(Error::InvalidParameter(format!(
            "lambda must lie in (0, 1), got {}",
            lambda.to_f64_lossy()
        )));
    }
    crate::spectral::ensure_finite(omega, "vorticity")?;
    let grid = *omega.grid();
    let cells = grid.cells();
    let linf = omega.linf_max_norm();
    let degenerate = linf == T::zero();
    let threshold = lambda * linf;

    let mut occ: [Vec<bool>; 6] = Default::default();
    for o in &mut occ {
        *o = vec![false; cells];
    }
    let mut union = vec![false; cells];
    let mut argmax = vec![0u8; cells];

    if !degenerate {
        for idx in 0..cells {
            let v = omega.at(idx);
            let mut best = T::neg_infinity();
            let mut best_slot = 0u8;
            for axis in 0..3 {
                for (signed, positive) in [(v[axis], true), (-v[axis], false)] {
                    let slot = component_index(axis, positive);
                    if signed > threshold {
                        occ[slot][idx] = true;
                        union[idx] = true;
                    }
                    if signed > best {
                        best = signed;
                        best_slot = slot as u8;
                    }
                }
            }
            argmax[idx] = best_slot;
        }
    }

    let make = |occupancy: Vec<bool>, tag: MaskTag| LevelSetMask {
        grid,
        occupancy,
        lambda,
        threshold,
        tag,
    };
    let [o0, o1, o2, o3, o4, o5] = occ;
    Ok(MaskSet {
        components: [
            make(o0, MaskTag::Component { axis: 0, positive: true }),
            make(o1, MaskTag::Component { axis: 0, positive: false }),
            make(o2, MaskTag::Component { axis: 1, positive: true }),
            make(o3, MaskTag::Component { axis: 1, positive: false }),
            make(o4, MaskTag::Component { axis: 2, positive: true }),
            make(o5, MaskTag::Component { axis: 2, positive: false }),
        ],
        union: make(union, MaskTag::Union),
        argmax_component: argmax,
        omega_linf: linf,
        degenerate_zero_field: degenerate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SparsenessMode {
    OneD,
    ThreeD,
}

/// Result of one sparseness evaluation at a fixed scale.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SparsenessReport<T: Scalar> {
    pub delta: T,
    pub scale: T,
    pub mode: SparsenessMode,
    pub worst_center: (usize, usize, usize),
    /// Max over centers of the local occupied fraction (for 1D: of the
    /// minimum over sampled directions).
    pub worst_density: T,
    pub sparse: bool,
}

/// Discrete periodic ball indicator: cells whose center lies within `r` of
/// the origin cell in the minimum-image metric. Returns the 0/1 grid and
/// the cell count.
pub fn ball_indicator<T: Scalar>(grid: &GridSpec<T>, r: T) -> (Vec<T>, usize) {
    let n = grid.n();
    let h = grid.spacing();
    let r2 = r * r;
    let mut ball = vec![T::zero(); grid.cells()];
    let mut count = 0usize;
    let axis_dist: Vec<T> = (0..n)
        .map(|i| grid.min_image(T::of(i as f64) * h))
        .collect();
    for z in 0..n {
        let dz = axis_dist[z] * axis_dist[z];
        for y in 0..n {
            let dyz = dz + axis_dist[y] * axis_dist[y];
            for x in 0..n {
                let d2 = dyz + axis_dist[x] * axis_dist[x];
                if d2 <= r2 {
                    ball[x + n * (y + n * z)] = T::one();
                    count += 1;
                }
            }
        }
    }
    (ball, count)
}

fn check_scale<T: Scalar>(grid: &GridSpec<T>, r: T) -> Result<()> {
    let quarter = grid.box_length() * T::of(0.25);
    if !(r > T::zero() && r <= quarter) {
        return Err(Error::InvalidParameter(format!(
            "scale must lie in (0, L/4] = (0, {}], got {}",
            quarter.to_f64_lossy(),
            r.to_f64_lossy()
        )));
    }
    Ok(())
}

/// Occupied-cell counts of the ball `B_r` around every center, by FFT
/// cross-correlation of the mask with the ball indicator. Counts are exact
/// integers (the float result is rounded; the round-off is far below 1/2).
pub fn ball_counts<T: Scalar>(
    spectral: &Spectral3<T>,
    occupancy: &[bool],
    ball_hat: &[Complex<T>],
) -> Vec<u32> {
    let grid = spectral.grid();
    let mask_real: Vec<T> = occupancy
        .iter()
        .map(|&b| if b { T::one() } else { T::zero() })
        .collect();
    let mask_hat = spectral.forward_scalar(&mask_real);
    let product: Vec<Complex<T>> = mask_hat
        .iter()
        .zip(ball_hat.iter())
        .map(|(m, b)| m * b.conj())
        .collect();
    let counts = spectral.inverse_scalar(&product);
    let _ = grid;
    counts
        .iter()
        .map(|&c| {
            let v = c.to_f64_lossy().round();
            debug_assert!(v >= -0.5);
            v.max(0.0) as u32
        })
        .collect()
}

/// 3D δ-sparseness at scale `r`: for every center, the occupied fraction of
/// the discrete ball `B_r`; sparse means the fraction is ≤ δ around every
/// center.
pub fn sparse_3d<T: Scalar>(mask: &LevelSetMask<T>, r: T, delta: T) -> Result<SparsenessReport<T>> {
    check_scale(&mask.grid, r)?;
    let spectral = Spectral3::new(mask.grid);
    let (ball, ball_cells) = ball_indicator(&mask.grid, r);
    let ball_hat = spectral.forward_scalar(&ball);
    let counts = ball_counts(&spectral, &mask.occupancy, &ball_hat);
    let (worst_idx, worst_count) = counts
        .iter()
        .enumerate()
        .max_by_key(|&(_, c)| *c)
        .expect("nonempty grid");
    let worst_density = T::of(*worst_count as f64 / ball_cells as f64);
    Ok(SparsenessReport {
        delta,
        scale: r,
        mode: SparsenessMode::ThreeD,
        worst_center: mask.grid.coords(worst_idx),
        worst_density,
        sparse: worst_density <= delta,
    })
}

/// The 13 lattice directions: axes, face diagonals, body diagonals.
pub fn lattice_directions<T: Scalar>() -> Vec<[T; 3]> {
    let raw: [[f64; 3]; 13] = [
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [1.0, 1.0, 0.0],
        [1.0, -1.0, 0.0],
        [1.0, 0.0, 1.0],
        [1.0, 0.0, -1.0],
        [0.0, 1.0, 1.0],
        [0.0, 1.0, -1.0],
        [1.0, 1.0, 1.0],
        [1.0, -1.0, 1.0],
        [1.0, 1.0, -1.0],
        [-1.0, 1.0, 1.0],
    ];
    raw.iter()
        .map(|v| {
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            [T::of(v[0] / norm), T::of(v[1] / norm), T::of(v[2] / norm)]
        })
        .collect()
}

/// Deterministic Fibonacci-sphere sample for denser direction sets.
pub fn fibonacci_directions<T: Scalar>(count: usize) -> Vec<[T; 3]> {
    let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
    (0..count)
        .map(|i| {
            let t = (i as f64 + 0.5) / count as f64;
            let z = 1.0 - 2.0 * t;
            let rho = (1.0 - z * z).sqrt();
            let phi = 2.0 * std::f64::consts::PI * (i as f64) / golden;
            [T::of(rho * phi.cos()), T::of(rho * phi.sin()), T::of(z)]
        })
        .collect()
}

/// Samples per half-segment for a scan radius `r`: roughly one per cell.
fn half_samples<T: Scalar>(grid: &GridSpec<T>, r: T) -> usize {
    ((r / grid.spacing()).to_f64_lossy().ceil() as usize).max(2)
}

/// Occupied fraction of the segment `(x₀ − rν, x₀ + rν)` by trapezoidal
/// count over `2m+1` samples with nearest-cell lookup.
fn segment_fraction<T: Scalar>(
    grid: &GridSpec<T>,
    occupancy: &[bool],
    center: (usize, usize, usize),
    dir: [T; 3],
    r: T,
    m: usize,
) -> T {
    let n = grid.n() as i64;
    let h = grid.spacing();
    let base = [
        T::of(center.0 as f64) * h,
        T::of(center.1 as f64) * h,
        T::of(center.2 as f64) * h,
    ];
    let step = r / T::of(m as f64);
    let mut weighted = T::zero();
    let mut total = T::zero();
    for i in -(m as i64)..=(m as i64) {
        let t = step * T::of(i as f64);
        let w = if i.unsigned_abs() as usize == m { T::of(0.5) } else { T::one() };
        let mut cell = [0usize; 3];
        for axis in 0..3 {
            let coord = (base[axis] + t * dir[axis]) / h;
            let nearest = coord.to_f64_lossy().round() as i64;
            cell[axis] = nearest.rem_euclid(n) as usize;
        }
        if occupancy[grid.index(cell[0], cell[1], cell[2])] {
            weighted += w;
        }
        total += w;
    }
    weighted / total
}

/// 1D δ-sparseness at scale `r`: a center passes if *some* direction has
/// segment fraction ≤ δ; the report carries the max over centers of the
/// min over directions.
pub fn sparse_1d<T: Scalar>(
    mask: &LevelSetMask<T>,
    r: T,
    delta: T,
    directions: &[[T; 3]],
) -> Result<SparsenessReport<T>> {
    check_scale(&mask.grid, r)?;
    if directions.is_empty() {
        return Err(Error::InvalidParameter("direction set must be nonempty".into()));
    }
    let grid = mask.grid;
    let m = half_samples(&grid, r);
    let cells = grid.cells();
    let per_center: Vec<T> = (0..cells)
        .into_par_iter()
        .map(|idx| {
            let center = grid.coords(idx);
            directions
                .iter()
                .map(|&d| segment_fraction(&grid, &mask.occupancy, center, d, r, m))
                .fold(T::infinity(), T::min)
        })
        .collect();
    let (worst_idx, worst) = per_center
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite fractions"))
        .expect("nonempty grid");
    Ok(SparsenessReport {
        delta,
        scale: r,
        mode: SparsenessMode::OneD,
        worst_center: grid.coords(worst_idx),
        worst_density: *worst,
        sparse: *worst <= delta,
    })
}

/// Outcome of a scale-of-sparseness scan.
#[derive(Debug, Clone, Serialize)]
pub struct ScaleScan<T: Scalar> {
    /// Smallest scale from which sparseness holds up to `L/4`; `None` means
    /// not sparse at any scanned scale (a sentinel, not an error).
    pub scale: Option<T>,
    /// Densities were not monotone across the scanned scales.
    pub non_monotone: bool,
    /// All `(scale, worst_density)` pairs evaluated in the dyadic scan.
    pub scanned: Vec<(T, T)>,
}

/// Scan dyadic scales `L/4·2⁻ʲ` down to the grid spacing, then bisect to
/// one-cell resolution, looking for the smallest `r` such that the mask is
/// sparse at every scanned scale in `[r, L/4]`.
pub fn sparseness_scale<T: Scalar>(
    delta: T,
    grid: &GridSpec<T>,
    mut density_at: impl FnMut(T) -> Result<T>,
) -> Result<ScaleScan<T>> {
    let h = grid.spacing();
    let top = grid.box_length() * T::of(0.25);
    let mut scales = Vec::new();
    let mut r = top;
    while r >= h {
        scales.push(r);
        r = r * T::of(0.5);
    }

    let mut scanned = Vec::with_capacity(scales.len());
    let mut sparse_flags = Vec::with_capacity(scales.len());
    for &s in &scales {
        let d = density_at(s)?;
        scanned.push((s, d));
        sparse_flags.push(d <= delta);
    }

    // The sparse set should be a prefix of the descending scan; anything
    // else is non-monotone behavior worth flagging.
    let prefix_len = sparse_flags.iter().take_while(|&&b| b).count();
    let non_monotone = sparse_flags[prefix_len..].iter().any(|&b| b);
    if prefix_len == 0 {
        return Ok(ScaleScan { scale: None, non_monotone, scanned });
    }
    let mut lo = scales[prefix_len - 1]; // smallest scale known sparse
    if prefix_len == scales.len() {
        return Ok(ScaleScan { scale: Some(lo), non_monotone, scanned });
    }
    let mut hi = scales[prefix_len]; // largest scale known non-sparse (below lo)

    // Bisect (hi, lo) down to one-cell resolution, preserving "everything
    // ≥ result is sparse".
    while lo - hi > h {
        let mid = (lo + hi) * T::of(0.5);
        let d = density_at(mid)?;
        scanned.push((mid, d));
        if d <= delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ScaleScan { scale: Some(lo), non_monotone, scanned })
}

/// Scale of 3D sparseness of a single mask.
pub fn sparseness_scale_3d<T: Scalar>(
    mask: &LevelSetMask<T>,
    delta: T,
) -> Result<ScaleScan<T>> {
    if mask.is_empty() {
        return Err(Error::MissingData("mask is empty; no scale of sparseness".into()));
    }
    let grid = mask.grid;
    sparseness_scale(delta, &grid, |r| Ok(sparse_3d(mask, r, delta)?.worst_density))
}

/// Scale of 1D sparseness of a single mask over a direction set.
pub fn sparseness_scale_1d<T: Scalar>(
    mask: &LevelSetMask<T>,
    delta: T,
    directions: &[[T; 3]],
) -> Result<ScaleScan<T>> {
    if mask.is_empty() {
        return Err(Error::MissingData("mask is empty; no scale of sparseness".into()));
    }
    let grid = mask.grid;
    sparseness_scale(delta, &grid, |r| {
        Ok(sparse_1d(mask, r, delta, directions)?.worst_density)
    })
}

/// 3D density field where each center reads the mask of the component that
/// is locally maximal *at that center*, then the max over centers. This is
/// the per-point selection the criticality verdict consumes.
pub fn pointwise_max_density<T: Scalar>(masks: &MaskSet<T>, r: T) -> Result<T> {
    let grid = masks.union.grid;
    check_scale(&grid, r)?;
    let spectral = Spectral3::new(grid);
    let (ball, ball_cells) = ball_indicator(&grid, r);
    let ball_hat = spectral.forward_scalar(&ball);
    let counts: Vec<Vec<u32>> = masks
        .components
        .par_iter()
        .map(|m| ball_counts(&spectral, &m.occupancy, &ball_hat))
        .collect();
    let mut worst = 0u32;
    for (idx, &slot) in masks.argmax_component.iter().enumerate() {
        let c = counts[slot as usize][idx];
        if c > worst {
            worst = c;
        }
    }
    Ok(T::of(worst as f64 / ball_cells as f64))
}

/// Scale of 3D sparseness under the pointwise maximal-component selection.
pub fn sparseness_scale_pointwise<T: Scalar>(
    masks: &MaskSet<T>,
    delta: T,
) -> Result<ScaleScan<T>> {
    if masks.degenerate_zero_field || masks.union.is_empty() {
        return Err(Error::MissingData("empty super-level set; no scale of sparseness".into()));
    }
    let grid = masks.union.grid;
    sparseness_scale(delta, &grid, |r| pointwise_max_density(masks, r))
}

/// Chebyshev distribution bound: volume of `{|ω| > M}` (pointwise
/// max-norm, matching the super-level sets) against `‖ω‖₁/M` (Euclidean
/// magnitude, matching the field norms). The Euclidean magnitude dominates
/// the max-norm, so the inequality is exact for the discrete measure.
pub fn distribution_bound<T: Scalar>(omega: &VectorField3D<T>, level: T) -> Result<(T, T)> {
    if !(level > T::zero()) {
        return Err(Error::InvalidParameter("level must be positive".into()));
    }
    let grid = omega.grid();
    let dv = grid.cell_volume();
    let mut count = 0usize;
    let mut l1 = T::zero();
    for idx in 0..grid.cells() {
        if omega.max_norm_at(idx) > level {
            count += 1;
        }
        l1 += omega.euclid_at(idx);
    }
    Ok((T::of(count as f64) * dv, l1 * dv / level))
}

/// One row of the volume-decay table.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct VolumeDecayRow<T: Scalar> {
    pub time: T,
    pub omega_linf: T,
    /// `|V_t|` for the union super-level set at this λ.
    pub volume: T,
    /// `|V_t|·‖ω‖∞` — bounded along the run when the a priori L¹ control
    /// holds.
    pub compensated_l1: T,
    /// `|V_t|·‖ω‖∞/φ_k(·)` — the log-compensated product.
    pub compensated_log: T,
    pub phi_value: T,
}

/// Volume-decay series of the union super-level set along a timeline.
/// Both compensated products are diagnostics; no constant is asserted.
pub fn volume_decay_series<T: Scalar>(
    timeline: &Timeline<T>,
    lambda: T,
    weight: &WeightSpec<T>,
    convention: PhiArgument,
) -> Result<Vec<VolumeDecayRow<T>>> {
    let missing: Vec<usize> = timeline
        .snapshots()
        .iter()
        .filter(|s| s.field.is_none())
        .map(|s| s.index)
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingData(format!(
            "snapshots without stored fields: {missing:?}"
        )));
    }
    let mut rows = Vec::with_capacity(timeline.snapshots().len());
    for snap in timeline.snapshots() {
        let field = snap.field.as_ref().expect("checked above").load()?;
        let masks = superlevel_mask(&field, lambda)?;
        let linf = masks.omega_linf;
        let volume = masks.union.volume();
        let (compensated_l1, compensated_log, phi_value) = if linf > T::zero() {
            let arg = match convention {
                PhiArgument::Reciprocal => T::one() / linf,
                PhiArgument::Direct => linf,
            };
            let phi = weight.eval_raw(arg)?;
            (volume * linf, volume * linf / phi, phi)
        } else {
            (T::zero(), T::zero(), T::zero())
        };
        rows.push(VolumeDecayRow {
            time: snap.time,
            omega_linf: linf,
            volume,
            compensated_l1,
            compensated_log,
            phi_value,
        });
    }
    Ok(rows)
}
