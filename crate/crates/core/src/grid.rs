//! Periodic-box fields and the two-ring collision initial condition.
//!
//! The box is `[0, L)³` with `n` cells per axis and collocation points at
//! `x_i = i·h`, `h = L/n`, stored x-fastest (`idx = x + n(y + nz)`). The
//! pointwise magnitude of a 3-vector is its max-norm throughout: every
//! level-set and sup-norm diagnostic selects the largest component, so all
//! scalars derived from `‖ω‖∞` refer to one consistent quantity.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::{
    self, curl_hat, ensure_finite, max_divergence, project_solenoidal, Spectral3,
};

/// Cubic periodic grid: cells per axis (power of two, ≥ 8) and physical side
/// length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec<T: Scalar> {
    n: usize,
    box_length: T,
}

impl<T: Scalar> GridSpec<T> {
    pub fn new(n: usize, box_length: T) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "grid cells per axis must be a power of two ≥ 8, got {n}"
            )));
        }
        if !(box_length > T::zero()) || !box_length.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "box length must be positive and finite, got {}",
                box_length.to_f64_lossy()
            )));
        }
        Ok(Self { n, box_length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_length(&self) -> T {
        self.box_length
    }

    pub fn spacing(&self) -> T {
        self.box_length / T::of(self.n as f64)
    }

    pub fn cells(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn cell_volume(&self) -> T {
        self.spacing().powi(3)
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.n * (y + self.n * z)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize, usize) {
        let x = idx % self.n;
        let y = (idx / self.n) % self.n;
        let z = idx / (self.n * self.n);
        (x, y, z)
    }

    /// Physical position of a cell center.
    pub fn position(&self, x: usize, y: usize, z: usize) -> [T; 3] {
        let h = self.spacing();
        [T::of(x as f64) * h, T::of(y as f64) * h, T::of(z as f64) * h]
    }

    /// Signed minimum-image displacement component.
    #[inline]
    pub fn min_image(&self, d: T) -> T {
        let l = self.box_length;
        let half = l * T::of(0.5);
        let mut d = d % l;
        if d > half {
            d -= l;
        } else if d < -half {
            d += l;
        }
        d
    }
}

/// A 3-vector field on a periodic grid, stored component-major.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField3D<T: Scalar> {
    grid: GridSpec<T>,
    components: [Vec<T>; 3],
}

impl<T: Scalar> VectorField3D<T> {
    pub fn zeros(grid: GridSpec<T>) -> Self {
        let len = grid.cells();
        Self {
            grid,
            components: [vec![T::zero(); len], vec![T::zero(); len], vec![T::zero(); len]],
        }
    }

    pub fn from_components(grid: GridSpec<T>, components: [Vec<T>; 3]) -> Result<Self> {
        for comp in &components {
            if comp.len() != grid.cells() {
                return Err(Error::InvalidParameter(format!(
                    "component length {} does not match grid with {} cells",
                    comp.len(),
                    grid.cells()
                )));
            }
        }
        let field = Self { grid, components };
        if !field.is_finite() {
            return Err(Error::NonFinite("field data".into()));
        }
        Ok(field)
    }

    /// Internal constructor for data known to be the right shape.
    pub(crate) fn from_components_unchecked(grid: GridSpec<T>, components: [Vec<T>; 3]) -> Self {
        Self { grid, components }
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn components(&self) -> &[Vec<T>; 3] {
        &self.components
    }

    pub fn components_mut(&mut self) -> &mut [Vec<T>; 3] {
        &mut self.components
    }

    #[inline]
    pub fn at(&self, idx: usize) -> [T; 3] {
        [
            self.components[0][idx],
            self.components[1][idx],
            self.components[2][idx],
        ]
    }

    #[inline]
    pub fn set(&mut self, idx: usize, v: [T; 3]) {
        self.components[0][idx] = v[0];
        self.components[1][idx] = v[1];
        self.components[2][idx] = v[2];
    }

    pub fn is_finite(&self) -> bool {
        self.components
            .iter()
            .all(|c| c.iter().all(|v| v.is_finite()))
    }

    pub fn scaled(&self, factor: T) -> Self {
        let components = [
            self.components[0].iter().map(|&v| v * factor).collect(),
            self.components[1].iter().map(|&v| v * factor).collect(),
            self.components[2].iter().map(|&v| v * factor).collect(),
        ];
        Self { grid: self.grid, components }
    }

    pub fn add_assign(&mut self, other: &Self) {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        for c in 0..3 {
            for (a, b) in self.components[c].iter_mut().zip(other.components[c].iter()) {
                *a += *b;
            }
        }
    }

    /// Pointwise max-norm of the 3-vector, maximized over the grid.
    pub fn linf_max_norm(&self) -> T {
        let mut best = T::zero();
        for idx in 0..self.grid.cells() {
            let v = self.at(idx);
            let m = v[0].abs().max(v[1].abs()).max(v[2].abs());
            if m > best {
                best = m;
            }
        }
        best
    }

    /// Pointwise Euclidean magnitude at one cell.
    #[inline]
    pub fn euclid_at(&self, idx: usize) -> T {
        let v = self.at(idx);
        (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
    }

    /// Pointwise max-norm magnitude at one cell.
    #[inline]
    pub fn max_norm_at(&self, idx: usize) -> T {
        let v = self.at(idx);
        v[0].abs().max(v[1].abs()).max(v[2].abs())
    }
}

/// A scalar field on the same layout, used by the oscillation diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField3D<T: Scalar> {
    pub grid: GridSpec<T>,
    pub data: Vec<T>,
}

impl<T: Scalar> ScalarField3D<T> {
    pub fn new(grid: GridSpec<T>, data: Vec<T>) -> Result<Self> {
        if data.len() != grid.cells() {
            return Err(Error::InvalidParameter(format!(
                "scalar field length {} does not match grid with {} cells",
                data.len(),
                grid.cells()
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("scalar field".into()));
        }
        Ok(Self { grid, data })
    }
}

/// One circular vortex ring with a Gaussian core.
#[derive(Debug, Clone, Copy)]
pub struct RingConfig<T: Scalar> {
    /// Ring radius R (distance from center to the core centerline).
    pub radius: T,
    /// e⁻¹ radius of the Gaussian core cross-section (δ₀/2 for core
    /// diameter δ₀).
    pub core_radius: T,
    /// Signed circulation Γ threading the core.
    pub circulation: T,
    pub center: [T; 3],
    pub unit_normal: [T; 3],
}

impl<T: Scalar> RingConfig<T> {
    pub fn validate(&self, grid: &GridSpec<T>) -> Result<()> {
        if !(self.radius > T::zero()) {
            return Err(Error::Configuration("ring radius must be positive".into()));
        }
        if !(self.core_radius > T::zero() && self.core_radius < self.radius * T::of(0.5)) {
            return Err(Error::Configuration(format!(
                "core radius must lie in (0, R/2), got {} with R = {}",
                self.core_radius.to_f64_lossy(),
                self.radius.to_f64_lossy()
            )));
        }
        let norm = dot(self.unit_normal, self.unit_normal).sqrt();
        if (norm - T::one()).abs() > T::of(1e-8) {
            return Err(Error::Configuration("ring normal must be a unit vector".into()));
        }
        // Fits inside one periodic cell with margin ≥ 4 core radii: the tube
        // extent along each axis must not exceed the box.
        let margin = T::of(4.0) * self.core_radius;
        for axis in 0..3 {
            let in_plane = (T::one() - self.unit_normal[axis] * self.unit_normal[axis])
                .max(T::zero())
                .sqrt();
            let extent = T::of(2.0) * (self.radius * in_plane + margin);
            if extent > grid.box_length() {
                return Err(Error::Configuration(format!(
                    "ring does not fit in the box: extent {} along axis {axis} exceeds L = {}",
                    extent.to_f64_lossy(),
                    grid.box_length().to_f64_lossy()
                )));
            }
        }
        Ok(())
    }

    /// Peak vorticity magnitude of the analytic Gaussian profile,
    /// `Γ/(π a²)` for e⁻¹ radius `a`.
    pub fn peak_vorticity(&self) -> T {
        self.circulation.abs() / (T::PI() * self.core_radius * self.core_radius)
    }

    /// Point on the core centerline at angle `theta`, with the in-plane
    /// orthonormal frame chosen deterministically from the normal.
    pub fn centerline_point(&self, theta: T) -> [T; 3] {
        let (e1, e2) = plane_basis(self.unit_normal);
        let (s, c) = theta.sin_cos();
        [
            self.center[0] + self.radius * (c * e1[0] + s * e2[0]),
            self.center[1] + self.radius * (c * e1[1] + s * e2[1]),
            self.center[2] + self.radius * (c * e1[2] + s * e2[2]),
        ]
    }
}

/// Two-ring collision configuration: a ring template plus the collision
/// geometry (half-angle between each ring plane and the symmetry plane,
/// gap between the closest centerline points) and the viscosity.
#[derive(Debug, Clone, Copy)]
pub struct MKConfig<T: Scalar> {
    pub ring: RingConfig<T>,
    /// Half-angle α between each ring plane and the symmetry plane, radians.
    pub inclination: T,
    /// Initial gap between the closest core centerline points.
    pub separation: T,
    pub viscosity: T,
}

impl<T: Scalar> MKConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.inclination > T::zero() && self.inclination < T::FRAC_PI_2())
            && self.inclination != T::zero()
        {
            return Err(Error::Configuration(format!(
                "inclination must lie in [0, π/2), got {}",
                self.inclination.to_f64_lossy()
            )));
        }
        if !(self.separation > T::zero()) {
            return Err(Error::Configuration("separation must be positive".into()));
        }
        if self.viscosity < T::zero() {
            return Err(Error::Configuration("viscosity must be nonnegative".into()));
        }
        Ok(())
    }

    /// The two tilted rings: circulations +Γ and −Γ, planes at ±α to the
    /// symmetry plane `{x = L/2}`, tilted about the y-axis, closest
    /// centerline points `separation` apart.
    pub fn rings(&self, grid: &GridSpec<T>) -> [RingConfig<T>; 2] {
        let half = grid.box_length() * T::of(0.5);
        let (s, c) = self.inclination.sin_cos();
        let offset = self.separation * T::of(0.5) + self.ring.radius * s;
        let left = RingConfig {
            center: [half - offset, half, half],
            unit_normal: [c, T::zero(), s],
            circulation: self.ring.circulation,
            ..self.ring
        };
        let right = RingConfig {
            center: [half + offset, half, half],
            unit_normal: [c, T::zero(), -s],
            circulation: -self.ring.circulation,
            ..self.ring
        };
        [left, right]
    }
}

fn dot<T: Scalar>(a: [T; 3], b: [T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross<T: Scalar>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Orthonormal basis of the plane normal to `n`, deterministic in `n`.
fn plane_basis<T: Scalar>(n: [T; 3]) -> ([T; 3], [T; 3]) {
    let pick = if n[0].abs() < T::of(0.9) {
        [T::one(), T::zero(), T::zero()]
    } else {
        [T::zero(), T::one(), T::zero()]
    };
    let mut e1 = cross(pick, n);
    let norm = dot(e1, e1).sqrt();
    for v in &mut e1 {
        *v = *v / norm;
    }
    let e2 = cross(n, e1);
    (e1, e2)
}

/// Azimuthal Gaussian-core vorticity of one ring, made exactly solenoidal
/// by spectral projection.
///
/// The amplitude `Γ/(π a²)` normalizes the meridional flux of the Gaussian
/// profile `exp(−d²/a²)` to the requested circulation.
pub fn gaussian_ring_vorticity<T: Scalar>(
    ring: &RingConfig<T>,
    grid: &GridSpec<T>,
) -> Result<VectorField3D<T>> {
    ring.validate(grid)?;
    let mut field = VectorField3D::zeros(*grid);
    accumulate_ring(ring, grid, &mut field);
    let spectral = Spectral3::new(*grid);
    let mut hat = spectral.forward_vector(&field);
    project_solenoidal(grid, &mut hat);
    Ok(spectral.inverse_vector(&hat))
}

/// Add one ring's raw (unprojected) vorticity into `field`.
fn accumulate_ring<T: Scalar>(ring: &RingConfig<T>, grid: &GridSpec<T>, field: &mut VectorField3D<T>) {
    if ring.circulation == T::zero() {
        return;
    }
    let amp = ring.circulation / (T::PI() * ring.core_radius * ring.core_radius);
    let inv_a2 = T::one() / (ring.core_radius * ring.core_radius);
    // Gaussian support is ~6 e-folding radii; beyond that the amplitude is
    // below 2e-16 of the peak.
    let reach = ring.core_radius * T::of(6.0);
    let cutoff2 = reach * reach;
    let n = grid.n();
    let h = grid.spacing();
    let normal = ring.unit_normal;
    let tiny = T::of(1e-30);

    for z in 0..n {
        for y in 0..n {
            for x in 0..n {
                let idx = grid.index(x, y, z);
                let pos = [T::of(x as f64) * h, T::of(y as f64) * h, T::of(z as f64) * h];
                let d = [
                    grid.min_image(pos[0] - ring.center[0]),
                    grid.min_image(pos[1] - ring.center[1]),
                    grid.min_image(pos[2] - ring.center[2]),
                ];
                let axial = dot(d, normal);
                let radial = [
                    d[0] - axial * normal[0],
                    d[1] - axial * normal[1],
                    d[2] - axial * normal[2],
                ];
                let r = dot(radial, radial).sqrt();
                let dr = r - ring.radius;
                let dist2 = dr * dr + axial * axial;
                if dist2 > cutoff2 || r < tiny {
                    continue;
                }
                let w = amp * (-dist2 * inv_a2).exp();
                let inv_r = T::one() / r;
                let tangent = cross(normal, [radial[0] * inv_r, radial[1] * inv_r, radial[2] * inv_r]);
                let mut v = field.at(idx);
                v[0] += w * tangent[0];
                v[1] += w * tangent[1];
                v[2] += w * tangent[2];
                field.set(idx, v);
            }
        }
    }
}

/// Superposed two-ring initial vorticity, solenoidal after projection.
///
/// Fails if the core centerlines come closer than one core radius (the
/// cores would overlap by more than half and the field would no longer
/// represent two distinct rings).
pub fn mk_initial_configuration<T: Scalar>(
    cfg: &MKConfig<T>,
    grid: &GridSpec<T>,
) -> Result<VectorField3D<T>> {
    cfg.validate()?;
    let rings = cfg.rings(grid);
    for ring in &rings {
        ring.validate(grid)?;
    }
    let gap = closest_centerline_distance(&rings[0], &rings[1]);
    if gap < cfg.ring.core_radius {
        return Err(Error::Configuration(format!(
            "vortex cores overlap by more than half: centerline gap {} < core radius {}",
            gap.to_f64_lossy(),
            cfg.ring.core_radius.to_f64_lossy()
        )));
    }
    let mut field = VectorField3D::zeros(*grid);
    accumulate_ring(&rings[0], grid, &mut field);
    accumulate_ring(&rings[1], grid, &mut field);
    let spectral = Spectral3::new(*grid);
    let mut hat = spectral.forward_vector(&field);
    project_solenoidal(grid, &mut hat);
    Ok(spectral.inverse_vector(&hat))
}

/// Minimum distance between two ring centerlines, by dense sampling.
pub fn closest_centerline_distance<T: Scalar>(a: &RingConfig<T>, b: &RingConfig<T>) -> T {
    const SAMPLES: usize = 720;
    let pts_a: Vec<[T; 3]> = (0..SAMPLES)
        .map(|i| a.centerline_point(T::of(i as f64 / SAMPLES as f64) * T::of(2.0) * T::PI()))
        .collect();
    let pts_b: Vec<[T; 3]> = (0..SAMPLES)
        .map(|i| b.centerline_point(T::of(i as f64 / SAMPLES as f64) * T::of(2.0) * T::PI()))
        .collect();
    let mut best = T::infinity();
    for p in &pts_a {
        for q in &pts_b {
            let d = [p[0] - q[0], p[1] - q[1], p[2] - q[2]];
            let d2 = dot(d, d);
            if d2 < best {
                best = d2;
            }
        }
    }
    best.sqrt()
}

/// Spectral Biot–Savart: velocity with `curl u = ω`, `div u = 0`, zero mean.
pub fn velocity_from_vorticity<T: Scalar>(omega: &VectorField3D<T>) -> Result<VectorField3D<T>> {
    ensure_finite(omega, "vorticity")?;
    let grid = *omega.grid();
    let spectral = Spectral3::new(grid);
    let omega_hat = spectral.forward_vector(omega);
    let u_hat = spectral::velocity_hat_from_vorticity_hat(&grid, &omega_hat);
    Ok(spectral.inverse_vector(&u_hat))
}

/// Integral norms and quadratic diagnostics of a vorticity field.
///
/// `linf` is the grid max of the pointwise max-norm (the component
/// selection all level-set diagnostics use); `l1`, `l2` and `enstrophy`
/// use the pointwise Euclidean magnitude (`enstrophy = ½∫|ω|² dV`);
/// `helicity = ∫u·ω dV` with `u` recovered by Biot–Savart. Since the
/// Euclidean magnitude dominates the max-norm, the Chebyshev bound on the
/// max-norm super-level sets against this `l1` is exact.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FieldNorms<T: Scalar> {
    pub linf: T,
    pub l1: T,
    pub l2: T,
    pub enstrophy: T,
    pub helicity: T,
}

pub fn field_norms<T: Scalar>(omega: &VectorField3D<T>) -> Result<FieldNorms<T>> {
    ensure_finite(omega, "vorticity")?;
    let grid = omega.grid();
    let dv = grid.cell_volume();
    let mut linf = T::zero();
    let mut l1 = T::zero();
    let mut sq = T::zero();
    for idx in 0..grid.cells() {
        let v = omega.at(idx);
        let m = v[0].abs().max(v[1].abs()).max(v[2].abs());
        if m > linf {
            linf = m;
        }
        let sq_here = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        l1 += sq_here.sqrt();
        sq += sq_here;
    }
    let u = velocity_from_vorticity(omega)?;
    let mut hel = T::zero();
    for idx in 0..grid.cells() {
        let w = omega.at(idx);
        let v = u.at(idx);
        hel += dot(w, v);
    }
    Ok(FieldNorms {
        linf,
        l1: l1 * dv,
        l2: (sq * dv).sqrt(),
        enstrophy: sq * dv * T::of(0.5),
        helicity: hel * dv,
    })
}

/// Divergence check used by tests and the solver: `max |div u| ≤ tol·‖u‖∞`.
pub fn relative_max_divergence<T: Scalar>(field: &VectorField3D<T>) -> T {
    let grid = *field.grid();
    let spectral = Spectral3::new(grid);
    let hat = spectral.forward_vector(field);
    let div = max_divergence(&spectral, &hat);
    let umax = field.linf_max_norm();
    if umax == T::zero() {
        div
    } else {
        div / umax
    }
}

/// Curl of a velocity field, used by round-trip tests.
pub fn curl<T: Scalar>(u: &VectorField3D<T>) -> VectorField3D<T> {
    let grid = *u.grid();
    let spectral = Spectral3::new(grid);
    let hat = spectral.forward_vector(u);
    let w_hat = curl_hat(&grid, &hat);
    spectral.inverse_vector(&w_hat)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tau() -> f64 {
        2.0 * std::f64::consts::PI
    }

    fn desk_ring(n: usize) -> (RingConfig<f64>, GridSpec<f64>) {
        let grid = GridSpec::new(n, tau()).unwrap();
        let ring = RingConfig {
            radius: 1.0,
            core_radius: 0.1,
            circulation: 1.0,
            center: [tau() / 2.0; 3],
            unit_normal: [0.0, 0.0, 1.0],
        };
        (ring, grid)
    }

    #[test]
    fn grid_spec_validation() {
        assert!(GridSpec::new(8, 1.0).is_ok());
        assert!(GridSpec::new(7, 1.0).is_err());
        assert!(GridSpec::new(12, 1.0).is_err());
        assert!(GridSpec::new(16, 0.0).is_err());
        let g = GridSpec::new(16, 4.0).unwrap();
        assert_eq!(g.spacing(), 0.25);
    }

    #[test]
    fn min_image_wraps() {
        let g = GridSpec::new(8, 10.0).unwrap();
        assert_eq!(g.min_image(7.0), -3.0);
        assert_eq!(g.min_image(-7.0), 3.0);
        assert_eq!(g.min_image(2.0), 2.0);
    }

    #[test]
    fn zero_circulation_gives_zero_field() {
        let (mut ring, grid) = desk_ring(16);
        ring.circulation = 0.0;
        let field = gaussian_ring_vorticity(&ring, &grid).unwrap();
        assert_eq!(field.linf_max_norm(), 0.0);
    }

    #[test]
    fn flipping_the_normal_negates_the_field() {
        let (ring, grid) = desk_ring(32);
        let up = gaussian_ring_vorticity(&ring, &grid).unwrap();
        let mut flipped = ring;
        flipped.unit_normal = [0.0, 0.0, -1.0];
        let down = gaussian_ring_vorticity(&flipped, &grid).unwrap();
        for c in 0..3 {
            for (a, b) in up.components()[c].iter().zip(down.components()[c].iter()) {
                assert!((a + b).abs() < 1e-12, "not an exact negative: {a} vs {b}");
            }
        }
    }

    #[test]
    fn ring_must_fit_in_box() {
        let grid = GridSpec::new(16, 2.0).unwrap();
        let ring = RingConfig {
            radius: 1.0,
            core_radius: 0.1,
            circulation: 1.0,
            center: [1.0; 3],
            unit_normal: [0.0, 0.0, 1.0],
        };
        assert!(matches!(
            gaussian_ring_vorticity(&ring, &grid),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn velocity_of_zero_field_is_zero() {
        let grid = GridSpec::new(8, 1.0).unwrap();
        let u = velocity_from_vorticity(&VectorField3D::zeros(grid)).unwrap();
        assert_eq!(u.linf_max_norm(), 0.0);
    }

    #[test]
    fn ring_velocity_is_divergence_free() {
        let (ring, grid) = desk_ring(32);
        let omega = gaussian_ring_vorticity(&ring, &grid).unwrap();
        let u = velocity_from_vorticity(&omega).unwrap();
        assert!(relative_max_divergence(&u) <= 1e-10);
    }

    #[test]
    fn norms_of_constant_field() {
        let grid = GridSpec::new(8, 2.0).unwrap();
        let c = 1.5f64;
        let mut field = VectorField3D::zeros(grid);
        field.components_mut()[0].iter_mut().for_each(|v| *v = c);
        let norms = field_norms(&field).unwrap();
        assert!((norms.linf - c).abs() < 1e-14);
        assert!((norms.l1 - c * 8.0).abs() < 1e-12, "l1 = {}", norms.l1);
        assert!((norms.l2 - (c * c * 8.0f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn l1_bounded_by_volume_times_linf() {
        let (ring, grid) = desk_ring(16);
        let omega = gaussian_ring_vorticity(&ring, &grid).unwrap();
        let norms = field_norms(&omega).unwrap();
        let vol = grid.box_length().powi(3);
        assert!(norms.l1 <= 3.0f64.sqrt() * vol * norms.linf);
    }

    #[test]
    fn mk_head_on_pair_is_mirror_antisymmetric() {
        let grid = GridSpec::new(32, tau()).unwrap();
        let cfg = MKConfig {
            ring: RingConfig {
                radius: 1.0,
                core_radius: 0.15,
                circulation: 1.0,
                center: [0.0; 3],
                unit_normal: [1.0, 0.0, 0.0],
            },
            inclination: 0.0,
            separation: 1.2,
            viscosity: 0.01,
        };
        let omega = mk_initial_configuration(&cfg, &grid).unwrap();
        let norms = field_norms(&omega).unwrap();
        // Mirror-antisymmetric pair: helicity and net vorticity cancel.
        assert!(norms.helicity.abs() < 1e-8 * norms.enstrophy.max(1e-30));
        let dv = grid.cell_volume();
        for c in 0..3 {
            let total: f64 = omega.components()[c].iter().sum::<f64>() * dv;
            assert!(total.abs() < 1e-10, "net vorticity component {c} = {total}");
        }
    }

    #[test]
    fn mk_swapping_circulations_mirrors_the_field() {
        let grid = GridSpec::new(32, tau()).unwrap();
        let mut cfg = MKConfig {
            ring: RingConfig {
                radius: 1.0,
                core_radius: 0.15,
                circulation: 1.0,
                center: [0.0; 3],
                unit_normal: [1.0, 0.0, 0.0],
            },
            inclination: std::f64::consts::FRAC_PI_6,
            separation: 0.8,
            viscosity: 0.01,
        };
        let a = mk_initial_configuration(&cfg, &grid).unwrap();
        cfg.ring.circulation = -1.0;
        let b = mk_initial_configuration(&cfg, &grid).unwrap();
        // Swapping Γ ↔ −Γ negates the mirror image: B(x) = R ω_A(Rx) with
        // R = diag(−1,1,1) about the symmetry plane x = L/2.
        let n = grid.n();
        let mut worst: f64 = 0.0;
        for z in 0..n {
            for y in 0..n {
                for x in 0..n {
                    let idx = grid.index(x, y, z);
                    let xr = (n - x) % n;
                    let mirrored = grid.index(xr, y, z);
                    let va = a.at(idx);
                    let vb = b.at(mirrored);
                    worst = worst.max((va[0] + vb[0]).abs());
                    worst = worst.max((va[1] - vb[1]).abs());
                    worst = worst.max((va[2] - vb[2]).abs());
                }
            }
        }
        let scale = a.linf_max_norm();
        assert!(worst < 1e-10 * scale, "mirror mismatch {worst} at scale {scale}");
    }

    #[test]
    fn mk_core_overlap_is_rejected() {
        let grid = GridSpec::new(32, tau()).unwrap();
        let cfg = MKConfig {
            ring: RingConfig {
                radius: 1.0,
                core_radius: 0.2,
                circulation: 1.0,
                center: [0.0; 3],
                unit_normal: [1.0, 0.0, 0.0],
            },
            inclination: std::f64::consts::FRAC_PI_6,
            separation: 0.05,
            viscosity: 0.01,
        };
        assert!(matches!(
            mk_initial_configuration(&cfg, &grid),
            Err(Error::Configuration(_))
        ));
    }
}
