//! Quadrature and geometry oracles for the ring initial conditions.
//!
//! Every expected value here is produced by an independent route
//! (1D/2D quadrature of the analytic core profile, closed-form peak,
//! parametrized tangent) and the grid construction is checked against it.

use std::f64::consts::PI;

use vortexcrit::grid::{
    gaussian_ring_vorticity, mk_initial_configuration, velocity_from_vorticity, GridSpec,
    MKConfig, RingConfig, VectorField3D,
};
use vortexcrit::oscillation::direction_field;
use vortexcrit::sparseness::superlevel_mask;

fn tau() -> f64 {
    2.0 * PI
}

/// Periodic trilinear interpolation of a vector field.
fn sample(field: &VectorField3D<f64>, p: [f64; 3]) -> [f64; 3] {
    let grid = field.grid();
    let n = grid.n() as i64;
    let h = grid.spacing();
    let mut base = [0i64; 3];
    let mut frac = [0.0f64; 3];
    for a in 0..3 {
        let s = p[a] / h;
        let f = s.floor();
        base[a] = f as i64;
        frac[a] = s - f;
    }
    let mut out = [0.0; 3];
    for dz in 0..2 {
        for dy in 0..2 {
            for dx in 0..2 {
                let w = (if dx == 0 { 1.0 - frac[0] } else { frac[0] })
                    * (if dy == 0 { 1.0 - frac[1] } else { frac[1] })
                    * (if dz == 0 { 1.0 - frac[2] } else { frac[2] });
                let idx = grid.index(
                    (base[0] + dx).rem_euclid(n) as usize,
                    (base[1] + dy).rem_euclid(n) as usize,
                    (base[2] + dz).rem_euclid(n) as usize,
                );
                let v = field.at(idx);
                for a in 0..3 {
                    out[a] += w * v[a];
                }
            }
        }
    }
    out
}

fn desk_ring(core_radius: f64) -> RingConfig<f64> {
    RingConfig {
        radius: 1.0,
        core_radius,
        circulation: 1.0,
        center: [tau() / 2.0; 3],
        unit_normal: [0.0, 0.0, 1.0],
    }
}

#[test]
fn loop_circulation_recovers_gamma_at_n128() {
    let grid = GridSpec::new(128, tau()).unwrap();
    let ring = desk_ring(0.1);
    let omega = gaussian_ring_vorticity(&ring, &grid).unwrap();
    let u = velocity_from_vorticity(&omega).unwrap();

    // Loop of radius 4 core radii around the centerline point at θ = 0,
    // lying in the meridional plane spanned by (r̂, n̂).
    let b = 4.0 * ring.core_radius;
    let center = ring.centerline_point(0.0);
    let e1 = [
        (center[0] - ring.center[0]) / ring.radius,
        (center[1] - ring.center[1]) / ring.radius,
        (center[2] - ring.center[2]) / ring.radius,
    ];
    let n_hat = ring.unit_normal;
    let samples = 720;
    let mut circulation = 0.0;
    for i in 0..samples {
        let phi = tau() * i as f64 / samples as f64;
        let (s, c) = phi.sin_cos();
        let p = [
            center[0] + b * (c * e1[0] + s * n_hat[0]),
            center[1] + b * (c * e1[1] + s * n_hat[1]),
            center[2] + b * (c * e1[2] + s * n_hat[2]),
        ];
        let dl = [
            b * (-s * e1[0] + c * n_hat[0]) * tau() / samples as f64,
            b * (-s * e1[1] + c * n_hat[1]) * tau() / samples as f64,
            b * (-s * e1[2] + c * n_hat[2]) * tau() / samples as f64,
        ];
        let v = sample(&u, p);
        circulation += v[0] * dl[0] + v[1] * dl[1] + v[2] * dl[2];
    }
    let err = (circulation.abs() - ring.circulation.abs()).abs() / ring.circulation.abs();
    assert!(
        err <= 0.02,
        "loop circulation {circulation} vs Γ = {} (err {err})",
        ring.circulation
    );
}

#[test]
fn total_vorticity_mass_matches_quadrature() {
    let grid = GridSpec::new(128, tau()).unwrap();
    let ring = desk_ring(0.1);
    let omega = gaussian_ring_vorticity(&ring, &grid).unwrap();

    let dv = grid.cell_volume();
    let grid_mass: f64 = (0..grid.cells()).map(|i| omega.euclid_at(i)).sum::<f64>() * dv;

    // Oracle: 2D quadrature of the meridional profile with the r-weight,
    // ∫|ω| dV = A·2π·∫∫ e^{−((r−R)² + z²)/a²} r dr dz.
    let a = ring.core_radius;
    let amp = ring.circulation / (PI * a * a);
    let steps = 4000;
    let span = 8.0 * a;
    let dq = 2.0 * span / steps as f64;
    let mut quad = 0.0;
    for i in 0..steps {
        let r = ring.radius - span + (i as f64 + 0.5) * dq;
        if r <= 0.0 {
            continue;
        }
        for j in 0..steps {
            let z = -span + (j as f64 + 0.5) * dq;
            let d2 = (r - ring.radius).powi(2) + z * z;
            quad += (-d2 / (a * a)).exp() * r * dq * dq;
        }
    }
    let oracle = amp * tau() * quad;
    // Thin-core closed form for context: 2πRΓ.
    let thin_core = tau() * ring.radius * ring.circulation;
    assert!((oracle - thin_core).abs() <= 0.01 * thin_core);
    assert!(
        (grid_mass - oracle).abs() <= 0.03 * oracle,
        "grid ∫|ω| = {grid_mass}, quadrature oracle {oracle}"
    );
}

fn desk_mk() -> MKConfig<f64> {
    MKConfig {
        ring: RingConfig {
            radius: 1.0,
            core_radius: 0.1,
            circulation: 1.0,
            center: [0.0; 3],
            unit_normal: [1.0, 0.0, 0.0],
        },
        inclination: PI / 6.0,
        separation: 0.5,
        viscosity: 0.01,
    }
}

#[test]
fn mk_peak_matches_analytic_core_maximum() {
    let grid = GridSpec::new(64, tau()).unwrap();
    let cfg = desk_mk();
    let omega = mk_initial_configuration(&cfg, &grid).unwrap();
    let linf = omega.linf_max_norm();
    // Oracle: the analytic Gaussian core maximum Γ/(π a²) = 4·Γ/(4π(δ₀/2)²)·π/4...
    let peak = cfg.ring.peak_vorticity();
    assert!(
        (linf - peak).abs() <= 0.10 * peak,
        "‖ω‖∞ = {linf} vs analytic core peak {peak}"
    );
}

#[test]
fn direction_field_is_tangent_at_the_core() {
    let grid = GridSpec::new(128, tau()).unwrap();
    let ring = desk_ring(0.15);
    let omega = gaussian_ring_vorticity(&ring, &grid).unwrap();
    let df = direction_field(&omega, 1e-3).unwrap();

    let n = grid.n();
    let h = grid.spacing();
    let mut checked = 0;
    let mut worst_deg = 0.0f64;
    for z in 0..n {
        for y in 0..n {
            for x in 0..n {
                let idx = grid.index(x, y, z);
                if !df.valid[idx] {
                    continue;
                }
                let p = [x as f64 * h, y as f64 * h, z as f64 * h];
                let d = [
                    grid.min_image(p[0] - ring.center[0]),
                    grid.min_image(p[1] - ring.center[1]),
                    grid.min_image(p[2] - ring.center[2]),
                ];
                let axial = d[2];
                let r = (d[0] * d[0] + d[1] * d[1]).sqrt();
                let dist = ((r - ring.radius).powi(2) + axial * axial).sqrt();
                if dist > 0.25 * ring.core_radius {
                    continue;
                }
                // Analytic tangent of the parametrized circle: ẑ × r̂.
                let tangent = [-d[1] / r, d[0] / r, 0.0];
                let xi = [df.xi[0][idx], df.xi[1][idx], df.xi[2][idx]];
                let dot = (xi[0] * tangent[0] + xi[1] * tangent[1] + xi[2] * tangent[2])
                    .clamp(-1.0, 1.0);
                let angle = dot.acos().to_degrees();
                worst_deg = worst_deg.max(angle);
                checked += 1;
            }
        }
    }
    assert!(checked > 50, "too few centerline cells checked: {checked}");
    assert!(worst_deg <= 2.0, "direction off tangent by {worst_deg}° on {checked} cells");
}

#[test]
fn half_max_mask_volume_matches_quadrature() {
    let grid = GridSpec::new(128, tau()).unwrap();
    let ring = desk_ring(0.18);
    let omega = gaussian_ring_vorticity(&ring, &grid).unwrap();
    let masks = superlevel_mask(&omega, 0.5).unwrap();
    let grid_volume = masks.union.volume();

    // Oracle: quadrature over θ of the meridional cross-section area
    // where e^{−d²/a²}·m(θ) exceeds the measured threshold/A, with
    // m(θ) = max(|sin|, |cos|) the max-norm of the azimuthal direction.
    let a = ring.core_radius;
    let amp = ring.peak_vorticity();
    let thresh = masks.union.threshold;
    let steps = 100_000;
    let mut vol = 0.0;
    let mut shell = 0.0;
    for i in 0..steps {
        let theta = tau() * (i as f64 + 0.5) / steps as f64;
        let m = theta.sin().abs().max(theta.cos().abs());
        let ratio = amp * m / thresh;
        if ratio > 1.0 {
            let d_half2 = a * a * ratio.ln();
            vol += PI * d_half2 * ring.radius * tau() / steps as f64;
            shell += tau() * d_half2.sqrt() * grid.spacing() * ring.radius * tau() / steps as f64;
        }
    }
    assert!(
        (grid_volume - vol).abs() <= shell,
        "mask volume {grid_volume} vs quadrature {vol} (±{shell})"
    );
}
