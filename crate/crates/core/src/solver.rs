//! Pseudo-spectral time integrator for the vorticity equation
//! `∂ₜω = ∇×(u×ω) + νΔω` on the periodic box.
//!
//! The quadratic term is evaluated pseudo-spectrally in rotational form with
//! 2/3-rule dealiasing (exact Galerkin truncation for quadratic products)
//! and advanced by classical RK4; the viscous term is removed by an exact
//! integrating factor, so the scheme stays explicit and unconditionally
//! stable in ν. Setting ν = 0 gives an inviscid (Euler) mode for short
//! contrast runs.

use std::path::PathBuf;

use rustfft::num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, VectorField3D};
use crate::scalar::Scalar;
use crate::slf;
use crate::spectral::{
    curl_hat, dealias_23, integral_dot_hat, integral_sq_hat, project_solenoidal,
    velocity_hat_from_vorticity_hat, wavenumbers_full, Spectral3,
};

/// Spectral vorticity state at one instant.
#[derive(Clone)]
pub struct SimState<T: Scalar> {
    pub time: T,
    pub viscosity: T,
    grid: GridSpec<T>,
    omega_hat: [Vec<Complex<T>>; 3],
}

impl<T: Scalar> SimState<T> {
    /// Build from a physical vorticity field: transforms, projects onto the
    /// solenoidal subspace and (optionally) truncates to the dealiased band.
    pub fn from_field(omega: &VectorField3D<T>, viscosity: T, dealias: bool) -> Result<Self> {
        if viscosity < T::zero() {
            return Err(Error::InvalidParameter("viscosity must be ≥ 0".into()));
        }
        crate::spectral::ensure_finite(omega, "initial vorticity")?;
        let grid = *omega.grid();
        let spectral = Spectral3::new(grid);
        let mut omega_hat = spectral.forward_vector(omega);
        project_solenoidal(&grid, &mut omega_hat);
        if dealias {
            dealias_23(&grid, &mut omega_hat);
        }
        Ok(Self { time: T::zero(), viscosity, grid, omega_hat })
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn omega_hat(&self) -> &[Vec<Complex<T>>; 3] {
        &self.omega_hat
    }

    /// Physical vorticity field.
    pub fn to_field(&self, spectral: &Spectral3<T>) -> VectorField3D<T> {
        spectral.inverse_vector(&self.omega_hat)
    }

    pub fn is_finite(&self) -> bool {
        self.omega_hat
            .iter()
            .all(|c| c.iter().all(|v| v.re.is_finite() && v.im.is_finite()))
    }
}

/// CFL policy. The advective candidate is `c_cfl·h/max(‖u‖∞, ε)`; the
/// explicit viscous limit `h²/(6ν)` only applies when an explicit viscous
/// term is selected (the integrating-factor scheme has none).
#[derive(Debug, Clone, Copy)]
pub struct CflConfig<T: Scalar> {
    pub c_cfl: T,
    pub dt_max: T,
    pub explicit_viscous: bool,
}

impl<T: Scalar> Default for CflConfig<T> {
    fn default() -> Self {
        Self { c_cfl: T::of(0.5), dt_max: T::of(0.1), explicit_viscous: false }
    }
}

/// Advective CFL candidate for a given max velocity.
pub fn advective_dt<T: Scalar>(spacing: T, umax: T, c_cfl: T) -> T {
    c_cfl * spacing / umax.max(T::of(1e-30))
}

/// Scalar diagnostics recorded at every snapshot.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Diagnostics<T: Scalar> {
    pub energy: T,
    pub enstrophy: T,
    pub helicity: T,
    pub omega_linf: T,
    pub omega_l1: T,
}

/// Where a snapshot's full field lives, if it was kept.
#[derive(Debug, Clone)]
pub enum FieldHandle<T: Scalar> {
    Memory(VectorField3D<T>),
    File(PathBuf),
}

impl<T: Scalar> FieldHandle<T> {
    pub fn load(&self) -> Result<VectorField3D<T>> {
        match self {
            FieldHandle::Memory(f) => Ok(f.clone()),
            FieldHandle::File(p) => slf::read_field(p),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot<T: Scalar> {
    pub index: usize,
    pub time: T,
    pub diagnostics: Diagnostics<T>,
    pub field: Option<FieldHandle<T>>,
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RunStatus {
    Completed,
    /// The step produced a non-finite field; the timeline retains the last
    /// good snapshot.
    Unstable { time: f64, dt: f64 },
}

/// Time-ordered snapshot record of one run.
#[derive(Debug, Clone)]
pub struct Timeline<T: Scalar> {
    pub grid: GridSpec<T>,
    pub viscosity: T,
    pub status: RunStatus,
    snapshots: Vec<Snapshot<T>>,
}

impl<T: Scalar> Timeline<T> {
    pub fn new(grid: GridSpec<T>, viscosity: T) -> Self {
        Self { grid, viscosity, status: RunStatus::Completed, snapshots: Vec::new() }
    }

    pub fn push(&mut self, snapshot: Snapshot<T>) -> Result<()> {
        if let Some(last) = self.snapshots.last() {
            if snapshot.time <= last.time {
                return Err(Error::InvalidParameter(format!(
                    "snapshot times must be strictly increasing: {} after {}",
                    snapshot.time.to_f64_lossy(),
                    last.time.to_f64_lossy()
                )));
            }
        }
        self.snapshots.push(snapshot);
        Ok(())
    }

    pub fn snapshots(&self) -> &[Snapshot<T>] {
        &self.snapshots
    }

    pub fn linf_series(&self) -> Vec<(T, T)> {
        self.snapshots
            .iter()
            .map(|s| (s.time, s.diagnostics.omega_linf))
            .collect()
    }
}

/// Run configuration for [`evolve`].
#[derive(Debug, Clone, Copy)]
pub struct EvolveConfig<T: Scalar> {
    pub viscosity: T,
    pub t_final: T,
    /// Time between recorded snapshots; ≤ 0 records only start and end.
    pub snapshot_interval: T,
    pub cfl: CflConfig<T>,
    pub dealias: bool,
}

/// The integrator: FFT plans, wavenumber tables and scratch policy for a
/// fixed grid. One stepper drives one state at a time; steps are sequential.
pub struct Stepper<T: Scalar> {
    spectral: Spectral3<T>,
    k2_full: Vec<T>,
    dealias: bool,
}

impl<T: Scalar> Stepper<T> {
    pub fn new(grid: GridSpec<T>, dealias: bool) -> Self {
        let spectral = Spectral3::new(grid);
        let k = wavenumbers_full(&grid);
        let n = grid.n();
        let mut k2_full = vec![T::zero(); grid.cells()];
        let mut idx = 0;
        for z in 0..n {
            for y in 0..n {
                for x in 0..n {
                    k2_full[idx] = k[x] * k[x] + k[y] * k[y] + k[z] * k[z];
                    idx += 1;
                }
            }
        }
        Self { spectral, k2_full, dealias }
    }

    pub fn spectral(&self) -> &Spectral3<T> {
        &self.spectral
    }

    /// Nonlinear term `N(ω̂) = i k × dealias(F[u×ω])`; the curl keeps the
    /// result solenoidal to round-off.
    fn nonlinear(&self, grid: &GridSpec<T>, omega_hat: &[Vec<Complex<T>>; 3]) -> [Vec<Complex<T>>; 3] {
        let u_hat = velocity_hat_from_vorticity_hat(grid, omega_hat);
        let u = self.spectral.inverse_vector(&u_hat);
        let w = self.spectral.inverse_vector(omega_hat);
        let cells = grid.cells();
        let mut cross = VectorField3D::zeros(*grid);
        {
            let [uxs, uys, uzs] = u.components();
            let [wxs, wys, wzs] = w.components();
            let [cx, cy, cz] = cross.components_mut();
            for i in 0..cells {
                let (ux, uy, uz) = (uxs[i], uys[i], uzs[i]);
                let (wx, wy, wz) = (wxs[i], wys[i], wzs[i]);
                cx[i] = uy * wz - uz * wy;
                cy[i] = uz * wx - ux * wz;
                cz[i] = ux * wy - uy * wx;
            }
        }
        let mut cross_hat = self.spectral.forward_vector(&cross);
        if self.dealias {
            dealias_23(grid, &mut cross_hat);
        }
        curl_hat(grid, &cross_hat)
    }

    /// One integrating-factor RK4 step. Negative `dt` is accepted (used by
    /// inviscid time-reversal checks); with ν > 0 it amplifies and is the
    /// caller's responsibility.
    pub fn step(&self, state: &mut SimState<T>, dt: T) -> Result<()> {
        if dt == T::zero() || !dt.is_finite() {
            return Err(Error::InvalidParameter("dt must be nonzero and finite".into()));
        }
        let grid = state.grid;
        let nu = state.viscosity;
        let half = T::of(0.5);
        let sixth = T::of(1.0 / 6.0);
        let cells = grid.cells();

        // e^{−ν|k|² dt/2} and its square.
        let e_half: Vec<T> = self
            .k2_full
            .iter()
            .map(|&k2| (-nu * k2 * dt * half).exp())
            .collect();

        let v = &state.omega_hat;
        let a = self.nonlinear(&grid, v);

        let mut stage = new_hat(cells);
        for c in 0..3 {
            for i in 0..cells {
                stage[c][i] = (v[c][i] + a[c][i].scale(dt * half)).scale(e_half[i]);
            }
        }
        let b = self.nonlinear(&grid, &stage);

        for c in 0..3 {
            for i in 0..cells {
                stage[c][i] = v[c][i].scale(e_half[i]) + b[c][i].scale(dt * half);
            }
        }
        let cst = self.nonlinear(&grid, &stage);

        for c in 0..3 {
            for i in 0..cells {
                let e2 = e_half[i] * e_half[i];
                stage[c][i] = v[c][i].scale(e2) + (cst[c][i] * e_half[i]).scale(dt);
            }
        }
        let d = self.nonlinear(&grid, &stage);

        let mut next = new_hat(cells);
        for c in 0..3 {
            for i in 0..cells {
                let e1 = e_half[i];
                let e2 = e1 * e1;
                let incr = a[c][i].scale(e2)
                    + (b[c][i] + cst[c][i]).scale(T::of(2.0) * e1)
                    + d[c][i];
                next[c][i] = v[c][i].scale(e2) + incr.scale(dt * sixth);
            }
        }

        state.omega_hat = next;
        state.time += dt;
        if !state.is_finite() {
            return Err(Error::Instability {
                time: state.time.to_f64_lossy(),
                dt: dt.to_f64_lossy(),
            });
        }
        Ok(())
    }

    /// CFL-limited step size for the current state.
    pub fn cfl_dt(&self, state: &SimState<T>, cfg: &CflConfig<T>) -> T {
        let u_hat = velocity_hat_from_vorticity_hat(&state.grid, &state.omega_hat);
        let u = self.spectral.inverse_vector(&u_hat);
        let umax = u.linf_max_norm();
        let mut dt = advective_dt(state.grid.spacing(), umax, cfg.c_cfl).min(cfg.dt_max);
        if cfg.explicit_viscous && state.viscosity > T::zero() {
            let h = state.grid.spacing();
            dt = dt.min(h * h / (T::of(6.0) * state.viscosity));
        }
        dt
    }

    /// Diagnostics of the current state (one velocity inversion, one
    /// inverse transform).
    pub fn diagnostics(&self, state: &SimState<T>) -> Diagnostics<T> {
        let grid = &state.grid;
        let u_hat = velocity_hat_from_vorticity_hat(grid, &state.omega_hat);
        let energy = integral_sq_hat(grid, &u_hat) * T::of(0.5);
        let enstrophy = integral_sq_hat(grid, &state.omega_hat) * T::of(0.5);
        let helicity = integral_dot_hat(grid, &u_hat, &state.omega_hat);
        let omega = self.spectral.inverse_vector(&state.omega_hat);
        let dv = grid.cell_volume();
        let mut linf = T::zero();
        let mut l1 = T::zero();
        for i in 0..grid.cells() {
            let m = omega.max_norm_at(i);
            if m > linf {
                linf = m;
            }
            l1 += omega.euclid_at(i);
        }
        Diagnostics { energy, enstrophy, helicity, omega_linf: linf, omega_l1: l1 * dv }
    }
}

fn new_hat<T: Scalar>(cells: usize) -> [Vec<Complex<T>>; 3] {
    let zero = Complex::new(T::zero(), T::zero());
    [vec![zero; cells], vec![zero; cells], vec![zero; cells]]
}

/// Integrate from `initial` to `cfg.t_final`, recording diagnostics every
/// `cfg.snapshot_interval`. `keep` decides what to retain of each snapshot
/// field (and may persist it); on instability the error is recorded in
/// [`Timeline::status`] and the last good snapshot is kept.
pub fn evolve<T: Scalar>(
    initial: &VectorField3D<T>,
    cfg: &EvolveConfig<T>,
    mut keep: impl FnMut(usize, T, &VectorField3D<T>) -> Result<Option<FieldHandle<T>>>,
) -> Result<Timeline<T>> {
    let grid = *initial.grid();
    let stepper = Stepper::new(grid, cfg.dealias);
    let mut state = SimState::from_field(initial, cfg.viscosity, cfg.dealias)?;
    let mut timeline = Timeline::new(grid, cfg.viscosity);
    evolve_from(&stepper, &mut state, cfg, &mut timeline, &mut keep)?;
    Ok(timeline)
}

/// Continue an existing state, appending to `timeline`. Used by resume.
pub fn evolve_from<T: Scalar>(
    stepper: &Stepper<T>,
    state: &mut SimState<T>,
    cfg: &EvolveConfig<T>,
    timeline: &mut Timeline<T>,
    keep: &mut impl FnMut(usize, T, &VectorField3D<T>) -> Result<Option<FieldHandle<T>>>,
) -> Result<()> {
    fn record<T: Scalar>(
        stepper: &Stepper<T>,
        state: &SimState<T>,
        index: usize,
        timeline: &mut Timeline<T>,
        keep: &mut impl FnMut(usize, T, &VectorField3D<T>) -> Result<Option<FieldHandle<T>>>,
    ) -> Result<()> {
        let field = state.to_field(stepper.spectral());
        let diagnostics = stepper.diagnostics(state);
        let handle = keep(index, state.time, &field)?;
        timeline.push(Snapshot { index, time: state.time, diagnostics, field: handle })
    }

    let mut index = timeline.snapshots().len();
    if index == 0 {
        record(stepper, state, index, timeline, keep)?;
        index += 1;
    }
    if cfg.t_final <= state.time {
        return Ok(());
    }

    let interval = if cfg.snapshot_interval > T::zero() {
        cfg.snapshot_interval
    } else {
        cfg.t_final - state.time
    };
    let mut next_snap = state.time + interval;

    loop {
        let target = next_snap.min(cfg.t_final);
        // Guard against vanishing remainder steps from rounding, and snap
        // the clock onto the snapshot time afterwards.
        let eps = (target.abs() + T::one()) * T::of(1e-13);
        while target - state.time > eps {
            let dt = stepper.cfl_dt(state, &cfg.cfl).min(target - state.time);
            let before = state.time;
            if let Err(e) = stepper.step(state, dt) {
                timeline.status = RunStatus::Unstable {
                    time: before.to_f64_lossy(),
                    dt: dt.to_f64_lossy(),
                };
                return Err(e);
            }
        }
        state.time = target;
        record(stepper, state, index, timeline, keep)?;
        index += 1;
        if state.time >= cfg.t_final {
            break;
        }
        next_snap += interval;
    }
    Ok(())
}

/// Convenience wrapper keeping every snapshot field in memory.
pub fn evolve_in_memory<T: Scalar>(
    initial: &VectorField3D<T>,
    cfg: &EvolveConfig<T>,
) -> Result<Timeline<T>> {
    evolve(initial, cfg, |_, _, field| Ok(Some(FieldHandle::Memory(field.clone()))))
}

/// Analytic reference fields for oracle tests and contrast runs.
pub mod analytic {
    use super::*;

    /// Taylor–Green vorticity on a 2π-periodic box: the curl of
    /// `u = (sin x cos y cos z, −cos x sin y cos z, 0)`.
    pub fn taylor_green_vorticity<T: Scalar>(grid: &GridSpec<T>) -> VectorField3D<T> {
        let n = grid.n();
        let h = grid.spacing();
        let scale = T::of(2.0) * T::PI() / grid.box_length();
        let mut field = VectorField3D::zeros(*grid);
        for z in 0..n {
            for y in 0..n {
                for x in 0..n {
                    let (xs, ys, zs) = (
                        T::of(x as f64) * h * scale,
                        T::of(y as f64) * h * scale,
                        T::of(z as f64) * h * scale,
                    );
                    let idx = grid.index(x, y, z);
                    field.set(idx, [
                        -xs.cos() * ys.sin() * zs.sin() * scale,
                        -xs.sin() * ys.cos() * zs.sin() * scale,
                        T::of(2.0) * xs.sin() * ys.sin() * zs.cos() * scale,
                    ]);
                }
            }
        }
        field
    }

    /// Single-wavenumber ABC Beltrami vorticity `ω = κ u` with
    /// `curl u = κ u`, `κ = 2πk/L`. The nonlinear term vanishes identically,
    /// so under viscosity the field decays by exactly `exp(−νκ²t)`.
    pub fn abc_vorticity<T: Scalar>(
        grid: &GridSpec<T>,
        k: usize,
        a: T,
        b: T,
        c: T,
    ) -> VectorField3D<T> {
        let n = grid.n();
        let h = grid.spacing();
        let kappa = T::of(2.0) * T::PI() * T::of(k as f64) / grid.box_length();
        let mut field = VectorField3D::zeros(*grid);
        for z in 0..n {
            for y in 0..n {
                for x in 0..n {
                    let (xs, ys, zs) = (
                        T::of(x as f64) * h * kappa,
                        T::of(y as f64) * h * kappa,
                        T::of(z as f64) * h * kappa,
                    );
                    let idx = grid.index(x, y, z);
                    field.set(idx, [
                        kappa * (a * zs.sin() + c * ys.cos()),
                        kappa * (b * xs.sin() + a * zs.cos()),
                        kappa * (c * ys.sin() + b * xs.cos()),
                    ]);
                }
            }
        }
        field
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tau() -> f64 {
        2.0 * std::f64::consts::PI
    }

    #[test]
    fn zero_field_is_a_fixed_point() {
        let grid = GridSpec::new(8, tau()).unwrap();
        let stepper = Stepper::new(grid, true);
        let mut state =
            SimState::from_field(&VectorField3D::zeros(grid), 0.01, true).unwrap();
        stepper.step(&mut state, 0.1).unwrap();
        let field = state.to_field(stepper.spectral());
        assert_eq!(field.linf_max_norm(), 0.0);
        assert!((state.time - 0.1).abs() < 1e-15);
    }

    #[test]
    fn beltrami_mode_decays_exactly() {
        let grid = GridSpec::new(16, tau()).unwrap();
        let nu = 0.05;
        let k = 2usize;
        let omega0 = analytic::abc_vorticity(&grid, k, 1.0, 0.7, -0.4);
        let stepper = Stepper::new(grid, true);
        let mut state = SimState::from_field(&omega0, nu, true).unwrap();
        let dt = 0.02;
        let steps = 25;
        for _ in 0..steps {
            stepper.step(&mut state, dt).unwrap();
        }
        let decay = (-nu * (k as f64 * k as f64) * dt * steps as f64).exp();
        let field = state.to_field(stepper.spectral());
        let expect = omega0.scaled(decay);
        let scale = expect.linf_max_norm();
        let mut worst: f64 = 0.0;
        for c in 0..3 {
            for (a, b) in field.components()[c].iter().zip(expect.components()[c].iter()) {
                worst = worst.max((a - b).abs());
            }
        }
        assert!(worst <= 1e-6 * scale, "Beltrami decay error {worst} at scale {scale}");
    }

    #[test]
    fn advective_dt_arithmetic() {
        // n = 64, L = 2π, ‖u‖∞ = 1, C = 0.5 → 0.5·(2π/64) ≈ 0.04909.
        let dt = advective_dt(tau() / 64.0, 1.0, 0.5);
        assert!((dt - 0.049087385212340526).abs() < 1e-15);
        // Doubling ‖u‖∞ halves the candidate.
        assert!((advective_dt(tau() / 64.0, 2.0, 0.5) - dt / 2.0).abs() < 1e-15);
    }

    #[test]
    fn cfl_of_quiescent_state_is_dt_max() {
        let grid = GridSpec::new(8, tau()).unwrap();
        let stepper = Stepper::new(grid, true);
        let state = SimState::from_field(&VectorField3D::zeros(grid), 0.0, true).unwrap();
        let cfg = CflConfig { dt_max: 0.07, ..CflConfig::default() };
        assert_eq!(stepper.cfl_dt(&state, &cfg), 0.07);
        // With an explicit viscous term selected, the viscous limit applies.
        let state_nu = SimState::from_field(&VectorField3D::zeros(grid), 0.5, true).unwrap();
        let cfg_exp = CflConfig { dt_max: 1.0, explicit_viscous: true, ..CflConfig::default() };
        let h = grid.spacing();
        assert!((stepper.cfl_dt(&state_nu, &cfg_exp) - h * h / 3.0).abs() < 1e-15);
    }

    #[test]
    fn evolve_with_zero_final_time_records_one_snapshot() {
        let grid = GridSpec::new(8, tau()).unwrap();
        let omega = analytic::taylor_green_vorticity(&grid);
        let cfg = EvolveConfig {
            viscosity: 0.01,
            t_final: 0.0,
            snapshot_interval: 0.1,
            cfl: CflConfig::default(),
            dealias: true,
        };
        let timeline = evolve_in_memory(&omega, &cfg).unwrap();
        assert_eq!(timeline.snapshots().len(), 1);
        assert_eq!(timeline.status, RunStatus::Completed);
    }

    #[test]
    fn snapshots_stay_divergence_free() {
        let grid = GridSpec::new(16, tau()).unwrap();
        let omega = analytic::taylor_green_vorticity(&grid);
        let cfg = EvolveConfig {
            viscosity: 0.02,
            t_final: 0.2,
            snapshot_interval: 0.1,
            cfl: CflConfig::default(),
            dealias: true,
        };
        let timeline = evolve_in_memory(&omega, &cfg).unwrap();
        assert!(timeline.snapshots().len() >= 3);
        for snap in timeline.snapshots() {
            let field = snap.field.as_ref().unwrap().load().unwrap();
            let u = crate::grid::velocity_from_vorticity(&field).unwrap();
            assert!(crate::grid::relative_max_divergence(&u) <= 1e-10);
        }
    }

    #[test]
    fn timeline_rejects_non_increasing_times() {
        let grid = GridSpec::new(8, 1.0).unwrap();
        let mut tl: Timeline<f64> = Timeline::new(grid, 0.0);
        let diag = Diagnostics {
            energy: 0.0,
            enstrophy: 0.0,
            helicity: 0.0,
            omega_linf: 0.0,
            omega_l1: 0.0,
        };
        tl.push(Snapshot { index: 0, time: 0.0, diagnostics: diag, field: None }).unwrap();
        let again = tl.push(Snapshot { index: 1, time: 0.0, diagnostics: diag, field: None });
        assert!(again.is_err());
    }
}
