//! 3D FFT transforms on the periodic box and the spectral vector calculus
//! built on them: wavenumbers, curl, divergence, solenoidal projection and
//! Biot–Savart inversion.
//!
//! Conventions: the forward transform is unnormalized, the inverse carries
//! the `1/n³` factor. Derivative symbols zero the Nyquist index `n/2` so
//! that differentiating a real field stays conjugate-symmetric; the
//! diffusion symbol keeps the full `|k|²` (damping the Nyquist mode is
//! physical). Modes with zero derivative wavenumber are treated as
//! unresolved by the inverse-curl.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, VectorField3D};
use crate::scalar::Scalar;

/// Cached FFT plans for one grid size, plus the grid metadata.
///
/// Cloning is cheap (the plans are reference counted); a clone may be used
/// from another thread.
#[derive(Clone)]
pub struct Spectral3<T: Scalar> {
    grid: GridSpec<T>,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
}

impl<T: Scalar> Spectral3<T> {
    pub fn new(grid: GridSpec<T>) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(grid.n());
        let inv = planner.plan_fft_inverse(grid.n());
        Self { grid, fwd, inv }
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    /// Forward transform of a real scalar grid (unnormalized).
    pub fn forward_scalar(&self, data: &[T]) -> Vec<Complex<T>> {
        let mut buf: Vec<Complex<T>> = data.iter().map(|&v| Complex::new(v, T::zero())).collect();
        self.fft3_inplace(&mut buf, false);
        buf
    }

    /// Inverse transform, normalized, discarding the imaginary residue.
    pub fn inverse_scalar(&self, hat: &[Complex<T>]) -> Vec<T> {
        let mut buf = hat.to_vec();
        self.fft3_inplace(&mut buf, true);
        let norm = T::one() / T::of(self.grid.cells() as f64);
        buf.iter().map(|c| c.re * norm).collect()
    }

    pub fn forward_vector(&self, field: &VectorField3D<T>) -> [Vec<Complex<T>>; 3] {
        let [x, y, z] = field.components();
        let mut out = [
            x.iter().map(|&v| Complex::new(v, T::zero())).collect::<Vec<_>>(),
            y.iter().map(|&v| Complex::new(v, T::zero())).collect::<Vec<_>>(),
            z.iter().map(|&v| Complex::new(v, T::zero())).collect::<Vec<_>>(),
        ];
        out.par_iter_mut()
            .for_each(|comp| self.fft3_inplace(comp, false));
        out
    }

    pub fn inverse_vector(&self, hat: &[Vec<Complex<T>>; 3]) -> VectorField3D<T> {
        let norm = T::one() / T::of(self.grid.cells() as f64);
        let mut bufs: Vec<Vec<Complex<T>>> = hat.to_vec();
        bufs.par_iter_mut()
            .for_each(|comp| self.fft3_inplace(comp, true));
        let comps = bufs
            .into_iter()
            .map(|b| b.iter().map(|c| c.re * norm).collect::<Vec<T>>())
            .collect::<Vec<_>>();
        let [x, y, z]: [Vec<T>; 3] = comps.try_into().expect("three components");
        VectorField3D::from_components_unchecked(self.grid, [x, y, z])
    }

    /// In-place 3D FFT via three axis passes.
    pub fn fft3_inplace(&self, data: &mut [Complex<T>], inverse: bool) {
        let n = self.grid.n();
        assert_eq!(data.len(), n * n * n, "buffer does not match grid");
        let fft = if inverse { &self.inv } else { &self.fwd };

        // x: lines are contiguous, let the plan batch whole planes.
        data.par_chunks_mut(n * n).for_each_init(
            || vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()],
            |scratch, plane| fft.process_with_scratch(plane, scratch),
        );

        // y: stride n, independent within each z-plane.
        data.par_chunks_mut(n * n).for_each_init(
            || LineBuf::new(fft.as_ref(), n),
            |buf, plane| {
                for x in 0..n {
                    buf.run_strided(fft.as_ref(), &mut plane[x..], n);
                }
            },
        );

        // z: stride n², parallel over x-columns.
        let n2 = n * n;
        let ptr = SendPtr(data.as_mut_ptr());
        (0..n2).into_par_iter().for_each_init(
            || LineBuf::new(fft.as_ref(), n),
            |buf, xy| {
                // Disjoint lines: column (x, y) touches offsets xy + j*n² only.
                let slice =
                    unsafe { std::slice::from_raw_parts_mut(ptr.get().add(xy), n2 * n - xy) };
                buf.run_strided(fft.as_ref(), slice, n2);
            },
        );
    }
}

struct SendPtr<T>(*mut T);
unsafe impl<T> Send for SendPtr<T> {}
unsafe impl<T> Sync for SendPtr<T> {}

impl<T> SendPtr<T> {
    fn get(&self) -> *mut T {
        self.0
    }
}

struct LineBuf<T: Scalar> {
    line: Vec<Complex<T>>,
    scratch: Vec<Complex<T>>,
}

impl<T: Scalar> LineBuf<T> {
    fn new(fft: &dyn Fft<T>, n: usize) -> Self {
        Self {
            line: vec![Complex::new(T::zero(), T::zero()); n],
            scratch: vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()],
        }
    }

    fn run_strided(&mut self, fft: &dyn Fft<T>, data: &mut [Complex<T>], stride: usize) {
        for (i, slot) in self.line.iter_mut().enumerate() {
            *slot = data[i * stride];
        }
        fft.process_with_scratch(&mut self.line, &mut self.scratch);
        for (i, &v) in self.line.iter().enumerate() {
            data[i * stride] = v;
        }
    }
}

/// Derivative wavenumbers `2π/L · ĵ` with the Nyquist index mapped to zero.
pub fn wavenumbers_deriv<T: Scalar>(grid: &GridSpec<T>) -> Vec<T> {
    let n = grid.n();
    let scale = T::of(2.0) * T::PI() / grid.box_length();
    (0..n)
        .map(|j| {
            let idx = if j < n / 2 {
                j as i64
            } else if j == n / 2 {
                0
            } else {
                j as i64 - n as i64
            };
            scale * T::of(idx as f64)
        })
        .collect()
}

/// Full-magnitude wavenumbers for the diffusion symbol (Nyquist kept).
pub fn wavenumbers_full<T: Scalar>(grid: &GridSpec<T>) -> Vec<T> {
    let n = grid.n();
    let scale = T::of(2.0) * T::PI() / grid.box_length();
    (0..n)
        .map(|j| {
            let idx = if j <= n / 2 { j as i64 } else { j as i64 - n as i64 };
            scale * T::of(idx as f64)
        })
        .collect()
}

#[inline]
pub(crate) fn wave_at<T: Scalar>(k: &[T], idx: usize) -> T {
    k[idx]
}

/// Iterate over all modes, calling `f(flat_index, kx, ky, kz)`.
pub fn for_each_mode<T: Scalar>(grid: &GridSpec<T>, k: &[T], mut f: impl FnMut(usize, T, T, T)) {
    let n = grid.n();
    let mut idx = 0;
    for z in 0..n {
        let kz = wave_at(k, z);
        for y in 0..n {
            let ky = wave_at(k, y);
            for x in 0..n {
                f(idx, wave_at(k, x), ky, kz);
                idx += 1;
            }
        }
    }
}

/// Make the spectrum solenoidal: `ω̂ ← ω̂ − k (k·ω̂)/|k|²`. The mean mode is
/// zeroed (periodic compatibility).
pub fn project_solenoidal<T: Scalar>(grid: &GridSpec<T>, hat: &mut [Vec<Complex<T>>; 3]) {
    let k = wavenumbers_deriv(grid);
    let n = grid.n();
    let zero = Complex::new(T::zero(), T::zero());
    let mut idx = 0;
    for z in 0..n {
        for y in 0..n {
            for x in 0..n {
                let (kx, ky, kz) = (k[x], k[y], k[z]);
                let k2 = kx * kx + ky * ky + kz * kz;
                if k2 == T::zero() {
                    if x == 0 && y == 0 && z == 0 {
                        hat[0][idx] = zero;
                        hat[1][idx] = zero;
                        hat[2][idx] = zero;
                    }
                    idx += 1;
                    continue;
                }
                let dot = hat[0][idx] * kx + hat[1][idx] * ky + hat[2][idx] * kz;
                let factor = dot / k2;
                hat[0][idx] -= factor * kx;
                hat[1][idx] -= factor * ky;
                hat[2][idx] -= factor * kz;
                idx += 1;
            }
        }
    }
}

/// Spectral curl: `(∇×f)^ = i k × f̂`.
pub fn curl_hat<T: Scalar>(grid: &GridSpec<T>, hat: &[Vec<Complex<T>>; 3]) -> [Vec<Complex<T>>; 3] {
    let k = wavenumbers_deriv(grid);
    let len = grid.cells();
    let zero = Complex::new(T::zero(), T::zero());
    let mut out = [vec![zero; len], vec![zero; len], vec![zero; len]];
    for_each_mode(grid, &k, |idx, kx, ky, kz| {
        // curl = i (ky fz − kz fy, kz fx − kx fz, kx fy − ky fx)
        let i = Complex::new(T::zero(), T::one());
        let (fx, fy, fz) = (hat[0][idx], hat[1][idx], hat[2][idx]);
        out[0][idx] = i * (fz * ky - fy * kz);
        out[1][idx] = i * (fx * kz - fz * kx);
        out[2][idx] = i * (fy * kx - fx * ky);
    });
    out
}

/// Biot–Savart inversion: `û = i k × ω̂ / |k|²`, zero mean mode, applied to
/// the solenoidal part of `ω̂`.
pub fn velocity_hat_from_vorticity_hat<T: Scalar>(
    grid: &GridSpec<T>,
    omega_hat: &[Vec<Complex<T>>; 3],
) -> [Vec<Complex<T>>; 3] {
    let k = wavenumbers_deriv(grid);
    let len = grid.cells();
    let zero = Complex::new(T::zero(), T::zero());
    let mut out = [vec![zero; len], vec![zero; len], vec![zero; len]];
    for_each_mode(grid, &k, |idx, kx, ky, kz| {
        let k2 = kx * kx + ky * ky + kz * kz;
        if k2 == T::zero() {
            return;
        }
        let (wx, wy, wz) = (omega_hat[0][idx], omega_hat[1][idx], omega_hat[2][idx]);
        // Solenoidal part of ω̂ (projection commutes with the cross product
        // here, since k × k = 0; applying it keeps curl û = P ω̂ exact).
        let i_over_k2 = Complex::new(T::zero(), T::one() / k2);
        out[0][idx] = i_over_k2 * (wz * ky - wy * kz);
        out[1][idx] = i_over_k2 * (wx * kz - wz * kx);
        out[2][idx] = i_over_k2 * (wy * kx - wx * ky);
    });
    out
}

/// Max-magnitude of the spectral divergence evaluated on the grid.
pub fn max_divergence<T: Scalar>(
    spectral: &Spectral3<T>,
    hat: &[Vec<Complex<T>>; 3],
) -> T {
    let grid = spectral.grid();
    let k = wavenumbers_deriv(grid);
    let len = grid.cells();
    let mut div = vec![Complex::new(T::zero(), T::zero()); len];
    for_each_mode(grid, &k, |idx, kx, ky, kz| {
        let i = Complex::new(T::zero(), T::one());
        div[idx] = i * (hat[0][idx] * kx + hat[1][idx] * ky + hat[2][idx] * kz);
    });
    let mut buf = div;
    spectral.fft3_inplace(&mut buf, true);
    let norm = T::one() / T::of(grid.cells() as f64);
    buf.iter()
        .map(|c| (c.re * norm).abs())
        .fold(T::zero(), T::max)
}

/// Zero all modes with any axis index above the 2/3 cutoff `⌊n/3⌋`.
pub fn dealias_23<T: Scalar>(grid: &GridSpec<T>, hat: &mut [Vec<Complex<T>>; 3]) {
    let n = grid.n();
    let cutoff = n / 3;
    let keep = |j: usize| -> bool {
        let idx = if j <= n / 2 { j as i64 } else { j as i64 - n as i64 };
        idx.unsigned_abs() as usize <= cutoff
    };
    let zero = Complex::new(T::zero(), T::zero());
    let mut idx = 0;
    for z in 0..n {
        let kz = keep(z);
        for y in 0..n {
            let kyz = kz && keep(y);
            for x in 0..n {
                if !(kyz && keep(x)) {
                    hat[0][idx] = zero;
                    hat[1][idx] = zero;
                    hat[2][idx] = zero;
                }
                idx += 1;
            }
        }
    }
}

/// `∫ |f|² dV` from an unnormalized spectrum (Parseval).
pub fn integral_sq_hat<T: Scalar>(grid: &GridSpec<T>, hat: &[Vec<Complex<T>>; 3]) -> T {
    let cells = T::of(grid.cells() as f64);
    let vol = grid.box_length().powi(3);
    let sum: T = hat
        .iter()
        .map(|comp| comp.iter().map(|c| c.norm_sqr()).sum::<T>())
        .sum();
    sum * vol / (cells * cells)
}

/// `∫ f·g dV` for two real vector fields given by unnormalized spectra.
pub fn integral_dot_hat<T: Scalar>(
    grid: &GridSpec<T>,
    f: &[Vec<Complex<T>>; 3],
    g: &[Vec<Complex<T>>; 3],
) -> T {
    let cells = T::of(grid.cells() as f64);
    let vol = grid.box_length().powi(3);
    let mut sum = T::zero();
    for c in 0..3 {
        for (a, b) in f[c].iter().zip(g[c].iter()) {
            sum += a.re * b.re + a.im * b.im;
        }
    }
    sum * vol / (cells * cells)
}

/// `∫ |∇f|² dV` from an unnormalized spectrum.
pub fn integral_grad_sq_hat<T: Scalar>(grid: &GridSpec<T>, hat: &[Vec<Complex<T>>; 3]) -> T {
    let k = wavenumbers_deriv(grid);
    let cells = T::of(grid.cells() as f64);
    let vol = grid.box_length().powi(3);
    let mut sum = T::zero();
    for_each_mode(grid, &k, |idx, kx, ky, kz| {
        let k2 = kx * kx + ky * ky + kz * kz;
        let m = hat[0][idx].norm_sqr() + hat[1][idx].norm_sqr() + hat[2][idx].norm_sqr();
        sum += k2 * m;
    });
    sum * vol / (cells * cells)
}

/// Reject fields with NaN/Inf before they enter a transform.
pub fn ensure_finite<T: Scalar>(field: &VectorField3D<T>, what: &str) -> Result<()> {
    if field.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("{what} contains NaN or Inf")))
    }
}
