//! Harmonic measure of slit sets on the real diameter of the unit disc.
//!
//! Three layers: the closed-form extremal value for the symmetric two-slit
//! set `K_α = [−1,−1+α] ∪ [1−α,1]`, a deterministic grid-Laplace (SOR)
//! estimator for arbitrary finite interval unions, and the maximum-principle
//! bound `u(z) ≤ m·h + M·(1−h)` those feed into. `solve_m` fixes the
//! `(M, λ)` pair from the identity `½h* + (1−h*)M = 1` at the sparseness
//! complement `α = 1 − (3/4)^{1/3}`.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A finite union of disjoint closed subintervals of `[−1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlitSet<T: Scalar> {
    intervals: Vec<(T, T)>,
}

impl<T: Scalar> SlitSet<T> {
    pub fn new(mut intervals: Vec<(T, T)>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidParameter("slit set needs at least one interval".into()));
        }
        intervals.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite endpoints"));
        let one = T::one();
        for &(a, b) in &intervals {
            if !(a.is_finite() && b.is_finite()) || a >= b {
                return Err(Error::InvalidParameter("intervals must be nondegenerate [a, b] with a < b".into()));
            }
            if a < -one || b > one {
                return Err(Error::InvalidParameter("intervals must lie within [−1, 1]".into()));
            }
        }
        for w in intervals.windows(2) {
            if w[0].1 >= w[1].0 {
                return Err(Error::InvalidParameter("intervals must be pairwise disjoint".into()));
            }
        }
        Ok(Self { intervals })
    }

    /// The extremal two-slit set with measure 2α (one slit at α = 1).
    pub fn k_alpha(alpha: T) -> Result<Self> {
        let one = T::one();
        if !(alpha > T::zero() && alpha <= one) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1], got {}",
                alpha.to_f64_lossy()
            )));
        }
        if alpha == one {
            Self::new(vec![(-one, one)])
        } else {
            Self::new(vec![(-one, -one + alpha), (one - alpha, one)])
        }
    }

    pub fn intervals(&self) -> &[(T, T)] {
        &self.intervals
    }

    /// Total length `|K| = 2α`.
    pub fn total_length(&self) -> T {
        self.intervals.iter().map(|&(a, b)| b - a).sum()
    }

    pub fn alpha(&self) -> T {
        self.total_length() * T::of(0.5)
    }

    pub fn contains(&self, x: T) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= x && x <= b)
    }

    /// Distance from `x` to the set.
    pub fn distance(&self, x: T) -> T {
        self.intervals
            .iter()
            .map(|&(a, b)| {
                if x < a {
                    a - x
                } else if x > b {
                    x - b
                } else {
                    T::zero()
                }
            })
            .fold(T::infinity(), T::min)
    }
}

/// Random disjoint interval union with total length `2α`, each interval at
/// least `min_len` long. Deterministic given the RNG state.
pub fn random_slits<T: Scalar, R: Rng>(
    alpha: T,
    max_intervals: usize,
    min_len: T,
    rng: &mut R,
) -> Result<SlitSet<T>> {
    let two_alpha = alpha * T::of(2.0);
    let free = T::of(2.0) - two_alpha;
    if free < T::zero() {
        return Err(Error::InvalidParameter("alpha must be ≤ 1".into()));
    }
    let max_by_len = (two_alpha / min_len).to_f64_lossy().floor() as usize;
    let m = rng.gen_range(1..=max_intervals.min(max_by_len).max(1));

    // Split 2α into m lengths ≥ min_len and 2−2α into m+1 gaps.
    let weights = |rng: &mut R, count: usize| -> Vec<T> {
        let raw: Vec<T> = (0..count).map(|_| T::of(rng.gen_range(0.05..1.0))).collect();
        let total: T = raw.iter().copied().sum();
        raw.into_iter().map(|w| w / total).collect()
    };
    let spare = (two_alpha - min_len * T::of(m as f64)).max(T::zero());
    let lengths: Vec<T> = weights(rng, m).into_iter().map(|w| min_len + w * spare).collect();
    let gaps: Vec<T> = weights(rng, m + 1).into_iter().map(|w| w * free).collect();

    let mut intervals = Vec::with_capacity(m);
    let mut cursor = -T::one();
    for i in 0..m {
        cursor += gaps[i];
        let a = cursor;
        cursor += lengths[i];
        intervals.push((a, cursor.min(T::one())));
    }
    SlitSet::new(intervals)
}

/// Solynin's closed form `h(0, 𝔻, K_α) = (2/π)·asin[(1−(1−α)²)/(1+(1−α)²)]`,
/// strictly increasing on (0, 1].
pub fn solynin_h<T: Scalar>(alpha: T) -> Result<T> {
    if !(alpha > T::zero() && alpha <= T::one()) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1], got {}",
            alpha.to_f64_lossy()
        )));
    }
    let q = (T::one() - alpha) * (T::one() - alpha);
    let ratio = (T::one() - q) / (T::one() + q);
    Ok(T::of(2.0) / T::PI() * ratio.asin())
}

/// The `(M, h*, λ)` triple fixed by `½h* + (1−h*)M = 1` with
/// `h* = h(0, 𝔻, K_{α*})` at `α* = 1 − (3/4)^{1/3}`, and `λ = 1/(2M)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MSolution<T: Scalar> {
    pub m: T,
    pub h_star: T,
    pub lambda: T,
}

/// Solve the fixed point for a given `h*` (exposed for limit studies).
pub fn solve_m_for<T: Scalar>(h_star: T) -> Result<MSolution<T>> {
    if !(h_star >= T::zero() && h_star < T::one()) {
        return Err(Error::InvalidParameter("h* must lie in [0, 1)".into()));
    }
    let m = (T::one() - h_star * T::of(0.5)) / (T::one() - h_star);
    Ok(MSolution { m, h_star, lambda: T::one() / (T::of(2.0) * m) })
}

/// The framework constants: `M ≈ 1.032455`, `h* ≈ 0.060953`, `λ ≈ 0.484283`.
pub fn solve_m<T: Scalar>() -> MSolution<T> {
    let alpha_star = T::one() - T::of(0.75).powf(T::one() / T::of(3.0));
    let h_star = solynin_h(alpha_star).expect("alpha* in domain");
    solve_m_for(h_star).expect("h* in domain")
}

/// Maximum principle bound `m·h + M·(1−h)`, decreasing in `h` when `m < M`.
pub fn hmmp_bound<T: Scalar>(m: T, m_big: T, h: T) -> Result<T> {
    if !(h >= T::zero() && h <= T::one()) {
        return Err(Error::InvalidParameter(format!(
            "harmonic measure must lie in [0, 1], got {}",
            h.to_f64_lossy()
        )));
    }
    if m > m_big {
        return Err(Error::InvalidParameter("need m ≤ M in the maximum principle".into()));
    }
    Ok(m * h + m_big * (T::one() - h))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HmMethod {
    ClosedForm,
    GridLaplace,
}

/// Result of a harmonic-measure evaluation at the origin.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HmResult<T: Scalar> {
    pub value: T,
    pub method: HmMethod,
    pub grid_n: Option<usize>,
    pub residual: Option<f64>,
    pub iterations: Option<usize>,
}

/// Harmonic measure `h(0, 𝔻∖K, K)` by a 5-point SOR Laplace solve on a
/// Cartesian grid over `[−1,1]²`: value 1 on nodes within half a cell of
/// the slit (both sides see the pinned row), 0 on every node outside the
/// open disc. If `0 ∈ K` the answer is exactly 1.
pub fn harmonic_measure_numeric<T: Scalar>(k: &SlitSet<T>, grid_n: usize) -> Result<HmResult<T>> {
    if grid_n < 128 || grid_n % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "grid_n must be even and ≥ 128, got {grid_n}"
        )));
    }
    let h = 2.0 / grid_n as f64;
    for &(a, b) in k.intervals() {
        if (b - a).to_f64_lossy() < 2.0 * h {
            return Err(Error::InvalidParameter(format!(
                "interval [{}, {}] spans fewer than 2 grid cells at grid_n = {grid_n}",
                a.to_f64_lossy(),
                b.to_f64_lossy()
            )));
        }
    }
    if k.contains(T::zero()) {
        return Ok(HmResult {
            value: T::one(),
            method: HmMethod::ClosedForm,
            grid_n: None,
            residual: None,
            iterations: None,
        });
    }

    // Node classification. Solved in f64 regardless of T: the linear system
    // is identical and the extremal-property tolerances assume f64 sweeps.
    let n = grid_n + 1;
    let coord = |i: usize| -> f64 { -1.0 + h * i as f64 };
    const FREE: u8 = 0;
    const ZERO: u8 = 1;
    const ONE: u8 = 2;
    let mut kind = vec![FREE; n * n];
    let mut u = vec![0.0f64; n * n];
    for j in 0..n {
        let y = coord(j);
        for i in 0..n {
            let x = coord(i);
            let idx = i + n * j;
            if x * x + y * y >= 1.0 {
                kind[idx] = ZERO;
            } else if y == 0.0 && k.distance(T::of(x)).to_f64_lossy() <= h / 2.0 {
                kind[idx] = ONE;
                u[idx] = 1.0;
            }
        }
    }

    let omega = 2.0 / (1.0 + (std::f64::consts::PI * h / 2.0).sin());
    let tol = 1e-8;
    let max_sweeps = 60 * grid_n;
    let mut residual = f64::INFINITY;
    let mut sweeps = 0;
    while sweeps < max_sweeps {
        let mut max_update = 0.0f64;
        for j in 1..n - 1 {
            for i in 1..n - 1 {
                let idx = i + n * j;
                if kind[idx] != FREE {
                    continue;
                }
                let gs = 0.25 * (u[idx - 1] + u[idx + 1] + u[idx - n] + u[idx + n]);
                let update = omega * (gs - u[idx]);
                u[idx] += update;
                let a = update.abs();
                if a > max_update {
                    max_update = a;
                }
            }
        }
        sweeps += 1;
        residual = max_update;
        if residual < tol {
            break;
        }
    }
    if residual >= tol {
        return Err(Error::Convergence { iterations: sweeps, residual });
    }

    let center = grid_n / 2;
    Ok(HmResult {
        value: T::of(u[center + n * center]),
        method: HmMethod::GridLaplace,
        grid_n: Some(grid_n),
        residual: Some(residual),
        iterations: Some(sweeps),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn solynin_full_slit_is_one() {
        assert_eq!(solynin_h(1.0f64).unwrap(), 1.0);
    }

    #[test]
    fn solynin_half_matches_hand_value() {
        // (1−0.25)/(1+0.25) = 0.6, asin 0.6 = 0.6435011087932844.
        let h = solynin_h(0.5f64).unwrap();
        let expect = 2.0 / std::f64::consts::PI * 0.6435011087932844;
        assert!((h - expect).abs() < 1e-14);
        assert!((h - 0.4096655293982669).abs() < 1e-12);
    }

    #[test]
    fn solynin_rejects_out_of_domain() {
        assert!(solynin_h(0.0f64).is_err());
        assert!(solynin_h(1.5f64).is_err());
    }

    #[test]
    fn solynin_vanishes_at_zero() {
        assert!(solynin_h(1e-6f64).unwrap() < 1e-3);
    }

    #[test]
    fn solve_m_satisfies_identity_and_expected_values() {
        let sol = solve_m::<f64>();
        let identity = 0.5 * sol.h_star + (1.0 - sol.h_star) * sol.m - 1.0;
        assert!(identity.abs() <= 1e-12, "identity residual {identity}");
        assert!(sol.m > 1.0);
        assert!((sol.h_star - 0.060953).abs() < 1e-5);
        assert!((sol.m - 1.032455).abs() < 1e-5);
        assert!((sol.lambda - 0.484283).abs() < 1e-5);
    }

    #[test]
    fn solve_m_limit_case() {
        let sol = solve_m_for(1e-12f64).unwrap();
        assert!((sol.m - 1.0).abs() < 1e-11);
        assert!((sol.lambda - 0.5).abs() < 1e-11);
    }

    #[test]
    fn hmmp_endpoints() {
        assert_eq!(hmmp_bound(0.5f64, 2.0, 1.0).unwrap(), 0.5);
        assert_eq!(hmmp_bound(0.5f64, 2.0, 0.0).unwrap(), 2.0);
        assert!(hmmp_bound(0.5f64, 2.0, 1.5).is_err());
        assert!(hmmp_bound(3.0f64, 2.0, 0.5).is_err());
    }

    #[test]
    fn hmmp_closes_the_fixed_point() {
        // (m, M, h) = (½, M, h*) is Eq. (M): the bound is exactly 1.
        let sol = solve_m::<f64>();
        let bound = hmmp_bound(0.5, sol.m, sol.h_star).unwrap();
        assert!((bound - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn slit_set_validation() {
        assert!(SlitSet::new(vec![(0.2f64, 0.1)]).is_err());
        assert!(SlitSet::new(vec![(-1.5f64, 0.0)]).is_err());
        assert!(SlitSet::new(vec![(-0.5f64, 0.0), (0.0, 0.5)]).is_err());
        let k = SlitSet::new(vec![(0.3f64, 0.5), (-0.5, -0.3)]).unwrap();
        assert!((k.total_length() - 0.4).abs() < 1e-15);
        assert!(k.contains(0.4));
        assert!(!k.contains(0.0));
        assert!((k.distance(0.0) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn numeric_origin_in_k_is_exact() {
        let k = SlitSet::k_alpha(1.0f64).unwrap();
        let r = harmonic_measure_numeric(&k, 128).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.method, HmMethod::ClosedForm);
    }

    #[test]
    fn numeric_matches_closed_form_at_modest_grid() {
        let alpha = 0.5f64;
        let k = SlitSet::k_alpha(alpha).unwrap();
        let r = harmonic_measure_numeric(&k, 256).unwrap();
        let exact = solynin_h(alpha).unwrap();
        assert!(
            (r.value - exact).abs() <= 0.02 * exact,
            "numeric {} vs closed form {exact}",
            r.value
        );
    }

    #[test]
    fn random_slits_have_requested_measure() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let k = random_slits(0.25f64, 4, 0.02, &mut rng).unwrap();
            assert!((k.total_length() - 0.5).abs() < 1e-12);
            for w in k.intervals().windows(2) {
                assert!(w[0].1 < w[1].0);
            }
        }
    }
}
