//! 3D summed-area tables (integral images) with periodic box sums.
//!
//! The table `S` has extent `(n+1)³` and `S[x,y,z] = Σ f[x',y',z']` over
//! `x' < x, y' < y, z' < z`, so any axis-aligned box sum costs eight
//! lookups. Periodic boxes are handled by splitting the wrapped box into
//! up to eight non-wrapped pieces.

use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct Sat3<T> {
    n: usize,
    table: Vec<T>,
}

impl<T: Scalar> Sat3<T> {
    /// Build from an `n³` x-fastest grid.
    pub fn build(n: usize, data: &[T]) -> Self {
        assert_eq!(data.len(), n * n * n);
        let m = n + 1;
        let mut table = vec![T::zero(); m * m * m];
        let ti = |x: usize, y: usize, z: usize| x + m * (y + m * z);
        for z in 0..n {
            for y in 0..n {
                let mut row = T::zero();
                for x in 0..n {
                    row += data[x + n * (y + n * z)];
                    table[ti(x + 1, y + 1, z + 1)] = row + table[ti(x + 1, y, z + 1)]
                        + table[ti(x + 1, y + 1, z)]
                        - table[ti(x + 1, y, z)];
                }
            }
        }
        Self { n, table }
    }

    /// Sum over the half-open box `[x0, x1) × [y0, y1) × [z0, z1)`,
    /// all bounds within `0..=n`.
    pub fn box_sum(&self, x0: usize, x1: usize, y0: usize, y1: usize, z0: usize, z1: usize) -> T {
        debug_assert!(x0 <= x1 && x1 <= self.n);
        debug_assert!(y0 <= y1 && y1 <= self.n);
        debug_assert!(z0 <= z1 && z1 <= self.n);
        let m = self.n + 1;
        let ti = |x: usize, y: usize, z: usize| x + m * (y + m * z);
        let t = &self.table;
        t[ti(x1, y1, z1)] - t[ti(x0, y1, z1)] - t[ti(x1, y0, z1)] - t[ti(x1, y1, z0)]
            + t[ti(x0, y0, z1)]
            + t[ti(x0, y1, z0)]
            + t[ti(x1, y0, z0)]
            - t[ti(x0, y0, z0)]
    }

    /// Sum over a periodically wrapped box of side lengths `(mx, my, mz)`
    /// starting at (possibly negative) `(x0, y0, z0)`. Sides must be ≤ n.
    pub fn periodic_box_sum(&self, start: [isize; 3], sides: [usize; 3]) -> T {
        let n = self.n as isize;
        let mut segs: [[(usize, usize); 2]; 3] = [[(0, 0); 2]; 3];
        let mut counts = [0usize; 3];
        for axis in 0..3 {
            debug_assert!(sides[axis] <= self.n);
            let s = start[axis].rem_euclid(n) as usize;
            let e = s + sides[axis];
            if e <= self.n {
                segs[axis][0] = (s, e);
                counts[axis] = 1;
            } else {
                segs[axis][0] = (s, self.n);
                segs[axis][1] = (0, e - self.n);
                counts[axis] = 2;
            }
        }
        let mut total = T::zero();
        for i in 0..counts[0] {
            for j in 0..counts[1] {
                for k in 0..counts[2] {
                    let (x0, x1) = segs[0][i];
                    let (y0, y1) = segs[1][j];
                    let (z0, z1) = segs[2][k];
                    total += self.box_sum(x0, x1, y0, y1, z0, z1);
                }
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn brute_periodic(n: usize, data: &[f64], start: [isize; 3], sides: [usize; 3]) -> f64 {
        let mut sum = 0.0;
        for dz in 0..sides[2] {
            for dy in 0..sides[1] {
                for dx in 0..sides[0] {
                    let x = (start[0] + dx as isize).rem_euclid(n as isize) as usize;
                    let y = (start[1] + dy as isize).rem_euclid(n as isize) as usize;
                    let z = (start[2] + dz as isize).rem_euclid(n as isize) as usize;
                    sum += data[x + n * (y + n * z)];
                }
            }
        }
        sum
    }

    #[test]
    fn matches_brute_force_on_integer_data() {
        let n = 8;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let data: Vec<f64> = (0..n * n * n).map(|_| rng.gen_range(0..5) as f64).collect();
        let sat = Sat3::build(n, &data);
        for _ in 0..200 {
            let start = [
                rng.gen_range(-8..16),
                rng.gen_range(-8..16),
                rng.gen_range(-8..16),
            ];
            let sides = [
                rng.gen_range(1..=n),
                rng.gen_range(1..=n),
                rng.gen_range(1..=n),
            ];
            let expect = brute_periodic(n, &data, start, sides);
            let got = sat.periodic_box_sum(start, sides);
            assert_eq!(got, expect, "start {start:?} sides {sides:?}");
        }
    }

    #[test]
    fn full_box_sum_is_total() {
        let n = 8;
        let data: Vec<f64> = (0..n * n * n).map(|i| i as f64).collect();
        let sat = Sat3::build(n, &data);
        let total: f64 = data.iter().sum();
        assert_eq!(sat.box_sum(0, n, 0, n, 0, n), total);
        assert_eq!(sat.periodic_box_sum([3, -2, 5], [n, n, n]), total);
    }
}
