//! Complex discrete Fourier transforms over the packed `n³` mode cube.
//!
//! Power-of-two line lengths use an iterative radix-2 kernel; other even
//! lengths fall back to a direct O(n²) summation, which is plenty at desk
//! resolutions. Neither direction normalizes; callers attach the `1/n³`
//! factor where the forward transform is meant to produce amplitudes.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex;

type C64 = Complex<f64>;

/// Transform plan for one line length `n`, applied along all three axes of
/// a packed cube.
pub struct Fourier {
    n: usize,
    /// Bit-reversal permutation; empty when `n` is not a power of two.
    bitrev: Vec<u32>,
    /// Forward stage twiddles `exp(-2πi j/n)`, `j < n/2` (radix-2 path)
    /// or the full forward root table `exp(-2πi j/n)`, `j < n` (direct path).
    roots_fwd: Vec<C64>,
    roots_inv: Vec<C64>,
}

fn root_table(n: usize, sign: f64, len: usize) -> Vec<C64> {
    (0..len)
        .map(|j| {
            let angle = sign * TAU * j as f64 / n as f64;
            Complex::new(libm::cos(angle), libm::sin(angle))
        })
        .collect()
}

impl Fourier {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "transform length must be at least 2");
        if n.is_power_of_two() {
            let bits = n.trailing_zeros();
            let bitrev = (0..n as u32)
                .map(|i| i.reverse_bits() >> (32 - bits))
                .collect();
            Fourier {
                n,
                bitrev,
                roots_fwd: root_table(n, -1.0, n / 2),
                roots_inv: root_table(n, 1.0, n / 2),
            }
        } else {
            Fourier {
                n,
                bitrev: Vec::new(),
                roots_fwd: root_table(n, -1.0, n),
                roots_inv: root_table(n, 1.0, n),
            }
        }
    }

    fn line(&self, buf: &mut [C64], scratch: &mut [C64], inverse: bool) {
        if self.bitrev.is_empty() {
            self.dft_line(buf, scratch, inverse);
        } else {
            self.radix2_line(buf, inverse);
        }
    }

    fn radix2_line(&self, buf: &mut [C64], inverse: bool) {
        let n = self.n;
        let tw = if inverse { &self.roots_inv } else { &self.roots_fwd };
        for i in 0..n {
            let j = self.bitrev[i] as usize;
            if j > i {
                buf.swap(i, j);
            }
        }
        let mut half = 1;
        let mut step = n / 2;
        while half < n {
            let len = half * 2;
            for start in (0..n).step_by(len) {
                let mut t = 0;
                for off in start..start + half {
                    let a = buf[off];
                    let b = buf[off + half] * tw[t];
                    buf[off] = a + b;
                    buf[off + half] = a - b;
                    t += step;
                }
            }
            half = len;
            step /= 2;
        }
    }

    fn dft_line(&self, buf: &mut [C64], scratch: &mut [C64], inverse: bool) {
        let n = self.n;
        let roots = if inverse { &self.roots_inv } else { &self.roots_fwd };
        for (k, out) in scratch.iter_mut().enumerate() {
            let mut acc = Complex::new(0.0, 0.0);
            for (j, v) in buf.iter().enumerate() {
                acc += v * roots[(j * k) % n];
            }
            *out = acc;
        }
        buf.copy_from_slice(scratch);
    }

    /// Unnormalized transform of a packed `n³` cube along all three axes.
    pub fn transform_cube(&self, data: &mut [C64], inverse: bool) {
        let n = self.n;
        assert_eq!(data.len(), n * n * n, "cube length must be n^3");
        let mut line = vec![Complex::new(0.0, 0.0); n];
        let mut scratch = vec![Complex::new(0.0, 0.0); n];

        // Axis 2: contiguous lines.
        for chunk in data.chunks_exact_mut(n) {
            self.line(chunk, &mut scratch, inverse);
        }
        // Axis 1: stride n.
        for i in 0..n {
            for l in 0..n {
                let base = i * n * n + l;
                for j in 0..n {
                    line[j] = data[base + j * n];
                }
                self.line(&mut line, &mut scratch, inverse);
                for j in 0..n {
                    data[base + j * n] = line[j];
                }
            }
        }
        // Axis 0: stride n².
        for j in 0..n {
            for l in 0..n {
                let base = j * n + l;
                for i in 0..n {
                    line[i] = data[base + i * n * n];
                }
                self.line(&mut line, &mut scratch, inverse);
                for i in 0..n {
                    data[base + i * n * n] = line[i];
                }
            }
        }
    }

    pub fn forward_cube(&self, data: &mut [C64]) {
        self.transform_cube(data, false);
    }

    pub fn inverse_cube(&self, data: &mut [C64]) {
        self.transform_cube(data, true);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(input: &[C64], inverse: bool) -> Vec<C64> {
        let n = input.len();
        let sign = if inverse { 1.0 } else { -1.0 };
        (0..n)
            .map(|k| {
                let mut acc = Complex::new(0.0, 0.0);
                for (j, v) in input.iter().enumerate() {
                    let angle = sign * TAU * (j * k) as f64 / n as f64;
                    acc += v * Complex::new(angle.cos(), angle.sin());
                }
                acc
            })
            .collect()
    }

    fn pseudo_random_line(n: usize, seed: u64) -> Vec<C64> {
        let mut state = seed;
        (0..n)
            .map(|_| {
                let mut next = || {
                    state = state
                        .wrapping_mul(6364136223846793005)
                        .wrapping_add(1442695040888963407);
                    (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
                };
                Complex::new(next(), next())
            })
            .collect()
    }

    #[test]
    fn radix2_matches_naive_dft() {
        for &n in &[2usize, 4, 8, 16, 32] {
            let plan = Fourier::new(n);
            let input = pseudo_random_line(n, 42 + n as u64);
            let mut buf = input.clone();
            let mut scratch = vec![Complex::new(0.0, 0.0); n];
            plan.line(&mut buf, &mut scratch, false);
            let want = naive_dft(&input, false);
            for (a, b) in buf.iter().zip(&want) {
                assert!((a - b).norm() < 1e-11 * n as f64, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn direct_path_matches_naive_dft() {
        for &n in &[6usize, 10, 12] {
            let plan = Fourier::new(n);
            let input = pseudo_random_line(n, 7 + n as u64);
            let mut buf = input.clone();
            let mut scratch = vec![Complex::new(0.0, 0.0); n];
            plan.line(&mut buf, &mut scratch, true);
            let want = naive_dft(&input, true);
            for (a, b) in buf.iter().zip(&want) {
                assert!((a - b).norm() < 1e-11 * n as f64, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn cube_round_trip_is_identity_up_to_volume() {
        for &n in &[4usize, 6, 8] {
            let plan = Fourier::new(n);
            let input: Vec<C64> = pseudo_random_line(n * n * n, 3 * n as u64);
            let mut data = input.clone();
            plan.forward_cube(&mut data);
            plan.inverse_cube(&mut data);
            let scale = (n * n * n) as f64;
            for (a, b) in data.iter().zip(&input) {
                assert!((a / scale - b).norm() < 1e-12, "n={n}");
            }
        }
    }

    #[test]
    fn single_mode_cube_transform() {
        // Placing amplitude 1 at wavevector (1,0,0) and inverse-transforming
        // must produce exp(i x) on the lattice.
        let n = 8;
        let plan = Fourier::new(n);
        let mut data = vec![Complex::new(0.0, 0.0); n * n * n];
        data[(1 * n + 0) * n + 0] = Complex::new(1.0, 0.0);
        plan.inverse_cube(&mut data);
        for i in 0..n {
            let x = TAU * i as f64 / n as f64;
            let got = data[(i * n + 0) * n + 0];
            assert!((got - Complex::new(x.cos(), x.sin())).norm() < 1e-12);
        }
    }
}
