//! Closed-form and seeded test fields.

use alloc::format;

use num_complex::Complex;

use crate::field::{FieldError, SpectralVectorField};
use crate::grid::GridSpec;
use crate::rng;

/// Curl eigenfield `amplitude · (0, sin(kx), cos(kx))`.
///
/// Satisfies `∇×v = k v` and `-Δ v = k² v` exactly on the default box, has
/// unit pointwise magnitude for `amplitude = 1`, and is solenoidal and
/// mean-free by construction.
pub fn beltrami(grid: GridSpec, k: u32, amplitude: f64) -> Result<SpectralVectorField, FieldError> {
    let ki = k as i64;
    if k == 0 || !grid.mode_retained(ki) {
        return Err(FieldError::OutOfBand {
            k: ki,
            cutoff: grid.dealias_cutoff(),
        });
    }
    let mut f = SpectralVectorField::zero(grid);
    // sin(kx) -> -i/2 at +k; cos(kx) -> 1/2 at +k.
    f.set_conjugate_pair(1, [ki, 0, 0], Complex::new(0.0, -0.5 * amplitude));
    f.set_conjugate_pair(2, [ki, 0, 0], Complex::new(0.5 * amplitude, 0.0));
    f.meta.label = crate::field::generator_label("beltrami", Some(&format!("k={k}")));
    Ok(f)
}

/// The Taylor-Green vortex `(sin x cos y cos z, -cos x sin y cos z, 0)`:
/// solenoidal, mean-free, eight modes per active component.
pub fn taylor_green(grid: GridSpec) -> SpectralVectorField {
    let mut f = SpectralVectorField::zero(grid);
    for &sx in &[1i64, -1] {
        for &sy in &[1i64, -1] {
            for &sz in &[1i64, -1] {
                let k = [sx, sy, sz];
                // sin x cos y cos z -> -i sx / 8, -cos x sin y cos z -> i sy / 8.
                f.set_mode(0, k, Complex::new(0.0, -(sx as f64) / 8.0));
                f.set_mode(1, k, Complex::new(0.0, sy as f64 / 8.0));
            }
        }
    }
    f.meta.label = crate::field::generator_label("taylor_green", None);
    f
}

/// Deterministic pseudo-random solenoidal field.
///
/// Amplitudes are drawn per conjugate mode pair from the counter-based
/// stream documented in this crate (splitmix64 over `(seed, mode counter)`),
/// shaped by the envelope `|k|^(-decay_exponent)` with `|k|` the integer
/// wavevector magnitude, then mean-freed, Leray-projected, and dealiased.
/// The same seed yields bitwise-identical coefficients on every platform.
pub fn random_solenoidal(grid: GridSpec, seed: u64, decay_exponent: f64) -> SpectralVectorField {
    assert!(
        decay_exponent >= 0.0 && decay_exponent.is_finite(),
        "decay exponent must be nonnegative"
    );
    let n = grid.n();
    let mut f = SpectralVectorField::zero(grid);
    for comp in 0..3 {
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let idx = grid.mode_index(i, j, l);
                    let pidx = grid.mode_index(
                        grid.conjugate_index(i),
                        grid.conjugate_index(j),
                        grid.conjugate_index(l),
                    );
                    if idx > pidx {
                        continue; // assigned when visiting the partner
                    }
                    let k = [grid.wavenumber(i), grid.wavenumber(j), grid.wavenumber(l)];
                    let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
                    if k2 == 0.0 {
                        continue; // zeroed by make_mean_free anyway
                    }
                    let envelope = libm::pow(libm::sqrt(k2), -decay_exponent);
                    let counter = 2 * (comp as u64 * grid.point_count() as u64 + idx as u64);
                    let re = rng::symmetric(seed, counter);
                    // Self-conjugate modes (all components 0 or n/2) must be real.
                    let im = if idx == pidx {
                        0.0
                    } else {
                        rng::symmetric(seed, counter + 1)
                    };
                    let z = Complex::new(re * envelope, im * envelope);
                    f.set_mode(comp, k, z);
                    if idx != pidx {
                        f.set_mode(comp, [-k[0], -k[1], -k[2]], z.conj());
                    }
                }
            }
        }
    }
    let mut out = f.make_mean_free().leray_project().dealias();
    out.meta.label =
        crate::field::generator_label("random_solenoidal", Some(&format!("seed={seed}")));
    out
}
