//! Real vector fields on the periodic box in collocation and Fourier form.
//!
//! Spectral fields store the full complex coefficient cube per component
//! with conjugate symmetry enforced by construction and checked before
//! synthesis; the k = 0 amplitude carries the mean and is zeroed by
//! [`SpectralVectorField::make_mean_free`].

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex;

use crate::fft::Fourier;
use crate::grid::GridSpec;

pub type C64 = Complex<f64>;

/// Relative tolerance on the conjugate-symmetry defect accepted by
/// synthesis to physical space.
pub const CONJUGATE_TOL: f64 = 1e-12;

/// Per-mode tolerance in the discrete solenoidality test
/// `|k·v̂(k)| <= tol · |v̂(k)|`.
pub const SOLENOIDAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FieldMeta {
    pub time: Option<f64>,
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldError {
    /// Conjugate symmetry violated beyond tolerance (malformed field).
    ConjugateSymmetry { defect: f64, scale: f64 },
    /// Raw component buffer has the wrong length.
    ComponentLength { expected: usize, got: usize },
    /// Requested wavenumber lies outside the retained band.
    OutOfBand { k: i64, cutoff: f64 },
    /// Operands live on different grids.
    GridMismatch,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldError::ConjugateSymmetry { defect, scale } => write!(
                f,
                "malformed field: conjugate-symmetry defect {defect:e} exceeds {CONJUGATE_TOL:e} of scale {scale:e}"
            ),
            FieldError::ComponentLength { expected, got } => {
                write!(f, "component length {got} does not match n^3 = {expected}")
            }
            FieldError::OutOfBand { k, cutoff } => {
                write!(f, "wavenumber {k} outside the retained band |k| <= {cutoff:.3}")
            }
            FieldError::GridMismatch => write!(f, "fields live on different grids"),
        }
    }
}

impl core::error::Error for FieldError {}

/// Three-component complex Fourier amplitude cube.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVectorField {
    grid: GridSpec,
    coeffs: [Vec<C64>; 3],
    pub meta: FieldMeta,
}

/// Three-component real samples on the `n³` collocation lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalVectorField {
    grid: GridSpec,
    samples: [Vec<f64>; 3],
}

/// Single-component complex Fourier amplitude cube (divergence, potentials).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralScalarField {
    grid: GridSpec,
    coeffs: Vec<C64>,
}

impl SpectralVectorField {
    pub fn zero(grid: GridSpec) -> Self {
        let len = grid.point_count();
        SpectralVectorField {
            grid,
            coeffs: [
                vec![Complex::new(0.0, 0.0); len],
                vec![Complex::new(0.0, 0.0); len],
                vec![Complex::new(0.0, 0.0); len],
            ],
            meta: FieldMeta::default(),
        }
    }

    pub fn from_components(grid: GridSpec, coeffs: [Vec<C64>; 3]) -> Result<Self, FieldError> {
        let expected = grid.point_count();
        for c in &coeffs {
            if c.len() != expected {
                return Err(FieldError::ComponentLength {
                    expected,
                    got: c.len(),
                });
            }
        }
        Ok(SpectralVectorField {
            grid,
            coeffs,
            meta: FieldMeta::default(),
        })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn component(&self, c: usize) -> &[C64] {
        &self.coeffs[c]
    }

    /// Storage index of the mode with integer wavevector `k` (components
    /// taken modulo `n`, so any integer triple addresses a stored mode).
    pub fn index_of(&self, k: [i64; 3]) -> usize {
        let n = self.grid.n() as i64;
        let i = k[0].rem_euclid(n) as usize;
        let j = k[1].rem_euclid(n) as usize;
        let l = k[2].rem_euclid(n) as usize;
        self.grid.mode_index(i, j, l)
    }

    pub fn coefficient(&self, comp: usize, k: [i64; 3]) -> C64 {
        self.coeffs[comp][self.index_of(k)]
    }

    /// Sets a single amplitude. No symmetry is enforced; callers building
    /// real fields must also set the conjugate mode (see
    /// [`Self::set_conjugate_pair`]).
    pub fn set_mode(&mut self, comp: usize, k: [i64; 3], value: C64) {
        let idx = self.index_of(k);
        self.coeffs[comp][idx] = value;
    }

    /// Sets `coeff(k) = value` and `coeff(-k) = conj(value)` in one go.
    pub fn set_conjugate_pair(&mut self, comp: usize, k: [i64; 3], value: C64) {
        self.set_mode(comp, k, value);
        self.set_mode(comp, [-k[0], -k[1], -k[2]], value.conj());
    }

    pub fn max_amplitude(&self) -> f64 {
        let mut m: f64 = 0.0;
        for c in &self.coeffs {
            for v in c {
                m = m.max(v.norm_sqr());
            }
        }
        libm::sqrt(m)
    }

    pub fn has_non_finite(&self) -> bool {
        self.coeffs
            .iter()
            .any(|c| c.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()))
    }

    /// Largest `|coeff(-k) - conj(coeff(k))|` over all modes and components.
    pub fn conjugate_defect(&self) -> f64 {
        let n = self.grid.n();
        let mut worst: f64 = 0.0;
        for c in &self.coeffs {
            for i in 0..n {
                let ci = self.grid.conjugate_index(i);
                for j in 0..n {
                    let cj = self.grid.conjugate_index(j);
                    for l in 0..n {
                        let cl = self.grid.conjugate_index(l);
                        let a = c[self.grid.mode_index(i, j, l)];
                        let b = c[self.grid.mode_index(ci, cj, cl)];
                        worst = worst.max((b - a.conj()).norm());
                    }
                }
            }
        }
        worst
    }

    pub fn is_conjugate_symmetric(&self, rel_tol: f64) -> bool {
        self.conjugate_defect() <= rel_tol * self.max_amplitude()
    }

    /// Whether every k = 0 amplitude is exactly zero.
    pub fn is_mean_free(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c[0].re == 0.0 && c[0].im == 0.0)
    }

    /// Largest `|k·v̂(k)| / |v̂(k)|` over modes with nonzero amplitude.
    pub fn solenoidal_defect(&self) -> f64 {
        let n = self.grid.n();
        let kv = self.grid.wavenumbers();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let idx = self.grid.mode_index(i, j, l);
                    let v = [self.coeffs[0][idx], self.coeffs[1][idx], self.coeffs[2][idx]];
                    let dot = v[0] * kv[i] as f64 + v[1] * kv[j] as f64 + v[2] * kv[l] as f64;
                    let d = dot.norm();
                    if d == 0.0 {
                        continue;
                    }
                    let amp = libm::sqrt(v[0].norm_sqr() + v[1].norm_sqr() + v[2].norm_sqr());
                    worst = worst.max(d / amp);
                }
            }
        }
        worst
    }

    pub fn is_solenoidal(&self, tol: f64) -> bool {
        self.solenoidal_defect() <= tol
    }

    /// Applies a per-mode map `(k, v̂(k)) -> new v̂(k)` and returns the
    /// resulting field. Metadata is dropped.
    pub fn map_modes<F>(&self, mut f: F) -> Self
    where
        F: FnMut([i64; 3], [C64; 3]) -> [C64; 3],
    {
        let n = self.grid.n();
        let kv = self.grid.wavenumbers();
        let mut out = SpectralVectorField::zero(self.grid);
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let idx = self.grid.mode_index(i, j, l);
                    let v = [self.coeffs[0][idx], self.coeffs[1][idx], self.coeffs[2][idx]];
                    let w = f([kv[i], kv[j], kv[l]], v);
                    out.coeffs[0][idx] = w[0];
                    out.coeffs[1][idx] = w[1];
                    out.coeffs[2][idx] = w[2];
                }
            }
        }
        out
    }

    /// Orthogonal projection onto solenoidal fields:
    /// `v̂(k) -> v̂(k) - k (k·v̂)/|k|²` for `k != 0`.
    pub fn leray_project(&self) -> Self {
        self.map_modes(|k, v| {
            let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
            if k2 == 0.0 {
                return v;
            }
            let kf = [k[0] as f64, k[1] as f64, k[2] as f64];
            let dot = v[0] * kf[0] + v[1] * kf[1] + v[2] * kf[2];
            let s = dot / k2;
            [v[0] - kf[0] * s, v[1] - kf[1] * s, v[2] - kf[2] * s]
        })
    }

    /// Zeroes the k = 0 amplitude of every component.
    pub fn make_mean_free(&self) -> Self {
        let mut out = self.clone();
        out.meta = FieldMeta::default();
        for c in &mut out.coeffs {
            c[0] = Complex::new(0.0, 0.0);
        }
        out
    }

    /// Zeroes every amplitude with any `|k_i|` above the grid's dealias
    /// cutoff.
    pub fn dealias(&self) -> Self {
        let g = self.grid;
        self.map_modes(|k, v| {
            if g.mode_retained(k[0]) && g.mode_retained(k[1]) && g.mode_retained(k[2]) {
                v
            } else {
                [Complex::new(0.0, 0.0); 3]
            }
        })
    }

    /// Spectral divergence `i (2π/L) k·v̂(k)`.
    pub fn divergence(&self) -> SpectralScalarField {
        let n = self.grid.n();
        let kv = self.grid.wavenumbers();
        let scale = self.grid.wavenumber_scale();
        let mut out = SpectralScalarField::zero(self.grid);
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let idx = self.grid.mode_index(i, j, l);
                    let dot = self.coeffs[0][idx] * kv[i] as f64
                        + self.coeffs[1][idx] * kv[j] as f64
                        + self.coeffs[2][idx] * kv[l] as f64;
                    out.coeffs[idx] = Complex::new(0.0, scale) * dot;
                }
            }
        }
        out
    }

    /// Synthesizes collocation samples. Fails when the coefficients are not
    /// conjugate-symmetric to [`CONJUGATE_TOL`] (the field would not be
    /// real-valued).
    pub fn to_physical(&self) -> Result<PhysicalVectorField, FieldError> {
        let scale = self.max_amplitude();
        let defect = self.conjugate_defect();
        if defect > CONJUGATE_TOL * scale {
            return Err(FieldError::ConjugateSymmetry { defect, scale });
        }
        Ok(self.to_physical_unchecked())
    }

    /// Synthesis without the symmetry check; callers must guarantee the
    /// field is real-valued. Imaginary residues are discarded.
    pub(crate) fn to_physical_unchecked(&self) -> PhysicalVectorField {
        let plan = Fourier::new(self.grid.n());
        self.to_physical_with(&plan)
    }

    pub(crate) fn to_physical_with(&self, plan: &Fourier) -> PhysicalVectorField {
        let mut samples: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        let mut cube = vec![Complex::new(0.0, 0.0); self.grid.point_count()];
        for (c, out) in samples.iter_mut().enumerate() {
            cube.copy_from_slice(&self.coeffs[c]);
            plan.inverse_cube(&mut cube);
            *out = cube.iter().map(|v| v.re).collect();
        }
        PhysicalVectorField {
            grid: self.grid,
            samples,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let mut out = SpectralVectorField::zero(self.grid);
        for c in 0..3 {
            for (o, (a, b)) in out.coeffs[c]
                .iter_mut()
                .zip(self.coeffs[c].iter().zip(&other.coeffs[c]))
            {
                *o = a + b * sign;
            }
        }
        out
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.meta = FieldMeta::default();
        for c in &mut out.coeffs {
            for v in c.iter_mut() {
                *v *= factor;
            }
        }
        out
    }

    /// `self += factor * other`, in place.
    pub fn add_scaled(&mut self, other: &Self, factor: f64) {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        for c in 0..3 {
            for (a, b) in self.coeffs[c].iter_mut().zip(&other.coeffs[c]) {
                *a += b * factor;
            }
        }
    }

    /// Multiplies each component cube by per-axis factor tables:
    /// `v̂(k) *= fx[i] * fy[j] * fz[l]`.
    pub(crate) fn scale_separable(&mut self, fx: &[f64], fy: &[f64], fz: &[f64]) {
        let n = self.grid.n();
        for c in 0..3 {
            for i in 0..n {
                for j in 0..n {
                    let fij = fx[i] * fy[j];
                    let base = (i * n + j) * n;
                    for l in 0..n {
                        self.coeffs[c][base + l] *= fij * fz[l];
                    }
                }
            }
        }
    }

    /// Relative L² distance `‖self - other‖ / ‖other‖` via coefficient sums
    /// (`0/0` counts as 0).
    pub fn relative_l2_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let mut num = 0.0;
        let mut den = 0.0;
        for c in 0..3 {
            for (a, b) in self.coeffs[c].iter().zip(&other.coeffs[c]) {
                num += (a - b).norm_sqr();
                den += b.norm_sqr();
            }
        }
        if den == 0.0 {
            if num == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            libm::sqrt(num / den)
        }
    }

    /// Largest coefficient difference `max_k |self(k) - other(k)|`.
    pub fn max_coefficient_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let mut worst: f64 = 0.0;
        for c in 0..3 {
            for (a, b) in self.coeffs[c].iter().zip(&other.coeffs[c]) {
                worst = worst.max((a - b).norm());
            }
        }
        worst
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.meta.label = Some(String::from(label));
        self
    }

    pub fn at_time(mut self, t: f64) -> Self {
        self.meta.time = Some(t);
        self
    }
}

impl PhysicalVectorField {
    pub fn zero(grid: GridSpec) -> Self {
        let len = grid.point_count();
        PhysicalVectorField {
            grid,
            samples: [vec![0.0; len], vec![0.0; len], vec![0.0; len]],
        }
    }

    pub fn from_samples(grid: GridSpec, samples: [Vec<f64>; 3]) -> Result<Self, FieldError> {
        let expected = grid.point_count();
        for s in &samples {
            if s.len() != expected {
                return Err(FieldError::ComponentLength {
                    expected,
                    got: s.len(),
                });
            }
        }
        Ok(PhysicalVectorField { grid, samples })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn samples(&self, c: usize) -> &[f64] {
        &self.samples[c]
    }

    pub fn samples_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.samples[c]
    }

    /// Pointwise Euclidean magnitude at lattice index `idx`.
    #[inline]
    pub fn magnitude_at(&self, idx: usize) -> f64 {
        let a = self.samples[0][idx];
        let b = self.samples[1][idx];
        let c = self.samples[2][idx];
        libm::sqrt(a * a + b * b + c * c)
    }

    pub fn max_magnitude(&self) -> f64 {
        (0..self.grid.point_count())
            .map(|i| self.magnitude_at(i))
            .fold(0.0, f64::max)
    }

    /// Forward transform, normalized so that a constant field has exactly
    /// its value at k = 0 (i.e. `to_physical ∘ to_spectral` is the identity
    /// on lattice samples).
    pub fn to_spectral(&self) -> SpectralVectorField {
        let plan = Fourier::new(self.grid.n());
        self.to_spectral_with(&plan)
    }

    pub(crate) fn to_spectral_with(&self, plan: &Fourier) -> SpectralVectorField {
        let len = self.grid.point_count();
        let inv = 1.0 / len as f64;
        let mut out = SpectralVectorField::zero(self.grid);
        let mut cube = vec![Complex::new(0.0, 0.0); len];
        for c in 0..3 {
            for (slot, s) in cube.iter_mut().zip(&self.samples[c]) {
                *slot = Complex::new(*s, 0.0);
            }
            plan.forward_cube(&mut cube);
            for (o, v) in out.coeffs[c].iter_mut().zip(&cube) {
                *o = v * inv;
            }
        }
        out
    }

    /// Pointwise cross product `self × other`.
    pub fn cross(&self, other: &Self) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let mut out = PhysicalVectorField::zero(self.grid);
        for idx in 0..self.grid.point_count() {
            let a = [
                self.samples[0][idx],
                self.samples[1][idx],
                self.samples[2][idx],
            ];
            let b = [
                other.samples[0][idx],
                other.samples[1][idx],
                other.samples[2][idx],
            ];
            out.samples[0][idx] = a[1] * b[2] - a[2] * b[1];
            out.samples[1][idx] = a[2] * b[0] - a[0] * b[2];
            out.samples[2][idx] = a[0] * b[1] - a[1] * b[0];
        }
        out
    }
}

impl SpectralScalarField {
    pub fn zero(grid: GridSpec) -> Self {
        SpectralScalarField {
            grid,
            coeffs: vec![Complex::new(0.0, 0.0); grid.point_count()],
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn index_of(&self, k: [i64; 3]) -> usize {
        let n = self.grid.n() as i64;
        let i = k[0].rem_euclid(n) as usize;
        let j = k[1].rem_euclid(n) as usize;
        let l = k[2].rem_euclid(n) as usize;
        self.grid.mode_index(i, j, l)
    }

    pub fn coefficient(&self, k: [i64; 3]) -> C64 {
        self.coeffs[self.index_of(k)]
    }

    pub fn set_mode(&mut self, k: [i64; 3], value: C64) {
        let idx = self.index_of(k);
        self.coeffs[idx] = value;
    }

    pub fn set_conjugate_pair(&mut self, k: [i64; 3], value: C64) {
        self.set_mode(k, value);
        self.set_mode([-k[0], -k[1], -k[2]], value.conj());
    }

    pub fn max_amplitude(&self) -> f64 {
        libm::sqrt(self.coeffs.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max))
    }
}

/// Label helper used by generators.
pub(crate) fn generator_label(name: &str, detail: Option<&str>) -> Option<String> {
    Some(match detail {
        Some(d) => format!("{name}({d})"),
        None => String::from(name),
    })
}
