//! Uniform periodic-box discretization and its wavevector lattice.

use alloc::vec::Vec;
use core::f64::consts::TAU;
use core::fmt;

/// Default fraction of retained modes per axis (the two-thirds rule).
pub const DEFAULT_DEALIAS_FRACTION: f64 = 2.0 / 3.0;

/// Slack added to the dealias cutoff so that exactly representable
/// boundary modes are not dropped by floating-point round-off of
/// `fraction * n/2`.
const CUTOFF_SLACK: f64 = 1e-9;

/// Discretization of the periodic box `[0, L)^3` with `n` collocation
/// points per axis.
///
/// Wavevector components are integers in `(-n/2, n/2]`, stored in the usual
/// DFT order `0, 1, ..., n/2, -n/2+1, ..., -1`. Physical wavenumbers are the
/// integer components scaled by `2π/L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n: usize,
    box_length: f64,
    dealias_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridError {
    /// `n` must be even and at least 4.
    InvalidPoints(usize),
    /// `box_length` must be positive and finite.
    InvalidLength(f64),
    /// `dealias_fraction` must lie in `(0, 1]`.
    InvalidDealiasFraction(f64),
}

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridError::InvalidPoints(n) => {
                write!(f, "grid points per axis must be even and >= 4, got {n}")
            }
            GridError::InvalidLength(l) => {
                write!(f, "box length must be positive and finite, got {l}")
            }
            GridError::InvalidDealiasFraction(d) => {
                write!(f, "dealias fraction must lie in (0, 1], got {d}")
            }
        }
    }
}

impl core::error::Error for GridError {}

impl GridSpec {
    pub fn new(n: usize, box_length: f64, dealias_fraction: f64) -> Result<Self, GridError> {
        if n < 4 || n % 2 != 0 {
            return Err(GridError::InvalidPoints(n));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(GridError::InvalidLength(box_length));
        }
        if !(dealias_fraction > 0.0 && dealias_fraction <= 1.0) {
            return Err(GridError::InvalidDealiasFraction(dealias_fraction));
        }
        Ok(GridSpec {
            n,
            box_length,
            dealias_fraction,
        })
    }

    /// The `2π`-periodic box with the two-thirds dealias rule.
    pub fn cubic(n: usize) -> Result<Self, GridError> {
        GridSpec::new(n, TAU, DEFAULT_DEALIAS_FRACTION)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn dealias_fraction(&self) -> f64 {
        self.dealias_fraction
    }

    /// Number of lattice points, `n³`.
    pub fn point_count(&self) -> usize {
        self.n * self.n * self.n
    }

    /// Box volume `L³`.
    pub fn volume(&self) -> f64 {
        self.box_length * self.box_length * self.box_length
    }

    /// Lattice spacing `L/n`.
    pub fn spacing(&self) -> f64 {
        self.box_length / self.n as f64
    }

    /// Scale turning integer wavevectors into physical ones, `2π/L`.
    ///
    /// On the default box this is exactly 1.
    pub fn wavenumber_scale(&self) -> f64 {
        TAU / self.box_length
    }

    /// Smallest nonzero eigenvalue of `-Δ` on the mean-free subspace,
    /// `(2π/L)²`.
    pub fn lambda_min(&self) -> f64 {
        let s = self.wavenumber_scale();
        s * s
    }

    /// Integer wavevector component for storage index `i` along one axis.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        debug_assert!(i < self.n);
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Per-axis wavevector lookup table in storage order.
    pub fn wavenumbers(&self) -> Vec<i64> {
        (0..self.n).map(|i| self.wavenumber(i)).collect()
    }

    /// Storage index of the conjugate partner `-k mod n` along one axis.
    #[inline]
    pub fn conjugate_index(&self, i: usize) -> usize {
        if i == 0 {
            0
        } else {
            self.n - i
        }
    }

    /// Linear index of the mode at per-axis storage indices `(i, j, l)`.
    #[inline]
    pub fn mode_index(&self, i: usize, j: usize, l: usize) -> usize {
        (i * self.n + j) * self.n + l
    }

    /// Highest retained |k| per axis: `dealias_fraction * n/2` (with a tiny
    /// slack so exact boundary modes survive round-off of the product).
    pub fn dealias_cutoff(&self) -> f64 {
        self.dealias_fraction * (self.n as f64 / 2.0) + CUTOFF_SLACK
    }

    /// Whether a per-axis integer wavenumber survives dealiasing.
    #[inline]
    pub fn mode_retained(&self, k: i64) -> bool {
        (k.unsigned_abs() as f64) <= self.dealias_cutoff()
    }

    /// Squared physical wavenumber `((2π/L)|k|)²`, the eigenvalue of `-Δ`
    /// at the integer wavevector `k`.
    #[inline]
    pub fn eigenvalue(&self, k: [i64; 3]) -> f64 {
        let s = self.wavenumber_scale();
        let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
        s * s * k2
    }
}
