//! Lattice `L^p`, fractional Sobolev, and `L^θ`-in-time norms.
//!
//! Conventions, fixed for cross-implementation reproducibility:
//!
//! * vector fields enter through their pointwise Euclidean magnitude,
//!   followed by a scalar lattice quadrature
//!   `((L³/n³) Σ_x |v(x)|^p)^{1/p}`;
//! * `p = ∞` is the collocation maximum — no off-lattice refinement, a
//!   documented O(n⁻²) bias at desk scale;
//! * time integrals use trapezoid quadrature over the stored samples.

use alloc::vec::Vec;
use core::fmt;

use crate::field::{PhysicalVectorField, SpectralVectorField};
use crate::operators::{a_power, FractionalOrder, OperatorError};

#[derive(Debug, Clone, PartialEq)]
pub enum NormError {
    /// Spatial exponent outside `(1, ∞]` (or time exponent below 1).
    InvalidExponent(f64),
    /// Negative Sobolev order on a mean-carrying field.
    SingularMode,
    /// Field failed the conjugate-symmetry check during synthesis.
    MalformedField,
    /// Sobolev order outside the guarded fractional range.
    OrderOutOfRange(f64),
    /// Norm of a series flagged as diverged.
    DivergedSeries,
    /// Series construction: empty input.
    EmptySeries,
    /// Series construction: time stamps not strictly increasing.
    NonMonotonicTimes,
    /// Series construction: negative or non-finite value.
    InvalidValue(f64),
    /// Series construction: times and values differ in length.
    LengthMismatch,
    /// Probe exponent list not strictly increasing or below 2.
    InvalidExponentSequence,
    /// Spec mismatch, e.g. Lebesgue kind with nonzero Sobolev order.
    InconsistentSpec,
}

impl fmt::Display for NormError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormError::InvalidExponent(p) => write!(f, "invalid norm exponent {p}"),
            NormError::SingularMode => {
                write!(f, "negative Sobolev order on a mean-carrying field")
            }
            NormError::MalformedField => write!(f, "field is not conjugate-symmetric"),
            NormError::OrderOutOfRange(s) => write!(f, "Sobolev order {s} out of range"),
            NormError::DivergedSeries => write!(f, "series is flagged as diverged"),
            NormError::EmptySeries => write!(f, "time series must hold at least one sample"),
            NormError::NonMonotonicTimes => {
                write!(f, "time stamps must be strictly increasing")
            }
            NormError::InvalidValue(v) => {
                write!(f, "series values must be finite and nonnegative, got {v}")
            }
            NormError::LengthMismatch => write!(f, "times and values differ in length"),
            NormError::InvalidExponentSequence => {
                write!(f, "exponent list must be strictly increasing and >= 2")
            }
            NormError::InconsistentSpec => write!(f, "norm specification is inconsistent"),
        }
    }
}

impl core::error::Error for NormError {}

impl From<OperatorError> for NormError {
    fn from(e: OperatorError) -> Self {
        match e {
            OperatorError::SingularMode => NormError::SingularMode,
            OperatorError::OrderOutOfRange(s) => NormError::OrderOutOfRange(s),
            _ => NormError::InconsistentSpec,
        }
    }
}

/// Unguarded lattice quadrature `((L³/n³) Σ |v(x)|^r)^{1/r}`; `r = ∞` is the
/// collocation max. Used internally where `r = 1` is legitimate.
fn lattice_lp(f: &PhysicalVectorField, r: f64) -> f64 {
    if r.is_infinite() {
        return f.max_magnitude();
    }
    let count = f.grid().point_count();
    let cell = f.grid().volume() / count as f64;
    let mut sum = 0.0;
    for idx in 0..count {
        sum += libm::pow(f.magnitude_at(idx), r);
    }
    libm::pow(cell * sum, 1.0 / r)
}

/// `L^p` norm for `p ∈ (1, ∞]` of the pointwise Euclidean magnitude.
pub fn lp_norm(f: &PhysicalVectorField, p: f64) -> Result<f64, NormError> {
    if p.is_nan() || p <= 1.0 {
        return Err(NormError::InvalidExponent(p));
    }
    Ok(lattice_lp(f, p))
}

/// Measure-normalized companion `(n⁻³ Σ |v(x)|^r)^{1/r}`, nondecreasing in
/// `r` and convergent to the collocation max.
pub fn normalized_lp_norm(f: &PhysicalVectorField, r: f64) -> f64 {
    if r.is_infinite() {
        return f.max_magnitude();
    }
    let count = f.grid().point_count();
    let mut sum = 0.0;
    for idx in 0..count {
        sum += libm::pow(f.magnitude_at(idx), r);
    }
    libm::pow(sum / count as f64, 1.0 / r)
}

/// Plancherel route to the `L²` norm: `L^{3/2} (Σ_k |v̂(k)|²)^{1/2}`.
pub fn spectral_l2_norm(f: &SpectralVectorField) -> f64 {
    let mut sum = 0.0;
    for c in 0..3 {
        for v in f.component(c) {
            sum += v.norm_sqr();
        }
    }
    libm::sqrt(f.grid().volume() * sum)
}

/// `L²` inner product via coefficient sums: `L³ Σ_k Re(f̂(k) conj(ĝ(k)))`.
pub fn inner_product(f: &SpectralVectorField, g: &SpectralVectorField) -> f64 {
    assert_eq!(f.grid(), g.grid(), "grid mismatch");
    let mut sum = 0.0;
    for c in 0..3 {
        for (a, b) in f.component(c).iter().zip(g.component(c)) {
            sum += a.re * b.re + a.im * b.im;
        }
    }
    f.grid().volume() * sum
}

/// Mixed dissipation form `(A^{1/2} f, A^{1/2} g) = L³ Σ_k λ(k) Re(f̂ conj ĝ)`.
pub fn h1_inner_product(f: &SpectralVectorField, g: &SpectralVectorField) -> f64 {
    assert_eq!(f.grid(), g.grid(), "grid mismatch");
    let grid = f.grid();
    let n = grid.n();
    let kv = grid.wavenumbers();
    let lam = grid.lambda_min();
    let mut sum = 0.0;
    for c in 0..3 {
        let fc = f.component(c);
        let gc = g.component(c);
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let k2 = (kv[i] * kv[i] + kv[j] * kv[j] + kv[l] * kv[l]) as f64;
                    let idx = grid.mode_index(i, j, l);
                    let (a, b) = (fc[idx], gc[idx]);
                    sum += lam * k2 * (a.re * b.re + a.im * b.im);
                }
            }
        }
    }
    grid.volume() * sum
}

/// `‖A^{1/2} u‖₂² = L³ Σ_k λ(k) |û(k)|²`, the dissipation quadratic form.
pub fn h1_seminorm_sq(f: &SpectralVectorField) -> f64 {
    let grid = f.grid();
    let n = grid.n();
    let kv = grid.wavenumbers();
    let lam = grid.lambda_min();
    let mut sum = 0.0;
    for c in 0..3 {
        let comp = f.component(c);
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let k2 = (kv[i] * kv[i] + kv[j] * kv[j] + kv[l] * kv[l]) as f64;
                    sum += lam * k2 * comp[grid.mode_index(i, j, l)].norm_sqr();
                }
            }
        }
    }
    grid.volume() * sum
}

/// Fractional Sobolev norm `‖v‖_{s,p} = ‖A^{s/2} v‖_p`, evaluated through
/// physical-space quadrature of `A^{s/2} v`.
pub fn sobolev_norm(
    f: &SpectralVectorField,
    s: FractionalOrder,
    p: f64,
) -> Result<f64, NormError> {
    let half = FractionalOrder::new(s.value() / 2.0)?;
    let powered = a_power(half, f)?;
    let physical = powered
        .to_physical()
        .map_err(|_| NormError::MalformedField)?;
    lp_norm(&physical, p)
}

/// Outcome of the bounded-domain Lebesgue chain comparison
/// `‖f‖_r <= |Ω|^{1/r} ‖f‖_∞ (<= |Ω| ‖f‖_∞ when |Ω| >= 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainBound {
    pub lhs: f64,
    pub bound: f64,
    pub sup_norm: f64,
    pub volume: f64,
}

impl ChainBound {
    /// The chain inequality with a round-off allowance.
    pub fn holds(&self, rel_tol: f64) -> bool {
        self.lhs <= self.bound * (1.0 + rel_tol)
    }

    /// The coarse bound `|Ω| ‖f‖_∞`, valid on boxes with `|Ω| >= 1`.
    pub fn coarse_bound(&self) -> f64 {
        self.volume * self.sup_norm
    }
}

/// Evaluates `(‖f‖_r, |Ω|^{1/r} ‖f‖_∞)` for `r >= 1`.
pub fn lebesgue_chain(f: &PhysicalVectorField, r: f64) -> Result<ChainBound, NormError> {
    if r.is_nan() || r < 1.0 {
        return Err(NormError::InvalidExponent(r));
    }
    let volume = f.grid().volume();
    let sup_norm = f.max_magnitude();
    let lhs = lattice_lp(f, r);
    let bound = if r.is_infinite() {
        sup_norm
    } else {
        libm::pow(volume, 1.0 / r) * sup_norm
    };
    Ok(ChainBound {
        lhs,
        bound,
        sup_norm,
        volume,
    })
}

/// The sequence `‖f‖_r` over a strictly increasing list of exponents
/// `r >= 2`, probing the `r → ∞` limit toward the collocation max.
///
/// After measure normalization (division by `|Ω|^{1/r}`) the sequence is
/// nondecreasing and converges to `‖f‖_∞`; the approach is logarithmic in
/// `r`, so band-limited fields with sharp peaks need `r` of a few hundred to
/// land within 5% of the grid max.
pub fn linf_limit_probe(f: &PhysicalVectorField, r_list: &[f64]) -> Result<Vec<f64>, NormError> {
    let mut prev = f64::NEG_INFINITY;
    for &r in r_list {
        if r.is_nan() || r < 2.0 || r <= prev {
            return Err(NormError::InvalidExponentSequence);
        }
        prev = r;
    }
    Ok(r_list.iter().map(|&r| lattice_lp(f, r)).collect())
}

/// Sampled diagnostic: strictly increasing time stamps with nonnegative
/// finite values. The `diverged` flag records that the underlying quantity
/// left the finite range beyond the last stored sample.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<f64>,
    diverged: bool,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self, NormError> {
        Self::build(times, values, false)
    }

    /// A series whose source diverged after the stored (finite) prefix.
    pub fn new_diverged(times: Vec<f64>, values: Vec<f64>) -> Result<Self, NormError> {
        Self::build(times, values, true)
    }

    fn build(times: Vec<f64>, values: Vec<f64>, diverged: bool) -> Result<Self, NormError> {
        if times.is_empty() {
            return Err(NormError::EmptySeries);
        }
        if times.len() != values.len() {
            return Err(NormError::LengthMismatch);
        }
        for pair in times.windows(2) {
            if !(pair[1] > pair[0]) {
                return Err(NormError::NonMonotonicTimes);
            }
        }
        for &v in &values {
            if !v.is_finite() || v < 0.0 {
                return Err(NormError::InvalidValue(v));
            }
        }
        Ok(TimeSeries {
            times,
            values,
            diverged,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn diverged(&self) -> bool {
        self.diverged
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least one sample
    }

    pub fn mark_diverged(&mut self) {
        self.diverged = true;
    }

    pub fn last_value(&self) -> f64 {
        *self.values.last().expect("nonempty by construction")
    }
}

/// Cumulative trapezoid integral of `value^θ` (or the running maximum for
/// `θ = ∞`), aligned with the series time stamps; entry 0 is 0.
pub fn running_integral(series: &TimeSeries, theta: f64) -> Vec<f64> {
    let t = series.times();
    let v = series.values();
    let mut out = Vec::with_capacity(t.len());
    if theta.is_infinite() {
        let mut sup = 0.0f64;
        for &x in v {
            sup = sup.max(x);
            out.push(sup);
        }
        return out;
    }
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..t.len() {
        let a = libm::pow(v[i - 1], theta);
        let b = libm::pow(v[i], theta);
        acc += 0.5 * (a + b) * (t[i] - t[i - 1]);
        out.push(acc);
    }
    out
}

/// `L^θ` norm in time: `(∫ value^θ dt)^{1/θ}` by trapezoid quadrature over
/// the samples, or the max sample for `θ = ∞`. A single-sample series has a
/// degenerate interval and norm 0 for finite `θ`.
pub fn time_lebesgue_norm(series: &TimeSeries, theta: f64) -> Result<f64, NormError> {
    if series.diverged() {
        return Err(NormError::DivergedSeries);
    }
    if theta.is_nan() || theta < 1.0 {
        return Err(NormError::InvalidExponent(theta));
    }
    if theta.is_infinite() {
        return Ok(series.values().iter().cloned().fold(0.0, f64::max));
    }
    let total = *running_integral(series, theta)
        .last()
        .expect("nonempty by construction");
    Ok(libm::pow(total, 1.0 / theta))
}

/// Spatial-norm selector: plain Lebesgue or negative-order Sobolev.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpatialKind {
    Lebesgue,
    NegSobolev,
}

/// A spatial norm `‖A^{s/2} · ‖_p` with `s = 0` (Lebesgue) or `s < 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSpec {
    kind: SpatialKind,
    p: f64,
    sobolev_order: f64,
}

impl NormSpec {
    pub fn lebesgue(p: f64) -> Result<Self, NormError> {
        if p.is_nan() || p <= 1.0 {
            return Err(NormError::InvalidExponent(p));
        }
        Ok(NormSpec {
            kind: SpatialKind::Lebesgue,
            p,
            sobolev_order: 0.0,
        })
    }

    pub fn neg_sobolev(order: f64, p: f64) -> Result<Self, NormError> {
        if p.is_nan() || p <= 1.0 {
            return Err(NormError::InvalidExponent(p));
        }
        if !(order < 0.0) {
            return Err(NormError::InconsistentSpec);
        }
        FractionalOrder::new(order).map_err(|_| NormError::OrderOutOfRange(order))?;
        Ok(NormSpec {
            kind: SpatialKind::NegSobolev,
            p,
            sobolev_order: order,
        })
    }

    pub fn kind(&self) -> SpatialKind {
        self.kind
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn sobolev_order(&self) -> f64 {
        self.sobolev_order
    }

    /// Evaluates the norm on a spectral field.
    pub fn evaluate(&self, f: &SpectralVectorField) -> Result<f64, NormError> {
        match self.kind {
            SpatialKind::Lebesgue => {
                let physical = f.to_physical().map_err(|_| NormError::MalformedField)?;
                lp_norm(&physical, self.p)
            }
            SpatialKind::NegSobolev => {
                let order = FractionalOrder::new(self.sobolev_order)
                    .map_err(|_| NormError::OrderOutOfRange(self.sobolev_order))?;
                sobolev_norm(f, order, self.p)
            }
        }
    }
}
