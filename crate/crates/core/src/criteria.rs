//! Regularity-criterion specifications and their evaluation over
//! trajectories.
//!
//! A criterion is a tuple (target field, spatial norm, time exponent θ,
//! scaling sum): the monitored quantity is the `L^θ`-in-time norm of the
//! target's spatial norm. Built-ins cover the vorticity criterion in the
//! negative Sobolev space `H^{-1,p}` (scaling sum 1), the classical BKM
//! vorticity integral (`L^∞`, θ = 1), and the Serrin-type velocity
//! criterion with scaling sum 2. The sum is carried as data, not hard-coded:
//! the two conventions differ in the literature and both are instantiable.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::field::SpectralVectorField;
use crate::norms::{self, NormError, NormSpec, TimeSeries};
use crate::operators::curl;
use crate::solver::Trajectory;

/// Tolerance on the recorded `2/θ + 3/p` consistency invariant.
const SCALING_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Velocity,
    Vorticity,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CriterionError {
    /// Spatial exponent outside the admissible range (builtins need p > 3).
    InvalidExponent(f64),
    /// `scaling_sum - 3/p` must be positive to solve for θ.
    InvalidScaling { scaling_sum: f64, p: f64 },
    /// Recorded θ, p, and scaling sum are mutually inconsistent.
    ScalingMismatch { expected: f64, got: f64 },
    /// Time exponent below 1.
    InvalidTheta(f64),
    /// Trajectory holds neither the needed series nor any snapshots.
    InsufficientData,
    /// Spatial norm evaluation failed.
    Norm(NormError),
}

impl fmt::Display for CriterionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CriterionError::InvalidExponent(p) => {
                write!(f, "invalid criterion exponent p = {p} (need p > 3)")
            }
            CriterionError::InvalidScaling { scaling_sum, p } => {
                write!(f, "scaling sum {scaling_sum} with p = {p} leaves no admissible theta")
            }
            CriterionError::ScalingMismatch { expected, got } => {
                write!(f, "scaling sum {got} does not match 2/theta + 3/p = {expected}")
            }
            CriterionError::InvalidTheta(t) => write!(f, "time exponent must be >= 1, got {t}"),
            CriterionError::InsufficientData => {
                write!(f, "trajectory carries no snapshots for this criterion")
            }
            CriterionError::Norm(e) => write!(f, "norm evaluation failed: {e}"),
        }
    }
}

impl core::error::Error for CriterionError {}

impl From<NormError> for CriterionError {
    fn from(e: NormError) -> Self {
        CriterionError::Norm(e)
    }
}

/// Solves `2/θ + 3/p = scaling_sum` for θ, with `3/∞ := 0`.
pub fn theta_from_p(p: f64, scaling_sum: f64) -> Result<f64, CriterionError> {
    if p.is_nan() || p <= 0.0 {
        return Err(CriterionError::InvalidExponent(p));
    }
    let spatial = if p.is_infinite() { 0.0 } else { 3.0 / p };
    let denom = scaling_sum - spatial;
    if !(denom > 0.0) {
        return Err(CriterionError::InvalidScaling { scaling_sum, p });
    }
    Ok(2.0 / denom)
}

/// A regularity criterion: target, spatial norm, time exponent, and the
/// informational scaling sum `2/θ + 3/p`.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionSpec {
    id: String,
    target: Target,
    norm: NormSpec,
    theta: f64,
    scaling_sum: f64,
}

impl CriterionSpec {
    pub fn new(
        id: &str,
        target: Target,
        norm: NormSpec,
        theta: f64,
        scaling_sum: f64,
    ) -> Result<Self, CriterionError> {
        if theta.is_nan() || theta < 1.0 {
            return Err(CriterionError::InvalidTheta(theta));
        }
        let spatial = if norm.p().is_infinite() {
            0.0
        } else {
            3.0 / norm.p()
        };
        let expected = 2.0 / theta + spatial;
        if (expected - scaling_sum).abs() > SCALING_TOL {
            return Err(CriterionError::ScalingMismatch {
                expected,
                got: scaling_sum,
            });
        }
        Ok(CriterionSpec {
            id: String::from(id),
            target,
            norm,
            theta,
            scaling_sum,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn target(&self) -> Target {
        self.target
    }

    pub fn norm(&self) -> NormSpec {
        self.norm
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn scaling_sum(&self) -> f64 {
        self.scaling_sum
    }
}

fn p_label(p: f64) -> String {
    if p.is_infinite() {
        String::from("inf")
    } else if p == libm::floor(p) {
        format!("{}", p as i64)
    } else {
        format!("{p}")
    }
}

/// The vorticity criterion in `H^{-1,p}` with scaling sum 1, `p ∈ (3, ∞]`:
/// finiteness of `‖ω‖_{L^θ((0,T); H^{-1,p})}` with `2/θ + 3/p = 1`.
/// At `p = ∞` this is the θ = 2 criterion on `‖A^{-1/2}ω‖_∞`.
pub fn bkm_neg_sobolev(p: f64) -> Result<CriterionSpec, CriterionError> {
    if !(p > 3.0) {
        return Err(CriterionError::InvalidExponent(p));
    }
    let theta = theta_from_p(p, 1.0)?;
    CriterionSpec::new(
        &format!("bkm-hm1-p{}", p_label(p)),
        Target::Vorticity,
        NormSpec::neg_sobolev(-1.0, p)?,
        theta,
        1.0,
    )
}

/// The classical BKM vorticity integral: `‖ω‖_{L^1((0,T); L^∞)}`.
pub fn bkm_classic() -> CriterionSpec {
    CriterionSpec::new(
        "bkm-linf",
        Target::Vorticity,
        NormSpec::lebesgue(f64::INFINITY).expect("p = inf is valid"),
        1.0,
        2.0,
    )
    .expect("built-in spec is consistent")
}

/// The Serrin-type velocity criterion with scaling sum 2, `p ∈ (3, ∞]`:
/// `u ∈ L^θ((0,T); L^p)` with `2/θ + 3/p = 2`.
pub fn serrin(p: f64) -> Result<CriterionSpec, CriterionError> {
    if !(p > 3.0) {
        return Err(CriterionError::InvalidExponent(p));
    }
    let theta = theta_from_p(p, 2.0)?;
    CriterionSpec::new(
        &format!("serrin-p{}", p_label(p)),
        Target::Velocity,
        NormSpec::lebesgue(p)?,
        theta,
        2.0,
    )
}

/// The criterion's instantaneous spatial norm on one state.
pub fn instantaneous_norm(
    spec: &CriterionSpec,
    u: &SpectralVectorField,
) -> Result<f64, CriterionError> {
    let value = match spec.target {
        Target::Velocity => spec.norm.evaluate(u)?,
        Target::Vorticity => spec.norm.evaluate(&curl(u))?,
    };
    Ok(value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Finite,
    Diverged,
}

/// Evaluated criterion: instantaneous series, running integral of
/// `value^θ` (running sup for θ = ∞), and the final time norm.
#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub spec: CriterionSpec,
    pub instantaneous: TimeSeries,
    pub running_integral: TimeSeries,
    /// `(∫ value^θ)^{1/θ}` over the recorded span; `None` when diverged.
    pub final_value: Option<f64>,
    pub verdict: Verdict,
}

fn instantaneous_series(
    traj: &Trajectory,
    spec: &CriterionSpec,
) -> Result<TimeSeries, CriterionError> {
    if let Some(series) = traj.diagnostic(spec.id()) {
        return Ok(series.clone());
    }
    if traj.snapshots().is_empty() {
        return Err(CriterionError::InsufficientData);
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (t, u) in traj.snapshots() {
        times.push(*t);
        values.push(instantaneous_norm(spec, u)?);
    }
    let series = if traj.is_diverged() {
        TimeSeries::new_diverged(times, values)
    } else {
        TimeSeries::new(times, values)
    };
    series.map_err(CriterionError::from)
}

/// Evaluates a criterion over a trajectory, from the recorded diagnostic
/// series when the run monitored it, otherwise from the snapshots.
pub fn evaluate(traj: &Trajectory, spec: &CriterionSpec) -> Result<CriterionReport, CriterionError> {
    let instantaneous = instantaneous_series(traj, spec)?;
    let running = norms::running_integral(&instantaneous, spec.theta());
    let times = instantaneous.times().to_vec();
    let diverged = instantaneous.diverged();
    let running_integral = if diverged {
        TimeSeries::new_diverged(times, running)
    } else {
        TimeSeries::new(times, running)
    }?;
    let (verdict, final_value) = if diverged {
        (Verdict::Diverged, None)
    } else {
        let total = running_integral.last_value();
        let value = if spec.theta().is_infinite() {
            total
        } else {
            libm::pow(total, 1.0 / spec.theta())
        };
        (Verdict::Finite, Some(value))
    };
    Ok(CriterionReport {
        spec: spec.clone(),
        instantaneous,
        running_integral,
        final_value,
        verdict,
    })
}

/// Running supremum of `‖ω(t)‖_{H^{-1,∞}}`, the quantity that must blow up
/// at a finite maximal existence time.
#[derive(Debug, Clone)]
pub struct BlowupIndicator {
    pub running_sup: TimeSeries,
}

impl BlowupIndicator {
    pub fn sup(&self) -> f64 {
        self.running_sup.last_value()
    }

    pub fn diverged(&self) -> bool {
        self.running_sup.diverged()
    }
}

pub fn blowup_indicator(traj: &Trajectory) -> Result<BlowupIndicator, CriterionError> {
    let spec = bkm_neg_sobolev(f64::INFINITY)?;
    let series = instantaneous_series(traj, &spec)?;
    let mut sup = 0.0f64;
    let sups: Vec<f64> = series
        .values()
        .iter()
        .map(|&v| {
            sup = sup.max(v);
            sup
        })
        .collect();
    let times = series.times().to_vec();
    let running_sup = if series.diverged() {
        TimeSeries::new_diverged(times, sups)
    } else {
        TimeSeries::new(times, sups)
    }?;
    Ok(BlowupIndicator { running_sup })
}

/// One row of the velocity/vorticity norm comparison at exponent `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEquivalenceRow {
    pub p: f64,
    /// `‖u‖_p`.
    pub velocity_norm: f64,
    /// `‖ω‖_{H^{-1,p}}` with `ω = ∇×u`.
    pub vorticity_shifted_norm: f64,
    /// `‖A^{-1/2}∇×u‖_p`, algebraically identical to the previous entry.
    pub composition_norm: f64,
}

/// Compares `‖u‖_p` with the one-derivative-shifted vorticity norm
/// `‖ω‖_{H^{-1,p}}` over a list of exponents. The two routes to the shifted
/// norm (through ω and through the composition `A^{-1/2}∇×`) are the same
/// arithmetic and must agree to round-off.
pub fn norm_equivalence_probe(
    u: &SpectralVectorField,
    p_list: &[f64],
) -> Result<Vec<NormEquivalenceRow>, CriterionError> {
    let omega = curl(u);
    let composition = crate::operators::b1_apply(u).map_err(NormError::from)?;
    let u_phys = u.to_physical().map_err(|_| NormError::MalformedField)?;
    let comp_phys = composition
        .to_physical()
        .map_err(|_| NormError::MalformedField)?;
    let order = crate::operators::FractionalOrder::new(-1.0).map_err(NormError::from)?;
    let mut rows = Vec::with_capacity(p_list.len());
    for &p in p_list {
        rows.push(NormEquivalenceRow {
            p,
            velocity_norm: norms::lp_norm(&u_phys, p)?,
            vorticity_shifted_norm: norms::sobolev_norm(&omega, order, p)?,
            composition_norm: norms::lp_norm(&comp_phys, p)?,
        });
    }
    Ok(rows)
}

/// Min/max/mean of a collection of ratios, for regression bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl RatioStats {
    pub fn from_ratios<I: IntoIterator<Item = f64>>(ratios: I) -> Option<Self> {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut sum = 0.0;
        let mut count = 0usize;
        for r in ratios {
            min = min.min(r);
            max = max.max(r);
            sum += r;
            count += 1;
        }
        if count == 0 {
            return None;
        }
        Some(RatioStats {
            min,
            max,
            mean: sum / count as f64,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::grid::GridSpec;
    use crate::solver::{run, SolverConfig};

    fn grid(n: usize) -> GridSpec {
        GridSpec::cubic(n).unwrap()
    }

    #[test]
    fn theta_closed_forms() {
        // 2/θ + 3/p = 1 at p = ∞ gives the θ = 2 endpoint.
        assert_eq!(theta_from_p(f64::INFINITY, 1.0).unwrap(), 2.0);
        // The classical velocity convention 2/θ + 3/p = 2 at p = ∞.
        assert_eq!(theta_from_p(f64::INFINITY, 2.0).unwrap(), 1.0);
        // 2/θ = 1 - 3/5.
        assert!((theta_from_p(5.0, 1.0).unwrap() - 5.0).abs() < 1e-12);
        // Nonpositive denominator.
        assert!(matches!(
            theta_from_p(3.0, 1.0),
            Err(CriterionError::InvalidScaling { .. })
        ));
        assert!(theta_from_p(2.0, 1.0).is_err());
    }

    #[test]
    fn builtin_specs() {
        let paper_endpoint = bkm_neg_sobolev(f64::INFINITY).unwrap();
        assert_eq!(paper_endpoint.theta(), 2.0);
        assert_eq!(paper_endpoint.target(), Target::Vorticity);
        assert_eq!(paper_endpoint.norm().sobolev_order(), -1.0);
        assert!(paper_endpoint.norm().p().is_infinite());
        assert_eq!(paper_endpoint.id(), "bkm-hm1-pinf");

        let classic = bkm_classic();
        assert_eq!(classic.theta(), 1.0);
        assert_eq!(classic.target(), Target::Vorticity);
        assert!(classic.norm().p().is_infinite());

        let s6 = serrin(6.0).unwrap();
        assert!((s6.theta() - 4.0 / 3.0).abs() < 1e-12);
        assert_eq!(s6.target(), Target::Velocity);

        // p must exceed 3 for the parameterized families.
        assert!(matches!(
            bkm_neg_sobolev(3.0),
            Err(CriterionError::InvalidExponent(_))
        ));
        assert!(serrin(2.5).is_err());
    }

    #[test]
    fn spec_scaling_consistency_is_enforced() {
        let norm = NormSpec::lebesgue(4.0).unwrap();
        assert!(CriterionSpec::new("x", Target::Velocity, norm, 8.0, 1.0).is_ok());
        assert!(matches!(
            CriterionSpec::new("x", Target::Velocity, norm, 8.0, 1.1),
            Err(CriterionError::ScalingMismatch { .. })
        ));
        assert!(matches!(
            CriterionSpec::new("x", Target::Velocity, norm, 0.5, 4.75),
            Err(CriterionError::InvalidTheta(_))
        ));
    }

    #[test]
    fn evaluate_on_a_decaying_eigenfield_run() {
        // ω = u for the k = 1 eigenfield, and A^{-1/2}ω = u, so the
        // instantaneous H^{-1,∞} norm is e^{-0.1 t}; its L² time norm over
        // [0, 1] is sqrt((1 - e^{-0.2}) / 0.2).
        let g = grid(16);
        let cfg = SolverConfig::new(g, 0.1, 1e-3, 1.0)
            .unwrap()
            .with_save_every(10)
            .unwrap();
        let u0 = generators::beltrami(g, 1, 1.0).unwrap();
        let spec = bkm_neg_sobolev(f64::INFINITY).unwrap();
        let traj = run(&cfg, &u0, core::slice::from_ref(&spec)).unwrap();

        let report = evaluate(&traj, &spec).unwrap();
        assert_eq!(report.verdict, Verdict::Finite);
        for (t, v) in report
            .instantaneous
            .times()
            .iter()
            .zip(report.instantaneous.values())
        {
            assert!((v - (-0.1 * t).exp()).abs() < 1e-8, "t={t}");
        }
        let want = ((1.0 - (-0.2f64).exp()) / 0.2).sqrt();
        let got = report.final_value.unwrap();
        assert!((got - want).abs() < 1e-4, "{got} vs {want}");

        // Running integral is nondecreasing and consistent with the final.
        let run_vals = report.running_integral.values();
        for w in run_vals.windows(2) {
            assert!(w[1] >= w[0]);
        }
        let recomposed = run_vals.last().unwrap().powf(1.0 / spec.theta());
        assert!((recomposed - got).abs() <= 1e-12 * got);
    }

    #[test]
    fn every_builtin_matches_its_closed_form_on_pure_decay() {
        // On the k = 1 eigenfield (amplitude 1, ν = 0.1) every monitored
        // norm decays as c_p e^{-0.1 t}, so each built-in integrates in
        // closed form:
        //   ∫₀^T (c e^{-at})^θ dt = c^θ (1 - e^{-aθT}) / (aθ).
        let g = grid(16);
        let horizon = 0.5;
        let specs = [
            bkm_neg_sobolev(f64::INFINITY).unwrap(),
            bkm_classic(),
            serrin(6.0).unwrap(),
        ];
        let cfg = SolverConfig::new(g, 0.1, 1e-3, horizon)
            .unwrap()
            .with_save_every(10)
            .unwrap();
        let u0 = generators::beltrami(g, 1, 1.0).unwrap();
        let traj = run(&cfg, &u0, &specs).unwrap();
        let closed_form = |c: f64, theta: f64| {
            (c.powf(theta) * (1.0 - (-0.1 * theta * horizon).exp()) / (0.1 * theta))
                .powf(1.0 / theta)
        };
        // Instantaneous prefactors at t = 0: ‖A^{-1/2}ω‖_∞ = ‖ω‖_∞ = 1,
        // ‖u‖_6 = (2π)^{1/2}.
        let prefactors = [1.0, 1.0, core::f64::consts::TAU.sqrt()];
        for (spec, c) in specs.iter().zip(prefactors) {
            let report = evaluate(&traj, spec).unwrap();
            assert_eq!(report.verdict, Verdict::Finite, "{}", spec.id());
            let got = report.final_value.unwrap();
            let want = closed_form(c, spec.theta());
            assert!(
                (got - want).abs() < 1e-4 * want,
                "{}: {got} vs {want}",
                spec.id()
            );
        }
    }

    #[test]
    fn evaluate_recomputes_when_not_monitored() {
        let g = grid(16);
        let cfg = SolverConfig::new(g, 0.1, 2e-3, 0.1).unwrap();
        let u0 = generators::beltrami(g, 1, 1.0).unwrap();
        let traj = run(&cfg, &u0, &[]).unwrap();
        let report = evaluate(&traj, &bkm_classic()).unwrap();
        // ‖ω‖_∞ = e^{-0.1 t} for this field (ω = u), θ = 1.
        let want = (1.0 - (-0.1f64 * 0.1).exp()) / 0.1;
        let got = report.final_value.unwrap();
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    }

    #[test]
    fn infinite_time_exponent_takes_the_running_sup() {
        let g = grid(16);
        let cfg = SolverConfig::new(g, 0.1, 1e-3, 0.05).unwrap();
        let u0 = generators::beltrami(g, 1, 1.0).unwrap();
        let traj = run(&cfg, &u0, &[]).unwrap();
        // sup-in-time of the velocity L⁴ norm; scaling sum is 3/4.
        let spec = CriterionSpec::new(
            "linf-in-time",
            Target::Velocity,
            crate::norms::NormSpec::lebesgue(4.0).unwrap(),
            f64::INFINITY,
            0.75,
        )
        .unwrap();
        let report = evaluate(&traj, &spec).unwrap();
        let sup = report
            .instantaneous
            .values()
            .iter()
            .cloned()
            .fold(0.0, f64::max);
        assert_eq!(report.final_value, Some(sup));
        let run_vals = report.running_integral.values();
        assert!(run_vals.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(*run_vals.last().unwrap(), sup);
    }

    #[test]
    fn zero_trajectory_reports_finite_zero() {
        let g = grid(8);
        let cfg = SolverConfig::new(g, 0.1, 1e-2, 0.1).unwrap();
        let traj = run(&cfg, &SpectralVectorField::zero(g), &[]).unwrap();
        let report = evaluate(&traj, &bkm_classic()).unwrap();
        assert_eq!(report.verdict, Verdict::Finite);
        assert_eq!(report.final_value, Some(0.0));
        assert!(report.instantaneous.values().iter().all(|&v| v == 0.0));

        let indicator = blowup_indicator(&traj).unwrap();
        assert_eq!(indicator.sup(), 0.0);
    }

    #[test]
    fn diverged_trajectory_propagates_with_partial_integral() {
        use num_complex::Complex;
        let g = grid(8);
        let mut bad = SpectralVectorField::zero(g);
        bad.set_conjugate_pair(0, [1, 0, 0], Complex::new(f64::NAN, 0.0));
        let cfg = SolverConfig::new(g, 0.1, 1e-3, 0.1)
            .unwrap()
            .with_forcing(bad)
            .unwrap();
        let u0 = generators::beltrami(g, 1, 1.0).unwrap();
        let traj = run(&cfg, &u0, &[]).unwrap();
        assert!(traj.is_diverged());

        let report = evaluate(&traj, &bkm_classic()).unwrap();
        assert_eq!(report.verdict, Verdict::Diverged);
        assert_eq!(report.final_value, None);
        assert!(report.running_integral.diverged());

        let indicator = blowup_indicator(&traj).unwrap();
        assert!(indicator.diverged());
        assert!(indicator.sup().is_finite(), "last finite sup retained");
    }

    #[test]
    fn blowup_indicator_is_constant_on_decay() {
        let g = grid(16);
        let cfg = SolverConfig::new(g, 0.1, 1e-3, 0.05).unwrap();
        let u0 = generators::beltrami(g, 1, 1.0).unwrap();
        let traj = run(&cfg, &u0, &[]).unwrap();
        let indicator = blowup_indicator(&traj).unwrap();
        let first = indicator.running_sup.values()[0];
        for &v in indicator.running_sup.values() {
            assert_eq!(v, first, "sup attained at t = 0 under pure decay");
        }
    }

    #[test]
    fn norm_equivalence_rows() {
        let g = grid(16);
        // Curl eigenfield: ratio is exactly 1 for every p.
        let v = generators::beltrami(g, 3, 1.0).unwrap();
        for row in norm_equivalence_probe(&v, &[2.0, 4.0, f64::INFINITY]).unwrap() {
            assert!(
                (row.vorticity_shifted_norm / row.velocity_norm - 1.0).abs() < 1e-12,
                "p={}",
                row.p
            );
        }
        // Random corpus: the two shifted routes agree to round-off, and the
        // p = 2 ratio respects the L² contraction.
        let mut ratios = Vec::new();
        for seed in 0..10 {
            let u = generators::random_solenoidal(g, seed, 1.0);
            let rows = norm_equivalence_probe(&u, &[2.0, 4.0, f64::INFINITY]).unwrap();
            for row in &rows {
                assert!(
                    (row.vorticity_shifted_norm - row.composition_norm).abs()
                        <= 1e-10 * row.composition_norm
                );
                assert!(row.velocity_norm > 0.0 && row.vorticity_shifted_norm > 0.0);
            }
            ratios.push(rows[0].vorticity_shifted_norm / rows[0].velocity_norm);
        }
        let stats = RatioStats::from_ratios(ratios.iter().cloned()).unwrap();
        assert!(stats.max <= 1.0 + 1e-12, "L² contraction, max {}", stats.max);
        assert!(stats.min > 0.0 && stats.mean > 0.0);
    }
}
