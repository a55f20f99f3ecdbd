//! The four subcommands: `verify`, `run`, `norms`, `report`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nslab_core::criteria::{self, Verdict};
use nslab_core::norms::{self, TimeSeries};
use nslab_core::operators::{
    a_power, b0_apply, b1_apply, b2_apply, b3_apply, curl, curl_curl_residual, gradient,
    FractionalOrder,
};
use nslab_core::solver::{self, RunVerdict};
use nslab_core::{generators, GridSpec, SpectralScalarField, SpectralVectorField};
use num_complex::Complex;

use crate::checkpoint;
use crate::manifest;
use crate::CliError;

/// Full-precision scientific formatting: 17 significant digits, lossless
/// for binary64.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn p_text(p: f64) -> String {
    if p.is_infinite() {
        "inf".to_string()
    } else {
        format!("{p}")
    }
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct Check {
    name: &'static str,
    residual: f64,
}

fn mixed_field(g: GridSpec, seed: u64) -> SpectralVectorField {
    let sol = generators::random_solenoidal(g, seed, 1.0);
    let mut phi = SpectralScalarField::zero(g);
    for (i, k) in [[1i64, 0, 0], [2, -1, 0], [0, 1, 3], [1, 1, 1]].iter().enumerate() {
        let re = (seed.wrapping_add(i as u64 * 7919) % 1000) as f64 / 1000.0 - 0.5;
        let im = (seed.wrapping_add(i as u64 * 104729) % 1000) as f64 / 1000.0 - 0.5;
        phi.set_conjugate_pair(*k, Complex::new(re, im));
    }
    sol.add(&gradient(&phi))
}

/// Runs the identity battery and prints one line per check; exits 0 only if
/// every residual sits below `tol`.
pub fn cmd_verify(n: usize, seed: u64, tol: f64) -> Result<(), CliError> {
    if n < 8 || n % 2 != 0 {
        return Err(CliError::Usage(format!(
            "verify needs an even n >= 8, got {n}"
        )));
    }
    if !(tol > 0.0) {
        return Err(CliError::Usage(format!("tolerance must be positive, got {tol}")));
    }
    let g = GridSpec::cubic(n).map_err(|e| CliError::Usage(e.to_string()))?;
    let order = |s: f64| FractionalOrder::new(s).expect("orders in the sweep are in range");

    let corpus: Vec<SpectralVectorField> = (0..16)
        .map(|i| generators::random_solenoidal(g, seed.wrapping_add(i), 1.0))
        .collect();
    let mixed: Vec<SpectralVectorField> =
        (0..8).map(|i| mixed_field(g, seed.wrapping_add(i))).collect();
    let beltrami = generators::beltrami(g, 1, 1.0).map_err(|e| CliError::Input(e.to_string()))?;
    let taylor_green = generators::taylor_green(g);

    let mut checks: Vec<Check> = Vec::new();

    // Transform round trip, spectral -> physical -> spectral.
    let mut worst = 0.0f64;
    for f in corpus.iter().chain([&taylor_green]) {
        let back = f
            .to_physical()
            .map_err(|e| CliError::Input(e.to_string()))?
            .to_spectral();
        worst = worst.max(f.relative_l2_distance(&back));
    }
    checks.push(Check { name: "fft_round_trip", residual: worst });

    // A⁻¹ ∇×∇× v = v on solenoidal mean-free fields.
    let mut worst = 0.0f64;
    for f in &corpus {
        let back = a_power(order(-1.0), &curl(&curl(f))).expect("corpus is mean-free");
        worst = worst.max(back.relative_l2_distance(f));
    }
    checks.push(Check { name: "double_curl_inversion", residual: worst });

    // Order sweep of the same identity.
    let mut worst = 0.0f64;
    for f in &corpus {
        for s in [-1.0, -0.5, 0.0, 0.5, 1.0, 2.0] {
            worst = worst.max(curl_curl_residual(f, order(s)).expect("nonzero corpus field"));
        }
    }
    checks.push(Check { name: "curl_curl_identity_sweep", residual: worst });

    // A⁻¹∇×∇× coincides with the Leray projection on mean-free fields.
    let mut worst = 0.0f64;
    for f in &mixed {
        let composed = b0_apply(f).expect("mean-free by construction");
        let projected = f.leray_project();
        worst = worst.max(composed.max_coefficient_distance(&projected) / f.max_amplitude());
    }
    checks.push(Check { name: "projection_coincidence", residual: worst });

    // ‖A^{-1/2}∇× v‖₂ <= ‖v‖₂.
    let mut worst = 0.0f64;
    for f in corpus.iter().chain(mixed.iter()) {
        let image = b1_apply(f).expect("mean-free");
        let ratio = norms::spectral_l2_norm(&image) / norms::spectral_l2_norm(f);
        worst = worst.max((ratio - 1.0).max(0.0));
    }
    checks.push(Check { name: "shifted_curl_contraction", residual: worst });

    // Torus coincidence of the three shifted-curl compositions.
    let mut worst = 0.0f64;
    for f in &corpus {
        let one = b1_apply(f).expect("mean-free");
        let two = b2_apply(f).expect("mean-free");
        worst = worst.max(one.max_coefficient_distance(&two) / f.max_amplitude());
        for s in [-1.0, 0.0, 0.5, 2.0] {
            let three = b3_apply(order(s), f).expect("mean-free");
            worst = worst.max(one.max_coefficient_distance(&three) / f.max_amplitude());
        }
    }
    checks.push(Check { name: "composition_coincidence", residual: worst });

    // Lattice quadrature at p = 2 against the coefficient-sum norm.
    let mut worst = 0.0f64;
    for f in corpus.iter().chain([&taylor_green, &beltrami]) {
        let quad = norms::lp_norm(&f.to_physical().expect("symmetric"), 2.0)
            .expect("p = 2 is valid");
        let spectral = norms::spectral_l2_norm(f);
        worst = worst.max((quad - spectral).abs() / spectral);
    }
    checks.push(Check { name: "plancherel_consistency", residual: worst });

    // ‖v‖_r <= |Ω|^{1/r} ‖v‖_∞, with equality on the unit-magnitude field.
    let mut worst = 0.0f64;
    for f in &corpus {
        let phys = f.to_physical().expect("symmetric");
        for r in [2.0, 4.0, 8.0, 16.0] {
            let c = norms::lebesgue_chain(&phys, r).expect("r >= 1");
            worst = worst.max((c.lhs / c.bound - 1.0).max(0.0));
        }
    }
    let phys = beltrami.to_physical().expect("symmetric");
    for r in [2.0, 4.0, 8.0, 16.0] {
        let c = norms::lebesgue_chain(&phys, r).expect("r >= 1");
        worst = worst.max((c.lhs / c.bound - 1.0).abs());
    }
    checks.push(Check { name: "lebesgue_chain", residual: worst });

    // Divergence surviving the projection, relative to the input scale.
    // (The per-mode ratio |k·v̂|/|v̂| is meaningless on modes the projection
    // annihilates entirely, so the residual is measured against the field.)
    let mut worst = 0.0f64;
    for f in &mixed {
        let residue = f.leray_project().divergence().max_amplitude();
        worst = worst.max(residue / f.max_amplitude());
    }
    checks.push(Check { name: "solenoidal_projection", residual: worst });

    // ‖∇×u‖_{H^{-1,p}} = ‖A^{-1/2}∇×u‖_p for p in {2, 4, ∞}.
    let mut worst = 0.0f64;
    let mut l2_ratios = Vec::new();
    for f in &corpus {
        let rows = criteria::norm_equivalence_probe(f, &[2.0, 4.0, f64::INFINITY])
            .expect("corpus fields are well-formed");
        for row in &rows {
            worst = worst.max(
                (row.vorticity_shifted_norm - row.composition_norm).abs() / row.composition_norm,
            );
        }
        l2_ratios.push(rows[0].vorticity_shifted_norm / rows[0].velocity_norm);
    }
    checks.push(Check { name: "one_derivative_shift", residual: worst });

    let mut failures = 0;
    for check in &checks {
        let ok = check.residual <= tol;
        if !ok {
            failures += 1;
        }
        println!(
            "check {:<26} residual {:>12.3e}  tol {:>9.1e}  {}",
            check.name,
            check.residual,
            tol,
            if ok { "PASS" } else { "FAIL" }
        );
    }
    if let Some(stats) = criteria::RatioStats::from_ratios(l2_ratios) {
        println!(
            "info  shifted-curl L2 ratio      min {:.6} mean {:.6} max {:.6}",
            stats.min, stats.mean, stats.max
        );
    }
    if failures == 0 {
        println!(
            "verify: {}/{} checks passed (n={n}, seed={seed}, tol={tol:e})",
            checks.len(),
            checks.len()
        );
        Ok(())
    } else {
        let first = checks
            .iter()
            .find(|c| c.residual > tol)
            .expect("at least one failure");
        println!(
            "verify: {failures}/{} checks FAILED; first failing residual: {} = {:.3e} (n={n}, seed={seed}, tol={tol:e})",
            checks.len(),
            first.name,
            first.residual
        );
        Err(CliError::ChecksFailed)
    }
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

fn run_verdict_text(v: RunVerdict) -> String {
    match v {
        RunVerdict::Completed => "completed".to_string(),
        RunVerdict::Diverged { time } => format!("diverged at t = {time}"),
        RunVerdict::StepRejected { time, admissible_dt } => {
            format!("step_rejected at t = {time} (admissible dt {admissible_dt:e})")
        }
    }
}

fn write_diagnostics_csv(path: &Path, traj: &solver::Trajectory) -> Result<(), CliError> {
    let diagnostics = traj.diagnostics();
    let mut header = String::from("t");
    for name in diagnostics.keys() {
        header.push(',');
        header.push_str(name);
    }
    let mut body = String::new();
    if let Some(first) = diagnostics.values().next() {
        for (i, t) in first.times().iter().enumerate() {
            let mut line = fmt_f64(*t);
            for series in diagnostics.values() {
                line.push(',');
                line.push_str(&fmt_f64(series.values()[i]));
            }
            body.push_str(&line);
            body.push('\n');
        }
    }
    fs::write(path, format!("{header}\n{body}"))
        .map_err(|e| CliError::Input(format!("writing {}: {e}", path.display())))
}

fn write_criteria_file(
    path: &Path,
    traj: &solver::Trajectory,
    reports: &[criteria::CriterionReport],
    indicator: &criteria::BlowupIndicator,
) -> Result<(), CliError> {
    let mut text = String::new();
    let _ = writeln!(text, "[run]");
    let _ = writeln!(
        text,
        "verdict = {}",
        match traj.verdict() {
            RunVerdict::Completed => "completed",
            RunVerdict::Diverged { .. } => "diverged",
            RunVerdict::StepRejected { .. } => "step_rejected",
        }
    );
    if let Some(t) = traj.last_time() {
        let _ = writeln!(text, "final_time = {}", fmt_f64(t));
    }
    let _ = writeln!(text, "snapshots = {}", traj.snapshots().len());
    let _ = writeln!(text);
    let _ = writeln!(text, "[blowup]");
    let _ = writeln!(text, "sup = {}", fmt_f64(indicator.sup()));
    let _ = writeln!(text, "diverged = {}", indicator.diverged());
    for report in reports {
        let spec = &report.spec;
        let _ = writeln!(text);
        let _ = writeln!(text, "[criterion]");
        let _ = writeln!(text, "id = {}", spec.id());
        let _ = writeln!(
            text,
            "target = {}",
            match spec.target() {
                criteria::Target::Velocity => "velocity",
                criteria::Target::Vorticity => "vorticity",
            }
        );
        let _ = writeln!(
            text,
            "kind = {}",
            match spec.norm().kind() {
                norms::SpatialKind::Lebesgue => "lebesgue",
                norms::SpatialKind::NegSobolev => "neg_sobolev",
            }
        );
        let _ = writeln!(text, "sobolev_order = {}", spec.norm().sobolev_order());
        let _ = writeln!(text, "p = {}", p_text(spec.norm().p()));
        let _ = writeln!(text, "theta = {}", fmt_f64(spec.theta()));
        let _ = writeln!(text, "scaling_sum = {}", fmt_f64(spec.scaling_sum()));
        match report.final_value {
            Some(v) => {
                let _ = writeln!(text, "final_value = {}", fmt_f64(v));
            }
            None => {
                let _ = writeln!(text, "final_value = diverged");
            }
        }
        let _ = writeln!(
            text,
            "verdict = {}",
            match report.verdict {
                Verdict::Finite => "finite",
                Verdict::Diverged => "diverged",
            }
        );
    }
    fs::write(path, text).map_err(|e| CliError::Input(format!("writing {}: {e}", path.display())))
}

fn summary_text(
    manifest_path: &Path,
    traj: &solver::Trajectory,
    reports: &[criteria::CriterionReport],
    indicator: &criteria::BlowupIndicator,
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "run summary");
    let _ = writeln!(s, "===========");
    let _ = writeln!(s, "manifest: {}", manifest_path.display());
    let _ = writeln!(s, "verdict: {}", run_verdict_text(traj.verdict()));
    let _ = writeln!(
        s,
        "snapshots: {} (t = {} .. {})",
        traj.snapshots().len(),
        traj.first_time().unwrap_or(f64::NAN),
        traj.last_time().unwrap_or(f64::NAN)
    );
    if let Some(energy) = traj.diagnostic(solver::DIAG_ENERGY) {
        let _ = writeln!(
            s,
            "energy: initial {} final {}",
            fmt_f64(energy.values()[0]),
            fmt_f64(energy.last_value())
        );
    }
    if !reports.is_empty() {
        let _ = writeln!(s);
        let _ = writeln!(
            s,
            "{:<16} {:>8} {:>6} {:>24} {:>9}",
            "criterion", "theta", "p", "final", "verdict"
        );
        for r in reports {
            let final_text = match r.final_value {
                Some(v) => fmt_f64(v),
                None => "diverged".to_string(),
            };
            let _ = writeln!(
                s,
                "{:<16} {:>8} {:>6} {:>24} {:>9}",
                r.spec.id(),
                format!("{:.4}", r.spec.theta()),
                p_text(r.spec.norm().p()),
                final_text,
                match r.verdict {
                    Verdict::Finite => "finite",
                    Verdict::Diverged => "DIVERGED",
                }
            );
        }
    }
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "blowup indicator sup ||curl u||_(H^-1,inf): {}{}",
        fmt_f64(indicator.sup()),
        if indicator.diverged() { " (diverged)" } else { "" }
    );
    if !traj.notices().is_empty() {
        let _ = writeln!(s);
        let _ = writeln!(s, "notices:");
        for n in traj.notices() {
            let _ = writeln!(s, "  - {n}");
        }
    }
    s
}

/// Executes a manifest: runs the solver, then writes checkpoints at the
/// snapshot cadence, the diagnostics CSV, the machine-readable criterion
/// reports, and a human-readable summary. Divergence is a recorded result,
/// not a failure.
pub fn cmd_run(manifest_path: &Path, out_flag: Option<&Path>) -> Result<(), CliError> {
    let text = fs::read_to_string(manifest_path)
        .map_err(|e| CliError::Input(format!("reading {}: {e}", manifest_path.display())))?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let parsed = manifest::parse(&text, base).map_err(|e| CliError::Input(e.to_string()))?;
    let out_dir: PathBuf = match (out_flag, &parsed.out_dir) {
        (Some(dir), _) => dir.to_path_buf(),
        (None, Some(dir)) => dir.clone(),
        (None, None) => {
            return Err(CliError::Usage(
                "no output directory: pass --out or set [output] dir".to_string(),
            ))
        }
    };
    fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Input(format!("creating {}: {e}", out_dir.display())))?;

    let u0 = parsed
        .initial_field()
        .map_err(|e| CliError::Input(e.to_string()))?;
    let traj = solver::run(&parsed.config, &u0, &parsed.monitors)
        .map_err(|e| CliError::Input(e.to_string()))?;

    let mut reports = Vec::new();
    for spec in &parsed.monitors {
        reports.push(
            criteria::evaluate(&traj, spec).map_err(|e| CliError::Input(e.to_string()))?,
        );
    }
    let indicator =
        criteria::blowup_indicator(&traj).map_err(|e| CliError::Input(e.to_string()))?;

    fs::write(out_dir.join("manifest.txt"), &text)
        .map_err(|e| CliError::Input(format!("writing manifest copy: {e}")))?;
    write_diagnostics_csv(&out_dir.join("diagnostics.csv"), &traj)?;
    write_criteria_file(&out_dir.join("criteria.txt"), &traj, &reports, &indicator)?;
    for (i, (_, field)) in traj.snapshots().iter().enumerate() {
        let name = format!("state_{i:06}.ckpt");
        checkpoint::write_field(&out_dir.join(&name), field)
            .map_err(|e| CliError::Input(format!("writing {name}: {e}")))?;
    }
    let summary = summary_text(manifest_path, &traj, &reports, &indicator);
    fs::write(out_dir.join("summary.txt"), &summary)
        .map_err(|e| CliError::Input(format!("writing summary: {e}")))?;
    print!("{summary}");
    println!("outputs in {}", out_dir.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// norms
// ---------------------------------------------------------------------------

fn parse_list(raw: &str, what: &str) -> Result<Vec<f64>, CliError> {
    raw.split(',')
        .map(|tok| {
            let tok = tok.trim();
            if tok.eq_ignore_ascii_case("inf") {
                Ok(f64::INFINITY)
            } else {
                tok.parse::<f64>()
                    .map_err(|_| CliError::Usage(format!("bad {what} entry `{tok}`")))
            }
        })
        .collect()
}

/// Prints `‖A^{s/2} v‖_p` for every requested `(s, p)` pair.
pub fn cmd_norms(field_path: &Path, p_raw: &str, s_raw: &str) -> Result<(), CliError> {
    let field = checkpoint::read_field(field_path).map_err(|e| CliError::Input(e.to_string()))?;
    let p_list = parse_list(p_raw, "p")?;
    let s_list = parse_list(s_raw, "s")?;
    let label = field.meta.label.clone().unwrap_or_else(|| "field".to_string());
    let time = field
        .meta
        .time
        .map(|t| format!(", t = {t}"))
        .unwrap_or_default();
    println!(
        "{label} (n = {}, L = {}{time})",
        field.grid().n(),
        field.grid().box_length()
    );
    println!("{:<10} {:<8} {}", "s", "p", "||A^(s/2) v||_p");
    for &s in &s_list {
        let order = FractionalOrder::new(s)
            .map_err(|e| CliError::Usage(format!("bad Sobolev order {s}: {e}")))?;
        for &p in &p_list {
            let cell = match norms::sobolev_norm(&field, order, p) {
                Ok(v) => fmt_f64(v),
                Err(norms::NormError::SingularMode) => "singular (field carries a mean)".to_string(),
                Err(norms::NormError::InvalidExponent(p)) => {
                    return Err(CliError::Usage(format!("p must exceed 1, got {p}")))
                }
                Err(e) => return Err(CliError::Input(e.to_string())),
            };
            println!("{:<10} {:<8} {cell}", s, p_text(p));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

#[derive(Debug, Default, Clone)]
struct StoredCriterion {
    id: String,
    theta: f64,
    p: String,
    final_value: Option<f64>,
    verdict: String,
}

fn parse_criteria_file(text: &str) -> Result<(Vec<StoredCriterion>, String, f64, bool), String> {
    let mut criteria_out = Vec::new();
    let mut run_verdict = String::new();
    let mut blowup_sup = f64::NAN;
    let mut blowup_diverged = false;
    let mut section = String::new();
    let mut current: Option<StoredCriterion> = None;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            if let Some(c) = current.take() {
                criteria_out.push(c);
            }
            section = name.to_string();
            if section == "criterion" {
                current = Some(StoredCriterion::default());
            }
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| format!("bad line `{line}`"))?;
        let (key, value) = (key.trim(), value.trim());
        match (section.as_str(), key) {
            ("run", "verdict") => run_verdict = value.to_string(),
            ("run", _) => {}
            ("blowup", "sup") => {
                blowup_sup = value.parse().map_err(|_| format!("bad sup `{value}`"))?
            }
            ("blowup", "diverged") => blowup_diverged = value == "true",
            ("criterion", k) => {
                let c = current.as_mut().ok_or("criterion entry outside a block")?;
                match k {
                    "id" => c.id = value.to_string(),
                    "theta" => {
                        c.theta = value.parse().map_err(|_| format!("bad theta `{value}`"))?
                    }
                    "p" => c.p = value.to_string(),
                    "final_value" => {
                        c.final_value = if value == "diverged" {
                            None
                        } else {
                            Some(value.parse().map_err(|_| format!("bad final `{value}`"))?)
                        }
                    }
                    "verdict" => c.verdict = value.to_string(),
                    _ => {}
                }
            }
            _ => return Err(format!("entry `{key}` outside a known section")),
        }
    }
    if let Some(c) = current.take() {
        criteria_out.push(c);
    }
    Ok((criteria_out, run_verdict, blowup_sup, blowup_diverged))
}

fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), String> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or("empty CSV")?
        .split(',')
        .map(|s| s.to_string())
        .collect();
    let mut columns = vec![Vec::new(); header.len()];
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != header.len() {
            return Err(format!("ragged CSV row `{line}`"));
        }
        for (col, cell) in columns.iter_mut().zip(cells) {
            col.push(cell.parse::<f64>().map_err(|_| format!("bad cell `{cell}`"))?);
        }
    }
    Ok((header, columns))
}

/// Aggregates a completed run directory into `report.txt`, cross-checking
/// stored criterion values against the CSV series; optionally emits a
/// gnuplot script over the CSV columns.
pub fn cmd_report(dir: &Path, emit_plot_script: bool) -> Result<(), CliError> {
    let csv_path = dir.join("diagnostics.csv");
    let criteria_path = dir.join("criteria.txt");
    let csv_text = fs::read_to_string(&csv_path)
        .map_err(|e| CliError::Input(format!("missing diagnostics CSV {}: {e}", csv_path.display())))?;
    let crit_text = fs::read_to_string(&criteria_path)
        .map_err(|e| CliError::Input(format!("missing {}: {e}", criteria_path.display())))?;

    let (stored, run_verdict, sup, sup_diverged) =
        parse_criteria_file(&crit_text).map_err(CliError::Input)?;
    let (header, columns) = parse_csv(&csv_text).map_err(CliError::Input)?;
    if header.first().map(String::as_str) != Some("t") {
        return Err(CliError::Input("CSV must start with a t column".to_string()));
    }
    let times = &columns[0];

    let mut out = String::new();
    let _ = writeln!(out, "criterion report for {}", dir.display());
    let _ = writeln!(out, "run verdict: {run_verdict}");
    let _ = writeln!(
        out,
        "blowup indicator sup: {}{}",
        fmt_f64(sup),
        if sup_diverged { " (diverged)" } else { "" }
    );
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<16} {:>8} {:>6} {:>24} {:>24} {:>9}",
        "criterion", "theta", "p", "final(stored)", "final(recomputed)", "verdict"
    );
    let mut mismatches = 0;
    for c in &stored {
        let recomputed = header
            .iter()
            .position(|h| h == &c.id)
            .filter(|_| !times.is_empty())
            .and_then(|col| {
                let series = if run_verdict == "diverged" {
                    TimeSeries::new_diverged(times.clone(), columns[col].clone())
                } else {
                    TimeSeries::new(times.clone(), columns[col].clone())
                }
                .ok()?;
                norms::time_lebesgue_norm(&series, c.theta).ok()
            });
        let stored_text = c
            .final_value
            .map(fmt_f64)
            .unwrap_or_else(|| "diverged".to_string());
        let recomputed_text = recomputed.map(fmt_f64).unwrap_or_else(|| "-".to_string());
        if let (Some(a), Some(b)) = (c.final_value, recomputed) {
            if (a - b).abs() > 1e-9 * b.abs().max(1e-12) {
                mismatches += 1;
            }
        }
        let _ = writeln!(
            out,
            "{:<16} {:>8.4} {:>6} {:>24} {:>24} {:>9}",
            c.id, c.theta, c.p, stored_text, recomputed_text, c.verdict
        );
    }
    if mismatches > 0 {
        let _ = writeln!(
            out,
            "warning: {mismatches} stored final value(s) disagree with the CSV recomputation"
        );
    }
    fs::write(dir.join("report.txt"), &out)
        .map_err(|e| CliError::Input(format!("writing report: {e}")))?;
    print!("{out}");

    if emit_plot_script {
        let mut script = String::new();
        let _ = writeln!(script, "# gnuplot script over diagnostics.csv");
        let _ = writeln!(script, "set datafile separator ','");
        let _ = writeln!(script, "set key autotitle columnhead outside");
        let _ = writeln!(script, "set xlabel 't'");
        let _ = writeln!(script, "set logscale y");
        let mut plots = Vec::new();
        for (i, name) in header.iter().enumerate().skip(1) {
            plots.push(format!(
                "'diagnostics.csv' using 1:{} with lines title '{}'",
                i + 1,
                name
            ));
        }
        let _ = writeln!(script, "plot {}", plots.join(", \\\n     "));
        let _ = writeln!(script, "pause -1 'press enter'");
        fs::write(dir.join("plot_diagnostics.gp"), script)
            .map_err(|e| CliError::Input(format!("writing plot script: {e}")))?;
        println!("plot script: {}", dir.join("plot_diagnostics.gp").display());
    }
    Ok(())
}
