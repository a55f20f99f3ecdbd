//! Run manifests: line-oriented `key = value` under `[section]` headers.
//!
//! ```text
//! [grid]
//! n = 16
//! box_length = 6.283185307179586    # optional, default 2π
//! dealias_fraction = 0.6666666666666666  # optional, default 2/3
//!
//! [solver]
//! viscosity = 0.1
//! dt = 0.001
//! horizon = 1.0
//! save_every = 10          # optional
//! cfl_safety = 0.5         # optional
//! forcing = zero           # optional: zero | file <checkpoint path>
//!
//! [initial]
//! kind = beltrami          # beltrami | taylor_green | random
//! k = 1                    # beltrami
//! amplitude = 1.0          # beltrami
//! decay_exponent = 2.0     # random
//! seed = 1                 # random stream; also recorded for provenance
//!
//! [monitors]
//! criterion = neg_sobolev p=inf
//! criterion = bkm
//! criterion = serrin p=6
//!
//! [output]
//! dir = runs/beltrami      # optional; `--out` overrides
//! ```
//!
//! Unknown sections or keys are errors: manifests are part of the
//! reproducibility contract and typos must not pass silently.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use nslab_core::criteria::{self, CriterionSpec};
use nslab_core::solver::SolverConfig;
use nslab_core::{generators, GridSpec, SpectralVectorField};

use crate::checkpoint;

#[derive(Debug)]
pub struct ManifestError {
    pub line: Option<usize>,
    pub message: String,
}

impl ManifestError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ManifestError {
            line: Some(line),
            message: message.into(),
        }
    }

    fn general(message: impl Into<String>) -> Self {
        ManifestError {
            line: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ManifestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "manifest line {line}: {}", self.message),
            None => write!(f, "manifest: {}", self.message),
        }
    }
}

impl std::error::Error for ManifestError {}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    Beltrami { k: u32, amplitude: f64 },
    TaylorGreen,
    Random { decay_exponent: f64 },
}

#[derive(Debug)]
pub struct RunManifest {
    pub config: SolverConfig,
    pub initial: InitialCondition,
    pub monitors: Vec<CriterionSpec>,
    pub out_dir: Option<PathBuf>,
    pub seed: u64,
}

impl RunManifest {
    pub fn initial_field(&self) -> Result<SpectralVectorField, ManifestError> {
        let grid = self.config.grid();
        match self.initial {
            InitialCondition::Beltrami { k, amplitude } => generators::beltrami(grid, k, amplitude)
                .map_err(|e| ManifestError::general(format!("initial condition: {e}"))),
            InitialCondition::TaylorGreen => Ok(generators::taylor_green(grid)),
            InitialCondition::Random { decay_exponent } => {
                Ok(generators::random_solenoidal(grid, self.seed, decay_exponent))
            }
        }
    }
}

struct Entry {
    line: usize,
    value: String,
    consumed: bool,
}

#[derive(Default)]
struct Section {
    line: usize,
    entries: BTreeMap<String, Entry>,
    /// `criterion = ...` lines, which may repeat.
    criteria: Vec<(usize, String)>,
}

fn split_sections(text: &str) -> Result<BTreeMap<String, Section>, ManifestError> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim().to_string();
            if !["grid", "solver", "initial", "monitors", "output"].contains(&name.as_str()) {
                return Err(ManifestError::at(lineno, format!("unknown section [{name}]")));
            }
            if sections.contains_key(&name) {
                return Err(ManifestError::at(lineno, format!("duplicate section [{name}]")));
            }
            sections.insert(
                name.clone(),
                Section {
                    line: lineno,
                    ..Section::default()
                },
            );
            current = Some(name);
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ManifestError::at(lineno, "expected `key = value`"))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        let section = current
            .as_ref()
            .ok_or_else(|| ManifestError::at(lineno, "entry before any [section] header"))?;
        let section = sections.get_mut(section).expect("section was inserted");
        if key == "criterion" {
            section.criteria.push((lineno, value));
        } else if section
            .entries
            .insert(
                key.clone(),
                Entry {
                    line: lineno,
                    value,
                    consumed: false,
                },
            )
            .is_some()
        {
            return Err(ManifestError::at(lineno, format!("duplicate key `{key}`")));
        }
    }
    Ok(sections)
}

impl Section {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.get_mut(key).map(|e| {
            e.consumed = true;
            (e.line, e.value.clone())
        })
    }

    fn require(&mut self, key: &str, section: &str) -> Result<(usize, String), ManifestError> {
        self.take(key)
            .ok_or_else(|| ManifestError::at(self.line, format!("[{section}] needs `{key}`")))
    }

    fn reject_unconsumed(&self, section: &str) -> Result<(), ManifestError> {
        for (key, entry) in &self.entries {
            if !entry.consumed {
                return Err(ManifestError::at(
                    entry.line,
                    format!("unknown key `{key}` in [{section}]"),
                ));
            }
        }
        Ok(())
    }
}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64, ManifestError> {
    if value.eq_ignore_ascii_case("inf") {
        return Ok(f64::INFINITY);
    }
    value
        .parse::<f64>()
        .map_err(|_| ManifestError::at(line, format!("`{key}` is not a number: `{value}`")))
}

fn parse_usize(line: usize, key: &str, value: &str) -> Result<usize, ManifestError> {
    value
        .parse::<usize>()
        .map_err(|_| ManifestError::at(line, format!("`{key}` is not an integer: `{value}`")))
}

fn parse_criterion(line: usize, value: &str) -> Result<CriterionSpec, ManifestError> {
    let mut parts = value.split_whitespace();
    let name = parts
        .next()
        .ok_or_else(|| ManifestError::at(line, "empty criterion"))?;
    let mut p: Option<f64> = None;
    for part in parts {
        match part.split_once('=') {
            Some(("p", v)) => p = Some(parse_f64(line, "p", v)?),
            _ => {
                return Err(ManifestError::at(
                    line,
                    format!("unknown criterion argument `{part}`"),
                ))
            }
        }
    }
    let need_p = |p: Option<f64>| {
        p.ok_or_else(|| ManifestError::at(line, format!("criterion `{name}` needs p=<value>")))
    };
    match name {
        "neg_sobolev" => criteria::bkm_neg_sobolev(need_p(p)?)
            .map_err(|e| ManifestError::at(line, e.to_string())),
        "serrin" => {
            criteria::serrin(need_p(p)?).map_err(|e| ManifestError::at(line, e.to_string()))
        }
        "bkm" => {
            if p.is_some() {
                return Err(ManifestError::at(line, "`bkm` takes no p argument"));
            }
            Ok(criteria::bkm_classic())
        }
        other => Err(ManifestError::at(line, format!("unknown criterion `{other}`"))),
    }
}

/// Parses a manifest. Relative paths (forcing checkpoints, output dir) are
/// resolved against `base_dir`, normally the manifest's parent directory.
pub fn parse(text: &str, base_dir: &Path) -> Result<RunManifest, ManifestError> {
    let mut sections = split_sections(text)?;

    let mut grid_section = sections
        .remove("grid")
        .ok_or_else(|| ManifestError::general("missing [grid] section"))?;
    let (nline, nval) = grid_section.require("n", "grid")?;
    let n = parse_usize(nline, "n", &nval)?;
    let box_length = match grid_section.take("box_length") {
        Some((l, v)) => parse_f64(l, "box_length", &v)?,
        None => std::f64::consts::TAU,
    };
    let dealias = match grid_section.take("dealias_fraction") {
        Some((l, v)) => parse_f64(l, "dealias_fraction", &v)?,
        None => nslab_core::grid::DEFAULT_DEALIAS_FRACTION,
    };
    grid_section.reject_unconsumed("grid")?;
    let grid = GridSpec::new(n, box_length, dealias)
        .map_err(|e| ManifestError::at(nline, e.to_string()))?;

    let mut solver_section = sections
        .remove("solver")
        .ok_or_else(|| ManifestError::general("missing [solver] section"))?;
    let (vl, vv) = solver_section.require("viscosity", "solver")?;
    let viscosity = parse_f64(vl, "viscosity", &vv)?;
    let (dl, dv) = solver_section.require("dt", "solver")?;
    let dt = parse_f64(dl, "dt", &dv)?;
    let (hl, hv) = solver_section.require("horizon", "solver")?;
    let horizon = parse_f64(hl, "horizon", &hv)?;
    let mut config = SolverConfig::new(grid, viscosity, dt, horizon)
        .map_err(|e| ManifestError::at(solver_section.line, e.to_string()))?;
    if let Some((l, v)) = solver_section.take("save_every") {
        config = config
            .with_save_every(parse_usize(l, "save_every", &v)?)
            .map_err(|e| ManifestError::at(l, e.to_string()))?;
    }
    if let Some((l, v)) = solver_section.take("cfl_safety") {
        config = config
            .with_cfl_safety(parse_f64(l, "cfl_safety", &v)?)
            .map_err(|e| ManifestError::at(l, e.to_string()))?;
    }
    if let Some((l, v)) = solver_section.take("forcing") {
        if v != "zero" {
            let path = v
                .strip_prefix("file")
                .map(str::trim)
                .filter(|p| !p.is_empty())
                .ok_or_else(|| {
                    ManifestError::at(l, "forcing must be `zero` or `file <checkpoint>`")
                })?;
            let resolved = base_dir.join(path);
            let g = checkpoint::read_field(&resolved)
                .map_err(|e| ManifestError::at(l, format!("forcing checkpoint: {e}")))?;
            config = config
                .with_forcing(g)
                .map_err(|e| ManifestError::at(l, e.to_string()))?;
        }
    }
    solver_section.reject_unconsumed("solver")?;

    let mut initial_section = sections
        .remove("initial")
        .ok_or_else(|| ManifestError::general("missing [initial] section"))?;
    let (kl, kind) = initial_section.require("kind", "initial")?;
    let seed = match initial_section.take("seed") {
        Some((l, v)) => v
            .parse::<u64>()
            .map_err(|_| ManifestError::at(l, format!("`seed` is not an integer: `{v}`")))?,
        None => 1,
    };
    let initial = match kind.as_str() {
        "beltrami" => {
            let k = match initial_section.take("k") {
                Some((l, v)) => parse_usize(l, "k", &v)? as u32,
                None => 1,
            };
            let amplitude = match initial_section.take("amplitude") {
                Some((l, v)) => parse_f64(l, "amplitude", &v)?,
                None => 1.0,
            };
            InitialCondition::Beltrami { k, amplitude }
        }
        "taylor_green" => InitialCondition::TaylorGreen,
        "random" => {
            let decay_exponent = match initial_section.take("decay_exponent") {
                Some((l, v)) => parse_f64(l, "decay_exponent", &v)?,
                None => 2.0,
            };
            if !(decay_exponent >= 0.0 && decay_exponent.is_finite()) {
                return Err(ManifestError::at(kl, "decay_exponent must be >= 0"));
            }
            InitialCondition::Random { decay_exponent }
        }
        other => {
            return Err(ManifestError::at(
                kl,
                format!("unknown initial condition `{other}` (beltrami | taylor_green | random)"),
            ))
        }
    };
    initial_section.reject_unconsumed("initial")?;

    let mut monitors = Vec::new();
    if let Some(section) = sections.remove("monitors") {
        section.reject_unconsumed("monitors")?;
        for (line, value) in &section.criteria {
            monitors.push(parse_criterion(*line, value)?);
        }
    }

    let mut out_dir = None;
    if let Some(mut section) = sections.remove("output") {
        if let Some((_, v)) = section.take("dir") {
            out_dir = Some(base_dir.join(v));
        }
        section.reject_unconsumed("output")?;
    }

    Ok(RunManifest {
        config,
        initial,
        monitors,
        out_dir,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "\
# decay regression
[grid]
n = 16

[solver]
viscosity = 0.1
dt = 0.001
horizon = 1.0
save_every = 10

[initial]
kind = beltrami
k = 1
amplitude = 1.0

[monitors]
criterion = neg_sobolev p=inf
criterion = bkm
criterion = serrin p=6
";

    #[test]
    fn parses_a_complete_manifest() {
        let m = parse(GOOD, Path::new(".")).unwrap();
        assert_eq!(m.config.grid().n(), 16);
        assert_eq!(m.config.viscosity(), 0.1);
        assert_eq!(m.config.save_every(), 10);
        assert_eq!(m.monitors.len(), 3);
        assert_eq!(m.monitors[0].id(), "bkm-hm1-pinf");
        assert_eq!(
            m.initial,
            InitialCondition::Beltrami { k: 1, amplitude: 1.0 }
        );
        assert!(m.initial_field().is_ok());
    }

    #[test]
    fn rejects_unknown_keys_and_sections() {
        let bad = GOOD.replace("save_every", "save_evry");
        let err = parse(&bad, Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("save_evry"), "{err}");

        let bad = format!("{GOOD}\n[plotting]\nx = 1\n");
        assert!(parse(&bad, Path::new(".")).is_err());
    }

    #[test]
    fn rejects_criterion_with_too_small_exponent() {
        let bad = GOOD.replace("p=6", "p=3");
        let err = parse(&bad, Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("p"), "{err}");
    }

    #[test]
    fn missing_required_sections_fail() {
        let err = parse("[grid]\nn = 8\n", Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("[solver]"), "{err}");
    }

    #[test]
    fn inf_and_defaults() {
        let text = "\
[grid]
n = 8
[solver]
viscosity = 1.0
dt = 0.01
horizon = 0.1
[initial]
kind = random
seed = 42
[monitors]
criterion = neg_sobolev p=inf
";
        let m = parse(text, Path::new(".")).unwrap();
        assert_eq!(m.seed, 42);
        assert!(m.monitors[0].norm().p().is_infinite());
        assert_eq!(m.config.cfl_safety(), 0.5);
        assert_eq!(
            m.initial,
            InitialCondition::Random { decay_exponent: 2.0 }
        );
    }
}
