//! Command-line laboratory around the spectral core: verification battery,
//! run orchestration with binary checkpoints and CSV diagnostics, norm
//! tables, and report generation.

use std::fmt;

pub mod checkpoint;
pub mod commands;
pub mod manifest;

/// Exit discipline: 0 success (including recorded DIVERGED verdicts),
/// 1 verification failure, 2 usage or input errors.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(String),
    ChecksFailed,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input(_) => 2,
            CliError::ChecksFailed => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::ChecksFailed => write!(f, "verification failed"),
        }
    }
}

impl std::error::Error for CliError {}

const USAGE: &str = "\
nslab — spectral Navier-Stokes laboratory on the periodic box

USAGE:
    nslab verify [--n N] [--seed S] [--tol T]
        Run the operator-identity and norm battery (defaults: n=16,
        seed=1, tol=1e-10). Exit 0 iff every residual is below T.

    nslab run --manifest FILE --out DIR
        Execute a run manifest; write checkpoints, diagnostics.csv,
        criteria.txt, and summary.txt into DIR. A diverged trajectory
        is a recorded result (exit 0).

    nslab norms --field FILE --p LIST --s LIST
        Print ||A^(s/2) v||_p for every (s, p) pair, e.g.
        --p 2,4,inf --s -1,0,1.

    nslab report --in DIR [--emit-plot-script]
        Aggregate a finished run directory into report.txt; optionally
        emit a gnuplot script over the CSV columns.

Exit codes: 0 success (including DIVERGED verdicts), 1 verification
failure, 2 usage or input errors.
";

fn flag_value<'a>(
    args: &'a [String],
    name: &str,
    seen: &mut Vec<usize>,
) -> Result<Option<&'a str>, CliError> {
    for (i, a) in args.iter().enumerate() {
        if a == name {
            let v = args
                .get(i + 1)
                .ok_or_else(|| CliError::Usage(format!("{name} needs a value")))?;
            seen.push(i);
            seen.push(i + 1);
            return Ok(Some(v));
        }
    }
    Ok(None)
}

fn reject_unknown(args: &[String], seen: &[usize]) -> Result<(), CliError> {
    for (i, a) in args.iter().enumerate() {
        if !seen.contains(&i) {
            return Err(CliError::Usage(format!("unexpected argument `{a}`")));
        }
    }
    Ok(())
}

/// Parses `args` (without the program name) and runs the subcommand.
pub fn dispatch(args: &[String]) -> Result<(), CliError> {
    let Some(cmd) = args.first() else {
        return Err(CliError::Usage("no subcommand".to_string()));
    };
    let rest = &args[1..];
    let mut seen: Vec<usize> = Vec::new();
    match cmd.as_str() {
        "verify" => {
            let n = match flag_value(rest, "--n", &mut seen)? {
                Some(v) => v
                    .parse::<usize>()
                    .map_err(|_| CliError::Usage(format!("bad --n `{v}`")))?,
                None => 16,
            };
            let seed = match flag_value(rest, "--seed", &mut seen)? {
                Some(v) => v
                    .parse::<u64>()
                    .map_err(|_| CliError::Usage(format!("bad --seed `{v}`")))?,
                None => 1,
            };
            let tol = match flag_value(rest, "--tol", &mut seen)? {
                Some(v) => v
                    .parse::<f64>()
                    .map_err(|_| CliError::Usage(format!("bad --tol `{v}`")))?,
                None => 1e-10,
            };
            reject_unknown(rest, &seen)?;
            commands::cmd_verify(n, seed, tol)
        }
        "run" => {
            let manifest = flag_value(rest, "--manifest", &mut seen)?
                .ok_or_else(|| CliError::Usage("run needs --manifest FILE".to_string()))?
                .to_string();
            let out = flag_value(rest, "--out", &mut seen)?.map(str::to_string);
            reject_unknown(rest, &seen)?;
            commands::cmd_run(std::path::Path::new(&manifest), out.as_deref().map(std::path::Path::new))
        }
        "norms" => {
            let field = flag_value(rest, "--field", &mut seen)?
                .ok_or_else(|| CliError::Usage("norms needs --field FILE".to_string()))?
                .to_string();
            let p = flag_value(rest, "--p", &mut seen)?
                .ok_or_else(|| CliError::Usage("norms needs --p LIST".to_string()))?
                .to_string();
            let s = flag_value(rest, "--s", &mut seen)?
                .ok_or_else(|| CliError::Usage("norms needs --s LIST".to_string()))?
                .to_string();
            reject_unknown(rest, &seen)?;
            commands::cmd_norms(std::path::Path::new(&field), &p, &s)
        }
        "report" => {
            let dir = flag_value(rest, "--in", &mut seen)?
                .ok_or_else(|| CliError::Usage("report needs --in DIR".to_string()))?
                .to_string();
            let emit = rest.iter().position(|a| a == "--emit-plot-script");
            if let Some(i) = emit {
                seen.push(i);
            }
            reject_unknown(rest, &seen)?;
            commands::cmd_report(std::path::Path::new(&dir), emit.is_some())
        }
        "help" | "--help" | "-h" => {
            print!("{USAGE}");
            Ok(())
        }
        other => Err(CliError::Usage(format!("unknown subcommand `{other}`"))),
    }
}

pub fn usage() -> &'static str {
    USAGE
}
