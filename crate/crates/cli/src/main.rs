use std::process::ExitCode;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match nslab_cli::dispatch(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            if matches!(e, nslab_cli::CliError::Usage(_)) {
                eprintln!();
                eprintln!("{}", nslab_cli::usage());
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
