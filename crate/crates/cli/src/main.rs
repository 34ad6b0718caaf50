use std::io::Read;
use std::process::ExitCode;

use clap::Parser;
use conecalc_cli::{parse_session, run_command, CliError, Command};

/// Exact computations with cochain complexes, maps, cones and roofs.
#[derive(Parser, Debug)]
#[command(name = "conecalc", version)]
struct Args {
    /// Session file, or `-` for standard input.
    session: String,
    #[command(subcommand)]
    command: Command,
}

fn read_session(path: &str) -> Result<String, CliError> {
    let mut text = String::new();
    let res = if path == "-" {
        std::io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        std::fs::read_to_string(path).map(|t| text = t)
    };
    res.map_err(|e| CliError::Io(format!("{path}: {e}")))?;
    Ok(text)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = read_session(&args.session)
        .and_then(|text| parse_session(&text))
        .and_then(|s| run_command(&s, &args.command));
    match result {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("conecalc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
