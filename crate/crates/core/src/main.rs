use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use gibbs_info::cli::{run, Cli};
use gibbs_info::Error;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match cli.command.into_config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match run(&config) {
        Ok(outcome) => {
            if let Some(text) = &outcome.stdout {
                let _ = std::io::stdout().write_all(text.as_bytes());
            }
            for note in &outcome.report.notes {
                eprintln!("{note}");
            }
            for path in &outcome.written {
                eprintln!("wrote {}", path.display());
            }
            let code = outcome.exit_code(config.strict);
            if code != 0 {
                if let Some(claim) = &outcome.report.failed_claim {
                    eprintln!("error: claim failed: {claim}");
                }
            }
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::Resource { .. } = e {
                eprintln!(
                    "hint: lower the largest n, use fewer instance labels, or raise the ceiling"
                );
            }
            ExitCode::from(1)
        }
    }
}
