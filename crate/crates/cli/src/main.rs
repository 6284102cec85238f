use std::process::ExitCode;

use quadrelax_cli::{parse_invocation, run};

fn main() -> ExitCode {
    let cli = match parse_invocation(std::env::args_os()) {
        Ok(c) => c,
        // prints help/version to stdout (exit 0) or usage errors to stderr (exit 2)
        Err(e) => e.exit(),
    };
    let mut out = std::io::stdout().lock();
    match run(&cli, &mut out) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("quadrelax: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
