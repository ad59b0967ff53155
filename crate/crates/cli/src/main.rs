use std::process::ExitCode;

fn main() -> ExitCode {
    match semrdp_cli::run(std::env::args_os().collect()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
