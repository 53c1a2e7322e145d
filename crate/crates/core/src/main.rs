use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(superint::cli::run(std::env::args_os()))
}
