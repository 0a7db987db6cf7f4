use std::process::ExitCode;

fn main() -> ExitCode {
    occupancy::cli::main_with_args(std::env::args_os())
}
