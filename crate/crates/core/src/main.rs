use std::process::ExitCode;

fn main() -> ExitCode {
    piv::cli::main_with_args(std::env::args_os())
}
