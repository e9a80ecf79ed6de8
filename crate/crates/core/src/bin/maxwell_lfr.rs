use std::process::ExitCode;

fn main() -> ExitCode {
    maxwell_lfr::cli::main()
}
