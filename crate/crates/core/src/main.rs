use std::process::ExitCode;

fn main() -> ExitCode {
    kbmaint::cli::main()
}
