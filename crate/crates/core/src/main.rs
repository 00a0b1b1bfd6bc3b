fn main() -> std::process::ExitCode {
    corrsim::cli::main_with_args(std::env::args_os())
}
