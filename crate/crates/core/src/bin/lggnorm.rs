fn main() -> std::process::ExitCode {
    lggnorm::cli::main_with_args(std::env::args_os())
}
