fn main() -> std::process::ExitCode {
    spin_epsilon::cli::main_with_args(std::env::args_os())
}
