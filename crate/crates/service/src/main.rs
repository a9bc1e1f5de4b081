fn main() -> std::process::ExitCode {
    gasrotor_service::cli::main()
}
