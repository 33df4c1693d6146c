fn main() -> std::process::ExitCode {
    multitime::cli::main()
}
