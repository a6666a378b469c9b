fn main() -> std::process::ExitCode {
    catlab::cli::main()
}
