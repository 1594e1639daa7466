fn main() -> std::process::ExitCode {
    cpcboard::cli::main()
}
