fn main() -> std::process::ExitCode {
    dmk_core::cli::main()
}
