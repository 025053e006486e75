fn main() -> std::process::ExitCode {
    assess_opt::cli::main()
}
