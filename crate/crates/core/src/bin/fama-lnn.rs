fn main() -> std::process::ExitCode {
    fama_lnn::cli::main()
}
