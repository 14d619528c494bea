fn main() {
    std::process::exit(cimeasure::cli::run_cli(std::env::args_os()));
}
