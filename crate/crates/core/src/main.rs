fn main() {
    std::process::exit(ngs::cli::run_cli(std::env::args_os()));
}
