fn main() {
    std::process::exit(flc::cli::run_cli(std::env::args_os()));
}
