fn main() {
    std::process::exit(ibupre::cli::run_cli(std::env::args_os()));
}
