fn main() {
    std::process::exit(parsimony_cli::run_from_args(std::env::args_os()));
}
