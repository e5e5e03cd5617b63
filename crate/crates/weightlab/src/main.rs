fn main() {
    std::process::exit(weightlab::cli::run_cli(std::env::args()));
}
