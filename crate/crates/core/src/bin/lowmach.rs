fn main() {
    std::process::exit(lowmach::cli::run_command(std::env::args().collect()));
}
