fn main() {
    std::process::exit(driftboost::cli::run(std::env::args_os()));
}
