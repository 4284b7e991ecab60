fn main() {
    std::process::exit(purestate::cli::run(std::env::args_os()));
}
