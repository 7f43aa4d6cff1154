fn main() {
    std::process::exit(natstar::cli::run(std::env::args_os()));
}
