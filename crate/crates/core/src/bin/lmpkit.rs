fn main() {
    std::process::exit(lmpkit::cli::run(std::env::args_os()));
}
