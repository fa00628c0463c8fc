fn main() {
    std::process::exit(chorus::cli::run(std::env::args_os()));
}
