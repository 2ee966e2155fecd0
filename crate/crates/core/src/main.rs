fn main() {
    std::process::exit(lindescent::cli::run(std::env::args_os()));
}
