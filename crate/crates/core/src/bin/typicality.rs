fn main() {
    std::process::exit(typicality::cli::run(std::env::args_os()));
}
