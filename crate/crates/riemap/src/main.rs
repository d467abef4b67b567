fn main() {
    std::process::exit(riemap::cli::run(std::env::args_os()));
}
