fn main() {
    std::process::exit(bitrank::cli::run(std::env::args_os()));
}
