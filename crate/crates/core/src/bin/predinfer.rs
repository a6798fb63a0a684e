fn main() {
    std::process::exit(predinfer::cli::run(std::env::args_os()));
}
