fn main() {
    std::process::exit(lpplab::cli::run(std::env::args_os()));
}
