fn main() {
    std::process::exit(dynbc::cli::main_with_args(std::env::args_os()));
}
