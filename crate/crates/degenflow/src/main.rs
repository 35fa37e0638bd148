fn main() {
    std::process::exit(degenflow::cli::main_with_args(std::env::args_os()));
}
