fn main() {
    std::process::exit(mubar::cli::main_with_args(std::env::args_os()));
}
