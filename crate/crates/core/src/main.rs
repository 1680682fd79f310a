fn main() {
    std::process::exit(roughwave::cli::main_with_args(std::env::args_os()));
}
