fn main() {
    std::process::exit(avor_core::cli::main_with_args(std::env::args_os()));
}
