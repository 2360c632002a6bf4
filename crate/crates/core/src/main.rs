fn main() {
    std::process::exit(helixwake::cli::main_with_args(std::env::args_os()));
}
