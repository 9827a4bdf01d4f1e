fn main() {
    std::process::exit(profileiq::cli::main_with_args(std::env::args_os()));
}
