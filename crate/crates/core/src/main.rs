fn main() {
    std::process::exit(cipherloop::cli::main_with_args(std::env::args_os()));
}
