fn main() {
    std::process::exit(twospin::cli::main_with_args(std::env::args_os()));
}
