fn main() {
    std::process::exit(doeblin::cli::main_with_args(std::env::args_os()));
}
