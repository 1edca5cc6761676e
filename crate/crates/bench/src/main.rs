fn main() {
    std::process::exit(newsbench::cli::main_with_args(std::env::args_os()));
}
