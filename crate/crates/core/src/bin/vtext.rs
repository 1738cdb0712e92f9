fn main() {
    std::process::exit(vtext::cli::main_with_args(std::env::args_os()));
}
