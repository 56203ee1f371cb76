fn main() {
    std::process::exit(streampca::cli::main_with_args(std::env::args_os()));
}
