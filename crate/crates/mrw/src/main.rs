fn main() {
    std::process::exit(mrw::cli::main_with_args(std::env::args_os().collect()));
}
