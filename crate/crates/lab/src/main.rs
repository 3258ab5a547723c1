fn main() {
    std::process::exit(gtl_lab::cli::main_with_args(std::env::args_os()));
}
