fn main() {
    std::process::exit(eshelby_lab::cli::main_with(std::env::args_os()));
}
