fn main() {
    std::process::exit(mildflow::cli::main_from(std::env::args_os()));
}
