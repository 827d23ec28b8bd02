fn main() {
    std::process::exit(monopath::cli::main_with(std::env::args_os()));
}
