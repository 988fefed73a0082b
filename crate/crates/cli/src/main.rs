fn main() {
    std::process::exit(fbmdiff_cli::main_with(std::env::args_os()));
}
