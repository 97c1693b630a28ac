fn main() {
    std::process::exit(sentrade_core::cli::main_with(std::env::args_os()));
}
