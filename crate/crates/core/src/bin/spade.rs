fn main() {
    std::process::exit(spade_core::cli::run(std::env::args_os()));
}
