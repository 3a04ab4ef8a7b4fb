fn main() {
    std::process::exit(mbqt_core::cli::run(std::env::args_os()));
}
