fn main() {
    std::process::exit(ghx_core::cli::run(std::env::args_os()));
}
