fn main() {
    std::process::exit(semtx::cli::run(std::env::args_os()));
}
