fn main() {
    std::process::exit(truncdisp::cli::run(std::env::args_os()));
}
