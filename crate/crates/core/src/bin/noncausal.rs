fn main() {
    std::process::exit(noncausal_core::cli::run(std::env::args_os()));
}
