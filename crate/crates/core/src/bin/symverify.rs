fn main() {
    std::process::exit(symverify::cli::run(std::env::args_os()));
}
