fn main() {
    let code = safeq::cli::run(std::env::args().skip(1));
    std::process::exit(code);
}
