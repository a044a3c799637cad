fn main() {
    std::process::exit(skewsolve::cli::run(std::env::args_os()));
}
