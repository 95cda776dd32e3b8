fn main() {
    std::process::exit(sinterp::cli::run(std::env::args_os()));
}
