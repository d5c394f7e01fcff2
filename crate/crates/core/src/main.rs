fn main() {
    std::process::exit(convexdyn::cli::run(std::env::args_os()));
}
