fn main() {
    std::process::exit(fbsplit::cli::run(std::env::args()));
}
