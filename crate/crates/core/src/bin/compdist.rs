fn main() {
    std::process::exit(compdist::cli::run(std::env::args_os()));
}
