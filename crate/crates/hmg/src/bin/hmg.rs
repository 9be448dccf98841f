fn main() {
    std::process::exit(hmg::cli::run());
}
