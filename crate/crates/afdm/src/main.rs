fn main() {
    std::process::exit(afdm::cli::run());
}
