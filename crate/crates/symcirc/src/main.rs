fn main() {
    std::process::exit(symcirc::cli::run());
}
