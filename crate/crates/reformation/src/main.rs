fn main() {
    std::process::exit(reformation::cli::run());
}
