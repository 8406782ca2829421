fn main() {
    std::process::exit(scfo::cli::run());
}
