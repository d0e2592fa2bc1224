fn main() {
    std::process::exit(einvex::cli::run());
}
