fn main() {
    std::process::exit(h2plan::cli::main());
}
