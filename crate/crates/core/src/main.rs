fn main() {
    std::process::exit(hawklab::cli::main());
}
