fn main() {
    std::process::exit(qsieve::cli::main());
}
