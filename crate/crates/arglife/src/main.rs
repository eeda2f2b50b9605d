fn main() {
    std::process::exit(arglife::cli::run());
}
