fn main() {
    std::process::exit(instant_assist::cli::main());
}
