fn main() {
    std::process::exit(ppt_core::cli::main());
}
