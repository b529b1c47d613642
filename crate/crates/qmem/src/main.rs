fn main() {
    std::process::exit(qmem::cli::run(std::env::args_os()));
}
