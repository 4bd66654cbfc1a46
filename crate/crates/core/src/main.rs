fn main() {
    std::process::exit(phaseloc::cli::run(std::env::args_os()));
}
