fn main() {
    std::process::exit(retroloop::cli::run(std::env::args_os()));
}
