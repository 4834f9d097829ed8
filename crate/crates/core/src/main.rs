fn main() {
    std::process::exit(friedrichs::cli::run(std::env::args_os()));
}
