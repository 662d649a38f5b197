fn main() {
    std::process::exit(patchy::cli::run(std::env::args_os()));
}
