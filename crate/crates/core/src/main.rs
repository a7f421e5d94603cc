fn main() {
    std::process::exit(betawalk::cli::run(std::env::args_os()));
}
