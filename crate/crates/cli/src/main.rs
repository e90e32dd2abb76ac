fn main() {
    std::process::exit(sdrdu_cli::run(std::env::args_os()));
}
