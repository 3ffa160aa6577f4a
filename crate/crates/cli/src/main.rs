fn main() {
    std::process::exit(ans_cli::run(std::env::args_os()));
}
