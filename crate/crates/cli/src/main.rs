fn main() {
    std::process::exit(ramanujan_cli::run(std::env::args_os()));
}
