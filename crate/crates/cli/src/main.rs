fn main() {
    std::process::exit(bcinv_cli::run(std::env::args_os()));
}
