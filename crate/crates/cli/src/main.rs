fn main() {
    std::process::exit(heun_cli::run_cli(std::env::args_os()));
}
