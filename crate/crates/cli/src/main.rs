fn main() {
    std::process::exit(dyngossip_cli::run_cli(std::env::args_os()));
}
