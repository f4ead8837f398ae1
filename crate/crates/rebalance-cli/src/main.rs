fn main() {
    std::process::exit(rebalance_cli::run(std::env::args_os()));
}
