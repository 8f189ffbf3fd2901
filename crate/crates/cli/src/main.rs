fn main() {
    std::process::exit(g2flat_cli::run(std::env::args_os()));
}
