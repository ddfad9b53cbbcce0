fn main() {
    std::process::exit(switchlayer_cli::run(std::env::args_os()));
}
