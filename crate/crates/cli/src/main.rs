fn main() {
    std::process::exit(cubesum_cli::run(std::env::args_os()));
}
