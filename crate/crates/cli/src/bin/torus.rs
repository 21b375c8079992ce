fn main() {
    std::process::exit(torus_cli::run(std::env::args_os()));
}
