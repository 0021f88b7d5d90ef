fn main() {
    std::process::exit(varlag_cli::run(std::env::args_os()));
}
