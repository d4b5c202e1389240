fn main() {
    std::process::exit(cone_schrodinger_cli::run(std::env::args_os()));
}
