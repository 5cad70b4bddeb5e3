fn main() {
    std::process::exit(homsol_cli::run(std::env::args_os()));
}
