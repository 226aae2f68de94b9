fn main() {
    std::process::exit(cable_lab::cli::run(std::env::args_os()));
}
