fn main() {
    std::process::exit(graphon_lab::cli::run(std::env::args_os()));
}
