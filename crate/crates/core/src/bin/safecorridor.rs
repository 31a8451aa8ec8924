fn main() {
    std::process::exit(safecorridor::cli::run(std::env::args_os()));
}
