fn main() {
    std::process::exit(clockspec::cli::run(std::env::args_os()));
}
