fn main() {
    std::process::exit(sobel_cli::run(std::env::args_os()));
}
