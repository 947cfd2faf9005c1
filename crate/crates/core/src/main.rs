fn main() {
    std::process::exit(relu_lab::cli::run(std::env::args_os()));
}
