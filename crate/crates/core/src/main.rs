fn main() {
    let code = polynl::cli::run(std::env::args_os());
    std::process::exit(code);
}
