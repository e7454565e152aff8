fn main() {
    std::process::exit(classplit::cli::run(std::env::args_os()));
}
