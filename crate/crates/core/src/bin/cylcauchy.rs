fn main() {
    std::process::exit(cylcauchy::cli::run(std::env::args_os()));
}
