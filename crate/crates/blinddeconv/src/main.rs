fn main() {
    std::process::exit(blinddeconv::cli::run(std::env::args_os()));
}
