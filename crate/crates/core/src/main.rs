fn main() {
    std::process::exit(blocksparse::cli::run(std::env::args_os()));
}
