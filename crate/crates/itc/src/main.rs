fn main() {
    std::process::exit(itc::cli::main(std::env::args_os()));
}
