fn main() {
    std::process::exit(seqtunnel::cli::main_with_args(std::env::args_os()));
}
