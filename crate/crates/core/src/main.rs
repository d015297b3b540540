fn main() {
    std::process::exit(funnelquad::cli::main_with_args(std::env::args_os()));
}
