fn main() {
    std::process::exit(circlaw_cli::main_with_args(std::env::args_os()));
}
