fn main() {
    std::process::exit(restlab_cli::main_with_args(std::env::args_os().collect()));
}
