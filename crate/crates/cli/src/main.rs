fn main() {
    std::process::exit(turbcloud_cli::main_with_args(std::env::args_os()));
}
