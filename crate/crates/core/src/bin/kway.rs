fn main() {
    std::process::exit(kway_relay::cli::main_with_args(std::env::args_os()));
}
