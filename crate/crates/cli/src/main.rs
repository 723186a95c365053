fn main() {
    std::process::exit(braidwork_cli::main_with_args(std::env::args_os()));
}
