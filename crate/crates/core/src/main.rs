fn main() {
    std::process::exit(gfkernel::cli::main_with_args(std::env::args_os()));
}
