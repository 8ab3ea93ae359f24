fn main() {
    std::process::exit(shapley_relu::cli::main_with_args(std::env::args_os()));
}
