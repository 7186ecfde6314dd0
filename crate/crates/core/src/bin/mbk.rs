fn main() {
    std::process::exit(minibatch_kmeans::cli::main_with_args(std::env::args_os()));
}
