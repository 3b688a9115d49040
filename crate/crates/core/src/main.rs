fn main() {
    std::process::exit(conflict_watch::cli::main_with_args(std::env::args_os()));
}
