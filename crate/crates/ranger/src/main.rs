fn main() {
    std::process::exit(stretch_ranger::cli::main_with(std::env::args_os()));
}
