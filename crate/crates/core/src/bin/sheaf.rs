fn main() {
    std::process::exit(sheaf_logic::cli::main_with(std::env::args_os()));
}
