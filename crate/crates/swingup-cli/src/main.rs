fn main() {
    std::process::exit(swingup_cli::main_with(std::env::args_os()));
}
