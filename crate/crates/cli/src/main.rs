fn main() {
    std::process::exit(liftcut_cli::run(std::env::args_os()));
}
