fn main() {
    std::process::exit(tailwave::run_command(std::env::args_os()));
}
