fn main() {
    hunt_lab::cli::init_threads();
    std::process::exit(hunt_lab::cli::run_cli(std::env::args_os()));
}
