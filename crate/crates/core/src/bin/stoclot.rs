fn main() {
    env_logger::init();
    std::process::exit(stoclot::cli::run(std::env::args_os()));
}
