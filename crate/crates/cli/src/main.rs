fn main() {
    std::process::exit(lwf_cli::app::run(std::env::args_os()));
}
