fn main() {
    std::process::exit(fleet_dispatch::cli::run(std::env::args_os()));
}
