fn main() {
    std::process::exit(trafficcast_cli::main_from(std::env::args_os()));
}
