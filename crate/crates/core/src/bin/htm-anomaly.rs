fn main() {
    std::process::exit(htm_anomaly::harness::main_with_args(std::env::args_os()));
}
