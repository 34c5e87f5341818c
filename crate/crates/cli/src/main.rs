fn main() {
    std::process::exit(geocorpus_cli::run(std::env::args_os()));
}
