fn main() {
    std::process::exit(cli_harness::run(std::env::args_os()));
}
