fn main() {
    std::process::exit(spikeloc::cli::run_from_args(std::env::args_os()));
}
