fn main() {
    std::process::exit(redac::cli::dispatch(std::env::args_os()));
}
