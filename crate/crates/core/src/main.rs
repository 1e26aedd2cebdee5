fn main() {
    std::process::exit(coopdesign::cli::dispatch(std::env::args_os()));
}
