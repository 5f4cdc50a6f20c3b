fn main() {
    std::process::exit(stillsim::cli::dispatch(std::env::args_os()));
}
