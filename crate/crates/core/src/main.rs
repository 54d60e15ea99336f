fn main() {
    std::process::exit(abprop::cli::run(std::env::args_os()));
}
