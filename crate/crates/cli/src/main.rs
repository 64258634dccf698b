fn main() {
    std::process::exit(cfcheck::commands::run_from_args(std::env::args_os()));
}
