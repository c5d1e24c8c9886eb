fn main() {
    std::process::exit(raq_prep::cli_run(std::env::args_os()));
}
