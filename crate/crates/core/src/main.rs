fn main() {
    std::process::exit(replikit::cli::cli_run(std::env::args_os()));
}
