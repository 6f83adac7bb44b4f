fn main() {
    std::process::exit(evac_core::cli::cli_main(std::env::args_os()));
}
