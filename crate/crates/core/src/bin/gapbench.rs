fn main() {
    std::process::exit(gap_core::cli::cli_main(std::env::args_os()));
}
