fn main() {
    std::process::exit(star_cli::cli::cli_main(std::env::args_os()));
}
