fn main() {
    std::process::exit(netbif::cli::cli_main(std::env::args_os()));
}
