fn main() {
    std::process::exit(descriptor_net::cli::cli_main(std::env::args_os()));
}
