fn main() {
    std::process::exit(wpcn_core::cli::run(std::env::args_os()));
}
