fn main() {
    std::process::exit(ipr_rmt_cli::run(std::env::args_os()));
}
