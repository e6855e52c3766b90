fn main() {
    std::process::exit(cbf_sched::cli::cli_main(std::env::args_os()));
}
