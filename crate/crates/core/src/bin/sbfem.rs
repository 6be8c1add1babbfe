fn main() {
    std::process::exit(sbfem_seepage::cli::run_cli(std::env::args_os()));
}
