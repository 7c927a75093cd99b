fn main() {
    std::process::exit(csa_pcs_cli::main_with_args(std::env::args_os()));
}
