fn main() {
    std::process::exit(ensnlg::cli::main_with_args(std::env::args_os()));
}
