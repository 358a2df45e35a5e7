fn main() {
    std::process::exit(gkdv_lab::cli_dispatch(std::env::args_os()));
}
