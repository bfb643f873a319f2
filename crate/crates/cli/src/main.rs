fn main() {
    std::process::exit(tremorscope_cli::run(std::env::args_os()));
}
