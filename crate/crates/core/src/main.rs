fn main() {
    std::process::exit(workcell::cli::run(std::env::args_os()));
}
