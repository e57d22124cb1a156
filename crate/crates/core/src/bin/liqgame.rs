fn main() {
    std::process::exit(liqgame::cli::run(std::env::args_os()));
}
