fn main() {
    std::process::exit(rankproj_cli::run(std::env::args_os().skip(1)));
}
