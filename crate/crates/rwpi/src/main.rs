fn main() {
    std::process::exit(rwpi::cli::dispatch(std::env::args().skip(1).collect()));
}
