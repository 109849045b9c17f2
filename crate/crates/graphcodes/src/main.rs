fn main() {
    if let Err(e) = graphcodes::experiments::cli_main(std::env::args().skip(1)) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
