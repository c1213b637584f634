fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(carve_lab::cli::dispatch(&argv));
}
