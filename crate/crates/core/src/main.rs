fn main() {
    std::process::exit(lattice_growth::cli::run(std::env::args_os()));
}
