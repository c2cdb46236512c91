fn main() { std::process::exit(gammadesign::cli::run(std::env::args_os())); }
