use clap::Parser;

fn main() {
    std::process::exit(htnlearn::cli::run(htnlearn::cli::Cli::parse()));
}
