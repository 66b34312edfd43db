use clap::Parser;

fn main() {
    let cli = phasefield::cli::Cli::parse();
    std::process::exit(phasefield::cli::run(cli));
}
