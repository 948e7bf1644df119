use clap::Parser;
use spinweave::cli::{dispatch, exit_code, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(err) = dispatch(&cli) {
        eprintln!("error: {err}");
        std::process::exit(exit_code(&err));
    }
}
