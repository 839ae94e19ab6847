use clap::Parser;
use exactsac_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("exactsac: {e}");
        std::process::exit(e.exit_code());
    }
}
