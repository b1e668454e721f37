use clap::Parser;

fn main() {
    let cli = freedisk_cli::Cli::parse();
    std::process::exit(freedisk_cli::run(&cli));
}
