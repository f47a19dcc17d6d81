use clap::Parser;

fn main() {
    let cli = toi_cli::Cli::parse();
    std::process::exit(toi_cli::exit_code(toi_cli::run(&cli)));
}
