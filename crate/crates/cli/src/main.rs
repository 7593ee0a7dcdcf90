use clap::Parser;

fn main() {
    let cli = mvar_cli::Cli::parse();
    std::process::exit(mvar_cli::run(cli));
}
