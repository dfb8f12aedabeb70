use clap::Parser;

fn main() {
    let cli = slmut_cli::Cli::parse();
    std::process::exit(slmut_cli::run(cli));
}
