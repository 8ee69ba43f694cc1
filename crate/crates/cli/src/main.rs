use clap::Parser;

fn main() {
    let cli = sheaflab_cli::Cli::parse();
    let outcome = sheaflab_cli::run(cli);
    print!("{}", outcome.stdout);
    eprint!("{}", outcome.stderr);
    std::process::exit(outcome.exit_code);
}
