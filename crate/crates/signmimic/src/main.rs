use clap::Parser;

fn main() {
    let cli = signmimic::cli::Cli::parse();
    if let Err(e) = signmimic::cli::run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
