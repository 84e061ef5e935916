use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = bigset::cli::Cli::parse();
    if let Err(e) = bigset::cli::run(&cli) {
        eprintln!("bigset: {e}");
        std::process::exit(e.exit_code());
    }
}
