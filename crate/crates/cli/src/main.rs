use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RSL_LOG", "warn")).init();
    let cli = rsl_cli::Cli::parse();
    if let Err(e) = rsl_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
