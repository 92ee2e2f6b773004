use clap::Parser;
use qradar_cli::{execute, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(report) => print!("{}", report.text),
        Err(e) => {
            eprintln!("qradar: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
