use clap::error::ErrorKind;
use clap::Parser;
use vqspec_cli::{exit, run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let code = match Cli::try_parse() {
        Ok(cli) => run(&cli),
        Err(e) => {
            let _ = e.print();
            // clap uses 2 for usage errors; 2 is reserved for incomplete runs.
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => exit::OK,
                _ => exit::INPUT,
            }
        }
    };
    std::process::exit(code);
}
