use clap::Parser;

use eigencnt::cli::{run_count, run_synth, Cli, Command, EXIT_FATAL};

fn main() {
    // Usage errors exit with 1, not clap's default 2, which here means "unreliable count".
    let cli = Cli::try_parse().unwrap_or_else(|e| {
        let code = if e.use_stderr() { EXIT_FATAL } else { 0 };
        let _ = e.print();
        std::process::exit(code);
    });
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("eigencnt: {e}");
            std::process::exit(EXIT_FATAL);
        }
    }
    let code = match &cli.command {
        Command::Count(opts) => run_count(opts),
        Command::Synth(opts) => run_synth(opts),
    };
    std::process::exit(code);
}
