use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use levy_inventory_cli::{execute, load_config, thread_cap, Cli, CliError, Format};

fn run(cli: &Cli) -> Result<(), (CliError, Format)> {
    let format_hint = cli.command.common().format.unwrap_or_default();
    let cfg = load_config(cli.command.common()).map_err(|e| (e, format_hint))?;
    let format = cfg.output.format;
    let report = execute(&cli.command, &cfg).map_err(|e| (e, format))?;
    if format == Format::Csv {
        for note in &report.notes {
            eprintln!("{note}");
        }
    }
    let text = report.render(format);
    match &cfg.output.path {
        Some(path) => std::fs::write(path, text).map_err(|e| (e.into(), format))?,
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| (e.into(), format))?,
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();

    let threads = match thread_cap() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }

    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err((e, format)) => {
            eprintln!("error: {e}");
            if format == Format::Json {
                let doc = serde_json::json!({
                    "error": { "code": e.code(), "exit_code": e.exit_code(), "message": e.to_string() }
                });
                println!("{}", serde_json::to_string_pretty(&doc).expect("error serializes"));
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
