mod args;
mod report;
mod run;

use std::io::Write;

use clap::Parser;

fn main() {
    let cli = args::Cli::parse();
    let report = run::run(&cli);
    for d in &report.diagnostics {
        if report.exit_code >= run::EXIT_INPUT {
            eprintln!("error: {d}");
        }
    }
    let mut text = serde_json::to_string_pretty(&report).expect("reports serialize");
    text.push('\n');
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        std::process::exit(run::EXIT_NUMERIC);
    }
    std::process::exit(report.exit_code);
}
