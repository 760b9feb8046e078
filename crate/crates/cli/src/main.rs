mod args;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde_json::{json, Value};

use args::{Cli, Command, Experiment, Format};
use run::{execute, Fail, Output, R};

const USAGE: u8 = 1;
const MATH: u8 = 2;
const VERIFY: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli) {
        Ok(status) => ExitCode::from(status),
        Err(Fail::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(USAGE)
        }
        Err(Fail::Lib(e)) => {
            eprintln!("error: {e}");
            let code = if e.is_mathematical() {
                MATH
            } else if matches!(e, rotwalk::Error::Certificate(_)) {
                VERIFY
            } else {
                USAGE
            };
            ExitCode::from(code)
        }
    }
}

fn dispatch(cli: Cli) -> R<u8> {
    let exp = match cli.command {
        Command::Run(r) => load_experiment(&r.config)?,
        command => Experiment { seed: cli.seed, command },
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Fail::Usage("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Fail::Usage(format!("thread pool: {e}")))?;
    let out = pool.install(|| execute(&exp.command, exp.seed))?;
    let config = serde_json::to_value(&exp)?;
    if matches!(exp.command, Command::Construct(_)) {
        write_files(&config, &out, cli.out.as_deref().unwrap_or(Path::new(".")))?;
        emit(&json!({ "config": config, "result": out.result }), None, Format::Json, None)?;
    } else {
        emit(&json!({ "config": config, "result": out.result }), out.csv.as_deref(), cli.format, cli.out)?;
    }
    Ok(out.status as u8)
}

/// Reads a bare experiment, a JSON output (`config` field) or a CSV output
/// (`# config:` header line).
fn load_experiment(path: &Path) -> R<Experiment> {
    let text = std::fs::read_to_string(path)?;
    let v: Value = match text.lines().find_map(|l| l.strip_prefix("# config: ")) {
        Some(line) => serde_json::from_str(line)?,
        None => serde_json::from_str(&text)?,
    };
    let v = v.get("config").cloned().unwrap_or(v);
    serde_json::from_value(v).map_err(|e| Fail::Usage(format!("{}: not an experiment config: {e}", path.display())))
}

fn write_files(config: &Value, out: &Output, dir: &Path) -> R<()> {
    std::fs::create_dir_all(dir)?;
    for (name, value) in &out.files {
        let doc = json!({ "config": config, "result": value });
        std::fs::write(dir.join(name), serde_json::to_string_pretty(&doc)? + "\n")?;
    }
    Ok(())
}

fn emit(doc: &Value, csv: Option<&str>, format: Format, out: Option<PathBuf>) -> R<()> {
    let text = match format {
        Format::Json => serde_json::to_string_pretty(doc)? + "\n",
        Format::Csv => {
            let csv = csv.ok_or_else(|| Fail::Usage("this command has no CSV form".into()))?;
            format!("# config: {}\n{csv}", serde_json::to_string(&doc["config"])?)
        }
    };
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}
