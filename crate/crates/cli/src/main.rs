mod commands;
mod input;
mod report;

use std::fmt;
use std::process::ExitCode;

use clap::{ArgMatches, Command, CommandFactory, FromArgMatches, Parser};
use serde_json::{Map, Value as Json};

use commands::Verb;
use report::Report;

#[derive(Debug)]
pub enum CliError {
    Domain(String),
    ChecksFailed,
}

impl From<autoweight_core::Error> for CliError {
    fn from(e: autoweight_core::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Domain(m) => f.write_str(m),
            CliError::ChecksFailed => f.write_str("checks failed"),
        }
    }
}

/// Automatic sequences, exponential sums and weighted ergodic averages.
#[derive(Parser, Debug)]
#[command(name = "autoweight", version)]
pub struct Cli {
    /// Emit JSON instead of aligned text.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for every randomized sampler.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker thread cap.
    #[arg(long, global = true, env = "AUTOWEIGHT_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    verb: Verb,
}

fn raw_entries(cmd: &Command, m: &ArgMatches, out: &mut Map<String, Json>, skip_global: bool) {
    for arg in cmd.get_arguments() {
        if skip_global && arg.is_global_set() {
            continue;
        }
        let id = arg.get_id().as_str();
        let vals: Vec<String> = m
            .get_raw(id)
            .map(|r| r.map(|v| v.to_string_lossy().into_owned()).collect())
            .unwrap_or_default();
        let v = match vals.len() {
            0 => Json::Null,
            1 => Json::String(vals[0].clone()),
            _ => Json::Array(vals.into_iter().map(Json::String).collect()),
        };
        out.insert(arg.get_long().unwrap_or(id).to_string(), v);
    }
}

fn config(m: &ArgMatches) -> Json {
    let root = Cli::command();
    let mut out = Map::new();
    raw_entries(&root, m, &mut out, false);
    if let Some((name, sub)) = m.subcommand() {
        out.insert("verb".into(), Json::String(name.into()));
        if let Some(cmd) = root.find_subcommand(name) {
            raw_entries(cmd, sub, &mut out, true);
        }
    }
    Json::Object(out)
}

fn main() -> ExitCode {
    let matches = Cli::command().get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let mut report = Report::new();
    report.set("config", config(&matches));
    match commands::run(&cli.verb, cli.seed, &mut report) {
        Ok(()) => {
            print!("{}", report.render(cli.json));
            ExitCode::SUCCESS
        }
        Err(CliError::ChecksFailed) => {
            print!("{}", report.render(cli.json));
            eprintln!("error: checks failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
