//! `bindkit replay` and `bindkit bench`.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bindkit::binding::{LogLevel, LogLevels};
use bindkit::replay::{load_events, run_benchmark, run_replay, synthetic_drag, PostOp, ReplayError, ReplayOptions, Scenario};

#[derive(Parser)]
#[command(name = "bindkit", version, about = "Replays event traces through declarative bindings")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Replay a trace and print the report as JSON.
    Replay(ReplayArgs),
    /// Compare binding dispatch against direct callbacks.
    Bench(BenchArgs),
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    scenario: String,
    /// NDJSON events or a robot script.
    #[arg(long)]
    trace: String,
    /// Undo/redo operations applied after the replay.
    #[arg(long, value_delimiter = ',')]
    post: Vec<PostOp>,
    /// Log levels for every binding, overriding the scenario.
    #[arg(long, value_delimiter = ',')]
    log: Option<Vec<LogLevel>>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    report: Option<String>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    scenario: String,
    #[arg(long, required_unless_present = "moves", conflicts_with = "moves")]
    trace: Option<String>,
    /// Synthetic trace: press on the first shape, this many moves, release.
    #[arg(long)]
    moves: Option<usize>,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long)]
    report: Option<String>,
}

fn write_out(path: Option<&str>, text: &str) -> Result<(), ReplayError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| ReplayError::Io { path: p.to_owned(), source }),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn replay(a: ReplayArgs) -> Result<(), ReplayError> {
    let scenario = Scenario::load(&a.scenario)?;
    let events = load_events(&a.trace, &scenario)?;
    let log = a.log.map(|l| l.into_iter().collect::<LogLevels>());
    let report = run_replay(&scenario, &events, &ReplayOptions { log, post: a.post })?;
    write_out(a.report.as_deref(), &report.to_json())
}

fn bench(a: BenchArgs) -> Result<(), ReplayError> {
    let scenario = Scenario::load(&a.scenario)?;
    let events = match (&a.trace, a.moves) {
        (Some(t), _) => load_events(t, &scenario)?,
        (None, Some(n)) => {
            let s = scenario.shapes.first().ok_or_else(|| ReplayError::Scenario("--moves needs at least one shape".into()))?;
            synthetic_drag(s.id.as_str(), (s.x + 1.0, s.y + 1.0), n)
        }
        (None, None) => unreachable!("clap requires one input"),
    };
    let r = run_benchmark(&scenario, &events, a.reps)?;
    println!("{:<8} {:>14} {:>14}", "path", "mean ns/event", "stddev");
    println!("{:<8} {:>14.2} {:>14.2}", "binding", r.binding.mean_ns_per_event, r.binding.stddev_ns_per_event);
    println!("{:<8} {:>14.2} {:>14.2}", "direct", r.direct.mean_ns_per_event, r.direct.stddev_ns_per_event);
    println!("ratio {:.3} over {} events x {} reps, end states equal", r.ratio, r.events, r.reps);
    if let Some(p) = &a.report {
        write_out(Some(p), &serde_json::to_string_pretty(&r).expect("reports serialize"))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let res = match Cli::parse().cmd {
        Cmd::Replay(a) => replay(a),
        Cmd::Bench(a) => bench(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
