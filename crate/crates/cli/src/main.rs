use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ghz_qkd::harness::{
    compare_tables, emit_report, oracle_table, run_experiment, selftest, simulate_scenario,
    write_report, ExperimentConfig, ReportFormat, Scenario,
};
use ghz_qkd::protocol::DecodePolicy;
use ghz_qkd::Error;

/// Simulator for GHZ-state key distribution without classical communication.
#[derive(Parser, Debug)]
#[command(name = "ghz-qkd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a Monte-Carlo experiment and emit a report.
    Run(RunArgs),
    /// Print the exact outcome table of one single-qubit scenario.
    Oracle {
        /// honest-coin{0,1}, intercept-ba-coin{0,1}, intercept-ab-coin{0,1}, entangle-coin{0,1}
        scenario: String,
        #[arg(long, value_enum, default_value_t = OracleFormat::Text)]
        format: OracleFormat,
    },
    /// Check the exact invariants and every scenario against Monte-Carlo.
    Selftest {
        /// Monte-Carlo samples per scenario; 0 skips the sampling pass.
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// key=value file; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    sessions: Option<u64>,
    /// none | intercept-ab | intercept-ba | entangle-cnot
    #[arg(long)]
    attack: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "t-c")]
    t_c: Option<u64>,
    #[arg(long)]
    max_rounds: Option<u32>,
    #[arg(long)]
    attack_probability: Option<f64>,
    #[arg(long)]
    decode_all: bool,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Compare one scenario's Monte-Carlo table (--sessions samples) with its exact table.
    #[arg(long)]
    oracle_check: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OracleFormat {
    Text,
    Json,
}

/// Errors the user can fix by changing the invocation.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(e: impl ToString) -> anyhow::Error {
    anyhow!(UsageError(e.to_string()))
}

fn classify(e: Error) -> anyhow::Error {
    match e {
        Error::Config(_) | Error::UnknownAttack(_) | Error::UnknownScenario(_) => usage(e),
        other => other.into(),
    }
}

const CONFIG_KEYS: [&str; 10] = [
    "n",
    "sessions",
    "attack",
    "seed",
    "t-c",
    "max-rounds",
    "attack-probability",
    "decode-all",
    "format",
    "out",
];

fn parse_config_file(text: &str) -> anyhow::Result<HashMap<String, String>> {
    let mut values = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key=value", lineno + 1)))?;
        let key = key.trim().replace('_', "-");
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(usage(format!(
                "config line {}: unknown key {key:?}",
                lineno + 1
            )));
        }
        values.insert(key, value.trim().to_string());
    }
    Ok(values)
}

fn file_value<T: FromStr>(file: &HashMap<String, String>, key: &str) -> anyhow::Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    file.get(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|e| usage(format!("config key {key}: {e}")))
        })
        .transpose()
}

struct RunPlan {
    config: ExperimentConfig,
    format: ReportFormat,
    out: Option<PathBuf>,
    oracle_check: Option<Scenario>,
}

fn resolve(args: RunArgs) -> anyhow::Result<RunPlan> {
    let file = match &args.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            parse_config_file(&text)?
        }
        None => HashMap::new(),
    };
    let defaults = ExperimentConfig::default();

    let attack = match args.attack.or(file_value::<String>(&file, "attack")?) {
        Some(name) => name.parse().map_err(classify)?,
        None => defaults.attack,
    };
    let decode_all = args.decode_all || file_value::<bool>(&file, "decode-all")?.unwrap_or(false);
    let config = ExperimentConfig {
        n: args.n.or(file_value(&file, "n")?).unwrap_or(defaults.n),
        sessions: args
            .sessions
            .or(file_value(&file, "sessions")?)
            .unwrap_or(defaults.sessions),
        attack,
        seed: args
            .seed
            .or(file_value(&file, "seed")?)
            .unwrap_or(defaults.seed),
        t_c: args
            .t_c
            .or(file_value(&file, "t-c")?)
            .unwrap_or(defaults.t_c),
        max_rounds: args
            .max_rounds
            .or(file_value(&file, "max-rounds")?)
            .unwrap_or(defaults.max_rounds),
        attack_probability: args
            .attack_probability
            .or(file_value(&file, "attack-probability")?)
            .unwrap_or(defaults.attack_probability),
        decode_policy: if decode_all {
            DecodePolicy::DecodeAll
        } else {
            DecodePolicy::AbortOnFirstFail
        },
    };
    config.validate().map_err(classify)?;

    let format = match args.format {
        Some(FormatArg::Json) => ReportFormat::Json,
        Some(FormatArg::Csv) => ReportFormat::Csv,
        None => file_value::<ReportFormat>(&file, "format")?.unwrap_or_default(),
    };
    let out = args.out.or(file_value::<PathBuf>(&file, "out")?);
    let oracle_check = args
        .oracle_check
        .map(|s| s.parse::<Scenario>().map_err(classify))
        .transpose()?;
    Ok(RunPlan {
        config,
        format,
        out,
        oracle_check,
    })
}

fn run(args: RunArgs) -> anyhow::Result<bool> {
    let plan = resolve(args)?;

    if let Some(scenario) = plan.oracle_check {
        let oracle = oracle_table(scenario)?;
        let empirical = simulate_scenario(scenario, plan.config.sessions, plan.config.seed)?;
        let checks = compare_tables(&oracle, &empirical);
        println!("{oracle}");
        println!(
            "{:<12} {:>12} {:>12} {:>12}  result",
            "cell", "exact", "empirical", "std_error"
        );
        for c in &checks {
            let verdict = if c.passed { "ok" } else { "FAIL" };
            println!(
                "{:<12} {:>12.6} {:>12.6} {:>12.6}  {verdict}",
                c.cell, c.exact, c.empirical, c.std_error
            );
        }
        return Ok(checks.iter().all(|c| c.passed));
    }

    let report = run_experiment(&plan.config).map_err(classify)?;
    match &plan.out {
        Some(path) => {
            write_report(&report, plan.format, path)
                .with_context(|| format!("writing {}", path.display()))?;
            eprintln!(
                "wrote {} ({} sessions, detection {:?}, key agreement {:?})",
                path.display(),
                report.sessions,
                report.detection.rate,
                report.key_agreement.rate
            );
        }
        None => print!("{}", emit_report(&report, plan.format)?),
    }
    Ok(true)
}

fn oracle(scenario: &str, format: OracleFormat) -> anyhow::Result<bool> {
    let scenario: Scenario = scenario.parse().map_err(classify)?;
    let table = oracle_table(scenario)?;
    match format {
        OracleFormat::Text => println!("{table}"),
        OracleFormat::Json => println!("{}", serde_json::to_string_pretty(&table)?),
    }
    Ok(true)
}

fn run_selftest(samples: u64, seed: u64) -> anyhow::Result<bool> {
    let checks = selftest(samples, seed)?;
    for c in &checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        if c.detail.is_empty() {
            println!("[{tag}] {}", c.name);
        } else {
            println!("[{tag}] {} ({})", c.name, c.detail);
        }
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} checks, {} failed", checks.len(), failed);
    Ok(failed == 0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Oracle { scenario, format } => oracle(&scenario, format),
        Command::Selftest { samples, seed } => run_selftest(samples, seed),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            eprintln!("run `ghz-qkd --help` for usage");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_parsing() {
        let file =
            parse_config_file("# demo\nn = 8\nattack=intercept-ba\nmax_rounds=3\n\n").unwrap();
        assert_eq!(file["n"], "8");
        assert_eq!(file["max-rounds"], "3");
        assert!(parse_config_file("bogus=1").is_err());
        assert!(parse_config_file("n 8").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("ghz-qkd-cfg-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.cfg");
        fs::write(&path, "n=8\nseed=5\nformat=csv\n").unwrap();
        let plan = resolve(RunArgs {
            config: Some(path),
            n: Some(3),
            ..RunArgs::default()
        })
        .unwrap();
        assert_eq!(plan.config.n, 3);
        assert_eq!(plan.config.seed, 5);
        assert_eq!(plan.format, ReportFormat::Csv);
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn invalid_values_are_usage_errors() {
        let err = resolve(RunArgs {
            n: Some(0),
            ..RunArgs::default()
        })
        .err()
        .unwrap();
        assert!(err.is::<UsageError>());
        let err = resolve(RunArgs {
            attack: Some("mitm".into()),
            ..RunArgs::default()
        })
        .err()
        .unwrap();
        assert!(err.is::<UsageError>());
    }
}
