use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use ofdma_alloc::evaluation::compare_methods_with;
use ofdma_alloc::report::{render_rows, run_fixture};
use ofdma_alloc::sweep::{summarize, write_csv, write_summary_csv};
use ofdma_alloc::{
    assign_subcarriers, compute_quotas, generate_channel, parse_scenario, run_sweep, ChannelMatrix,
    Execution, Fixture, Method, Scenario, SweepSpec,
};

/// Proportional-rate OFDMA allocation benchmarks.
#[derive(Parser)]
#[command(name = "ofdma-bench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configured scenario on a generated or imported channel.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Channel grid CSV to use instead of generating one.
        #[arg(long)]
        channel: Option<PathBuf>,
        /// Method to run, or `all` (defaults to the scenario's method).
        #[arg(long)]
        method: Option<String>,
        #[command(flatten)]
        exec: ExecArgs,
    },
    /// Replicate one of the bundled experiments (table4, table5, table6).
    Fixture {
        name: String,
        #[arg(long, default_value = "all")]
        method: String,
        #[command(flatten)]
        exec: ExecArgs,
    },
    /// Monte-Carlo capacity sweep over the number of users.
    Sweep {
        /// Inclusive user range, e.g. `1..8`.
        #[arg(long, default_value = "1..8")]
        users: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Comma-separated methods, or `all`.
        #[arg(long, default_value = "all")]
        methods: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-trial CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-(method, users) means ± standard error as CSV.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Scenario file supplying subcarriers, power, SNR and GA settings.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        subcarriers: Option<usize>,
        #[arg(long = "snr-db")]
        snr_db: Option<f64>,
        #[arg(long = "power-w")]
        power_w: Option<f64>,
        #[command(flatten)]
        exec: ExecArgs,
    },
    /// Export a generated channel grid or check an existing one.
    Channel {
        #[arg(long, conflicts_with = "import", required_unless_present = "import")]
        export: Option<PathBuf>,
        #[arg(long)]
        import: Option<PathBuf>,
        /// Scenario file giving users, subcarriers, SNR and seed.
        #[arg(long, conflicts_with_all = ["users", "subcarriers", "snr_db", "seed"])]
        config: Option<PathBuf>,
        #[arg(long)]
        users: Option<usize>,
        #[arg(long)]
        subcarriers: Option<usize>,
        #[arg(long = "snr-db")]
        snr_db: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args)]
struct ExecArgs {
    /// Include wall-clock runtimes (output is then not reproducible).
    #[arg(long)]
    timings: bool,
    /// Disable data-parallel execution.
    #[arg(long)]
    sequential: bool,
}

impl ExecArgs {
    fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        }
    }
}

fn parse_methods(list: &str) -> Result<Vec<Method>> {
    if list.trim().eq_ignore_ascii_case("all") {
        return Ok(Method::ALL.to_vec());
    }
    let mut methods = Vec::new();
    for item in list.split(',') {
        let m: Method = item.parse()?;
        if !methods.contains(&m) {
            methods.push(m);
        }
    }
    Ok(methods)
}

fn parse_range(text: &str) -> Result<RangeInclusive<usize>> {
    let t = text.trim();
    let (a, b) = match t.split_once("..=").or_else(|| t.split_once("..")) {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (t, t),
    };
    let a: usize = a
        .parse()
        .with_context(|| format!("bad user range `{text}`"))?;
    let b: usize = b
        .parse()
        .with_context(|| format!("bad user range `{text}`"))?;
    if a == 0 || a > b {
        bail!("user range `{text}` must satisfy 1 <= A <= B");
    }
    Ok(a..=b)
}

fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_scenario(&text).with_context(|| format!("in {}", path.display()))
}

fn load_channel(path: &Path) -> Result<ChannelMatrix> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    ChannelMatrix::read_csv(file).with_context(|| format!("in {}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn cmd_run(
    config: &Path,
    channel: Option<&Path>,
    method: Option<&str>,
    exec: &ExecArgs,
) -> Result<()> {
    let scenario = load_scenario(config)?;
    let channel = match channel {
        Some(path) => {
            let h = load_channel(path)?;
            if h.num_users() != scenario.num_users
                || h.num_subcarriers() != scenario.num_subcarriers
            {
                bail!(
                    "channel is {}x{} but the scenario needs {}x{}",
                    h.num_users(),
                    h.num_subcarriers(),
                    scenario.num_users,
                    scenario.num_subcarriers
                );
            }
            h
        }
        None => generate_channel(
            scenario.num_users,
            scenario.num_subcarriers,
            scenario.mean_snr_db,
            scenario.seed,
        )?,
    };
    let methods = match method {
        Some(m) => parse_methods(m)?,
        None => vec![scenario.method],
    };
    let quotas = compute_quotas(&scenario.proportions, scenario.num_subcarriers)?;
    let assignment = assign_subcarriers(&channel, &quotas, scenario.total_power)?;
    let rows = compare_methods_with(&scenario, &channel, &assignment, &methods, exec.execution());

    let mut out = io::stdout().lock();
    writeln!(
        out,
        "users {} subcarriers {} total_power {} W mean_snr {} dB seed {}",
        scenario.num_users,
        scenario.num_subcarriers,
        scenario.total_power,
        scenario.mean_snr_db,
        scenario.seed
    )?;
    writeln!(out, "proportions {:?}", scenario.proportions)?;
    writeln!(out, "quotas {:?}", quotas.counts())?;
    for k in 0..assignment.num_users() {
        let scs: Vec<usize> = assignment.subcarriers_of(k).iter().map(|n| n + 1).collect();
        writeln!(out, "user {} subcarriers {:?}", k + 1, scs)?;
    }
    writeln!(out)?;
    write!(out, "{}", render_rows(&rows, exec.timings))?;
    if let Some(failed) = rows.iter().find_map(|r| r.outcome.as_ref().err()) {
        bail!("{failed}");
    }
    Ok(())
}

fn cmd_fixture(name: &str, method: &str, exec: &ExecArgs) -> Result<()> {
    let fixture: Fixture = name.parse()?;
    let methods = parse_methods(method)?;
    let report = run_fixture(fixture, &methods, exec.execution());
    print!("{}", report.render(exec.timings));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    users: &str,
    trials: usize,
    methods: &str,
    seed: u64,
    out: Option<&Path>,
    summary: Option<&Path>,
    config: Option<&Path>,
    subcarriers: Option<usize>,
    snr_db: Option<f64>,
    power_w: Option<f64>,
    exec: &ExecArgs,
) -> Result<()> {
    let mut base = match config {
        Some(path) => load_scenario(path)?,
        None => Scenario::uniform(1, 64, 1.0)?,
    };
    if let Some(n) = subcarriers {
        base.num_subcarriers = n;
    }
    if let Some(s) = snr_db {
        base.mean_snr_db = s;
    }
    if let Some(p) = power_w {
        base.total_power = p;
    }
    base.seed = seed;
    let spec = SweepSpec {
        users: parse_range(users)?,
        trials,
        methods: parse_methods(methods)?,
        base,
        record_runtime: exec.timings,
    };
    let rows = run_sweep(&spec, exec.execution())?;
    let means = summarize(&rows);
    match out {
        Some(path) => {
            let mut w = create(path)?;
            write_csv(&rows, &mut w)?;
            w.flush()?;
            write_summary_csv(&means, io::stdout().lock())?;
        }
        None => write_csv(&rows, io::stdout().lock())?,
    }
    if let Some(path) = summary {
        let mut w = create(path)?;
        write_summary_csv(&means, &mut w)?;
        w.flush()?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_channel(
    export: Option<&Path>,
    import: Option<&Path>,
    config: Option<&Path>,
    users: Option<usize>,
    subcarriers: Option<usize>,
    snr_db: Option<f64>,
    seed: Option<u64>,
) -> Result<()> {
    if let Some(path) = import {
        let h = load_channel(path)?;
        let values = h.as_slice();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        println!(
            "users {} subcarriers {} mean {mean} min {min} max {max}",
            h.num_users(),
            h.num_subcarriers()
        );
        return Ok(());
    }
    let path = export.expect("clap enforces export or import");
    let (k, n, snr, seed) = match config {
        Some(cfg) => {
            let s = load_scenario(cfg)?;
            (s.num_users, s.num_subcarriers, s.mean_snr_db, s.seed)
        }
        None => (
            users.unwrap_or(1),
            subcarriers.unwrap_or(64),
            snr_db.unwrap_or(50.0),
            seed.unwrap_or(0),
        ),
    };
    let h = generate_channel(k, n, snr, seed)?;
    let mut w = create(path)?;
    h.write_csv(&mut w)?;
    w.flush()?;
    println!("wrote {}x{} channel to {}", k, n, path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            channel,
            method,
            exec,
        } => cmd_run(&config, channel.as_deref(), method.as_deref(), &exec),
        Command::Fixture { name, method, exec } => cmd_fixture(&name, &method, &exec),
        Command::Sweep {
            users,
            trials,
            methods,
            seed,
            out,
            summary,
            config,
            subcarriers,
            snr_db,
            power_w,
            exec,
        } => cmd_sweep(
            &users,
            trials,
            &methods,
            seed,
            out.as_deref(),
            summary.as_deref(),
            config.as_deref(),
            subcarriers,
            snr_db,
            power_w,
            &exec,
        ),
        Command::Channel {
            export,
            import,
            config,
            users,
            subcarriers,
            snr_db,
            seed,
        } => cmd_channel(
            export.as_deref(),
            import.as_deref(),
            config.as_deref(),
            users,
            subcarriers,
            snr_db,
            seed,
        ),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
