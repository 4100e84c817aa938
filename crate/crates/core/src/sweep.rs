//! Monte-Carlo sweeps of capacity versus number of users.

use std::io::Write;
use std::ops::RangeInclusive;

use crate::assignment::assign_subcarriers;
use crate::channel::generate_channel;
use crate::evaluation::run_method;
use crate::exec::Execution;
use crate::system::{compute_quotas, Method, Scenario};
use crate::{Error, Result};

pub const CSV_HEADER: &str = "method,users,trial,capacity_bps_hz,prop_error,runtime_us,status";
pub const SUMMARY_HEADER: &str =
    "method,users,trials_ok,mean_capacity_bps_hz,stderr_capacity_bps_hz,mean_prop_error";

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub users: RangeInclusive<usize>,
    pub trials: usize,
    pub methods: Vec<Method>,
    /// Subcarriers, power, mean SNR, base seed and GA parameters; its user
    /// count and proportions are replaced per sweep point.
    pub base: Scenario,
    /// Record wall-clock solve times. Off by default so output is
    /// byte-reproducible; when off, `runtime_us` is written as 0.
    pub record_runtime: bool,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.users.is_empty() || *self.users.start() == 0 {
            return Err(Error::invalid(
                "user range must be nonempty and start at >= 1",
            ));
        }
        if self.trials == 0 {
            return Err(Error::invalid("at least one trial is required"));
        }
        if self.methods.is_empty() {
            return Err(Error::invalid("at least one method is required"));
        }
        if *self.users.end() > self.base.num_subcarriers {
            return Err(Error::InfeasibleQuota {
                num_users: *self.users.end(),
                num_subcarriers: self.base.num_subcarriers,
            });
        }
        Ok(())
    }
}

/// `base_seed XOR (K·2^32 + trial)`.
pub fn trial_seed(base_seed: u64, users: usize, trial: usize) -> u64 {
    base_seed ^ ((users as u64) << 32).wrapping_add(trial as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub method: Method,
    pub users: usize,
    pub trial: usize,
    pub capacity: Option<f64>,
    pub prop_error: Option<f64>,
    pub runtime_us: u64,
    /// `ok`, or `error: <message>`.
    pub status: String,
}

impl SweepRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

fn status_text(e: &Error) -> String {
    let msg: String = e
        .to_string()
        .chars()
        .map(|c| match c {
            ',' => ';',
            '\n' | '\r' | '"' => ' ',
            c => c,
        })
        .collect();
    format!("error: {msg}")
}

fn run_trial(spec: &SweepSpec, users: usize, trial: usize, inner: Execution) -> Vec<SweepRow> {
    let seed = trial_seed(spec.base.seed, users, trial);
    let prepared = (|| {
        let mut scenario = spec.base.clone();
        scenario.num_users = users;
        scenario.proportions = vec![1.0 / users as f64; users];
        scenario.seed = seed;
        let channel =
            generate_channel(users, scenario.num_subcarriers, scenario.mean_snr_db, seed)?;
        let quotas = compute_quotas(&scenario.proportions, scenario.num_subcarriers)?;
        let assignment = assign_subcarriers(&channel, &quotas, scenario.total_power)?;
        Ok::<_, Error>((scenario, channel, assignment))
    })();

    spec.methods
        .iter()
        .map(|&method| {
            let mut row = SweepRow {
                method,
                users,
                trial,
                capacity: None,
                prop_error: None,
                runtime_us: 0,
                status: "ok".into(),
            };
            match &prepared {
                Err(e) => row.status = status_text(e),
                Ok((scenario, channel, assignment)) => {
                    let result = run_method(method, scenario, channel, assignment, inner);
                    if spec.record_runtime {
                        row.runtime_us = result.runtime.as_micros() as u64;
                    }
                    match result.outcome {
                        Ok((_, report)) => {
                            row.capacity = Some(report.total_capacity);
                            row.prop_error = Some(report.proportionality_error);
                        }
                        Err(e) => row.status = status_text(&e),
                    }
                }
            }
            row
        })
        .collect()
}

/// Runs every (users, trial) point and returns rows ordered by method (in
/// `spec.methods` order), then users, then trial. Solver failures become
/// rows with an error status.
pub fn run_sweep(spec: &SweepSpec, exec: Execution) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let points: Vec<(usize, usize)> = spec
        .users
        .clone()
        .flat_map(|k| (0..spec.trials).map(move |t| (k, t)))
        .collect();
    // Trials are the parallel unit; solvers inside a trial run sequentially.
    let per_point = exec.map(&points, |&(k, t)| {
        run_trial(spec, k, t, Execution::Sequential)
    });
    let mut rows = Vec::with_capacity(points.len() * spec.methods.len());
    for m in 0..spec.methods.len() {
        rows.extend(per_point.iter().map(|trial_rows| trial_rows[m].clone()));
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.method,
            r.users,
            r.trial,
            opt(r.capacity),
            opt(r.prop_error),
            r.runtime_us,
            r.status
        )?;
    }
    Ok(())
}

/// Mean capacity (± standard error) per method and user count.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: Method,
    pub users: usize,
    pub trials_ok: usize,
    pub mean_capacity: f64,
    pub stderr_capacity: f64,
    pub mean_prop_error: f64,
}

pub fn summarize(rows: &[SweepRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(Method, usize)> = Vec::new();
    for r in rows {
        if !keys.contains(&(r.method, r.users)) {
            keys.push((r.method, r.users));
        }
    }
    keys.into_iter()
        .map(|(method, users)| {
            let ok: Vec<&SweepRow> = rows
                .iter()
                .filter(|r| r.method == method && r.users == users && r.is_ok())
                .collect();
            let n = ok.len();
            let caps: Vec<f64> = ok.iter().filter_map(|r| r.capacity).collect();
            let mean = if n > 0 {
                caps.iter().sum::<f64>() / n as f64
            } else {
                f64::NAN
            };
            let stderr = if n > 1 {
                let var = caps.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                (var / n as f64).sqrt()
            } else {
                0.0
            };
            let mean_prop = if n > 0 {
                ok.iter().filter_map(|r| r.prop_error).sum::<f64>() / n as f64
            } else {
                f64::NAN
            };
            SummaryRow {
                method,
                users,
                trials_ok: n,
                mean_capacity: mean,
                stderr_capacity: stderr,
                mean_prop_error: mean_prop,
            }
        })
        .collect()
}

pub fn write_summary_csv<W: Write>(summary: &[SummaryRow], mut out: W) -> Result<()> {
    writeln!(out, "{SUMMARY_HEADER}")?;
    for s in summary {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            s.method, s.users, s.trials_ok, s.mean_capacity, s.stderr_capacity, s.mean_prop_error
        )?;
    }
    Ok(())
}
