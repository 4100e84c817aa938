//! Line-based scenario configuration.
//!
//! One `key = value` per line, `#` starts a comment, lists are
//! comma-separated:
//!
//! ```text
//! users = 2
//! proportions = 0.75, 0.25   # normalized on load
//! subcarriers = 4
//! total_power_w = 10
//! ```
//!
//! Only `users` is required. Defaults: 64 subcarriers, 1 W, 50 dB mean SNR,
//! uniform proportions, `active_set`, seed 0, default GA parameters.

use std::collections::HashMap;
use std::str::FromStr;

use crate::power::ga::GaParams;
use crate::system::{normalize_proportions, Method, OfdmaProfile, Scenario};
use crate::{Error, Result};

pub const KEYS: [&str; 13] = [
    "users",
    "subcarriers",
    "total_power_w",
    "mean_snr_db",
    "proportions",
    "method",
    "seed",
    "ga_population",
    "ga_generations",
    "ga_crossover",
    "ga_mutation_sigma",
    "ga_elites",
    "ga_penalty",
];

fn err(line: usize, key: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        key: key.to_string(),
        message: message.into(),
    }
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| err(line, key, format!("malformed value `{value}`")))
}

fn parse_positive(line: usize, key: &str, value: &str) -> Result<f64> {
    let v: f64 = parse_value(line, key, value)?;
    if !(v.is_finite() && v > 0.0) {
        return Err(err(line, key, format!("must be > 0, got {value}")));
    }
    Ok(v)
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut entries: HashMap<&str, (usize, &str)> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(err(line, content, "expected `key = value`"));
        };
        let key = key.trim();
        let value = value.trim();
        if !KEYS.contains(&key) {
            return Err(err(line, key, "unknown key"));
        }
        if value.is_empty() {
            return Err(err(line, key, "missing value"));
        }
        if let Some((first, _)) = entries.insert(key, (line, value)) {
            return Err(err(
                line,
                key,
                format!("duplicate key (first set on line {first})"),
            ));
        }
    }

    let (users_line, num_users) = match entries.get("users") {
        Some(&(line, v)) => {
            let k: usize = parse_value(line, "users", v)?;
            if k == 0 {
                return Err(err(line, "users", "must be >= 1"));
            }
            (line, k)
        }
        None => return Err(err(0, "users", "users missing")),
    };

    let mut ga = GaParams::default();
    let mut scenario = Scenario {
        num_users,
        num_subcarriers: 64,
        total_power: 1.0,
        proportions: vec![1.0 / num_users as f64; num_users],
        mean_snr_db: 50.0,
        method: Method::ActiveSet,
        seed: 0,
        ga_params: GaParams::default(),
        profile: OfdmaProfile::default(),
    };

    for key in KEYS {
        let Some(&(line, v)) = entries.get(key) else {
            continue;
        };
        match key {
            "users" => {}
            "subcarriers" => {
                scenario.num_subcarriers = parse_value(line, key, v)?;
                if scenario.num_subcarriers < num_users {
                    return Err(err(
                        line,
                        key,
                        format!(
                            "{} subcarriers cannot serve {num_users} users",
                            scenario.num_subcarriers
                        ),
                    ));
                }
            }
            "total_power_w" => scenario.total_power = parse_positive(line, key, v)?,
            "mean_snr_db" => {
                scenario.mean_snr_db = parse_value(line, key, v)?;
                if !scenario.mean_snr_db.is_finite() {
                    return Err(err(line, key, "must be finite"));
                }
            }
            "proportions" => {
                let weights = v
                    .split(',')
                    .map(|w| parse_positive(line, key, w.trim()))
                    .collect::<Result<Vec<f64>>>()?;
                if weights.len() != num_users {
                    return Err(err(
                        line,
                        key,
                        format!(
                            "{} proportions for {num_users} users (users set on line {users_line})",
                            weights.len()
                        ),
                    ));
                }
                scenario.proportions =
                    normalize_proportions(&weights).map_err(|e| err(line, key, e.to_string()))?;
            }
            "method" => {
                scenario.method = v
                    .parse()
                    .map_err(|e: Error| err(line, key, e.to_string()))?
            }
            "seed" => scenario.seed = parse_value(line, key, v)?,
            "ga_population" => ga.population_size = parse_value(line, key, v)?,
            "ga_generations" => ga.max_generations = parse_value(line, key, v)?,
            "ga_crossover" => ga.crossover_probability = parse_value(line, key, v)?,
            "ga_mutation_sigma" => ga.mutation_sigma = parse_value(line, key, v)?,
            "ga_elites" => ga.elite_count = parse_value(line, key, v)?,
            "ga_penalty" => ga.penalty_weight = parse_value(line, key, v)?,
            _ => unreachable!("key list is closed"),
        }
        if key.starts_with("ga_") {
            ga.validate().map_err(|e| err(line, key, e.to_string()))?;
        }
    }
    scenario.ga_params = ga;
    scenario
        .validate()
        .map_err(|e| err(users_line, "users", e.to_string()))?;
    Ok(scenario)
}
