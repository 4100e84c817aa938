//! Shared domain types, scenario validation and quota apportionment.

use std::fmt;
use std::str::FromStr;

use crate::power::ga::GaParams;
use crate::{Error, Result};

/// Tolerance on `Σγ = 1` accepted by [`Scenario::validate`].
pub const PROPORTION_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Duplexing {
    Tdd,
    Fdd,
}

/// OFDMA PHY profile. Only `bandwidth_mhz` feeds any computation (scaling
/// normalized capacity to bit/s in reports); the rest is carried for reference.
#[derive(Debug, Clone, PartialEq)]
pub struct OfdmaProfile {
    pub frame_duration_ms: f64,
    pub num_subcarriers_phy: usize,
    pub bandwidth_mhz: f64,
    pub base_frequency_ghz: f64,
    pub duplexing: Duplexing,
    pub ttg_us: f64,
    pub rtg_us: f64,
}

impl Default for OfdmaProfile {
    fn default() -> Self {
        Self {
            frame_duration_ms: 5.0,
            num_subcarriers_phy: 2048,
            bandwidth_mhz: 20.0,
            base_frequency_ghz: 5.8,
            duplexing: Duplexing::Tdd,
            ttg_us: 106.0,
            rtg_us: 60.0,
        }
    }
}

impl OfdmaProfile {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("frame_duration_ms", self.frame_duration_ms),
            ("bandwidth_mhz", self.bandwidth_mhz),
            ("base_frequency_ghz", self.base_frequency_ghz),
            ("ttg_us", self.ttg_us),
            ("rtg_us", self.rtg_us),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!(
                    "profile field {name} must be > 0, got {v}"
                )));
            }
        }
        if self.num_subcarriers_phy == 0 {
            return Err(Error::invalid("profile needs at least one subcarrier"));
        }
        Ok(())
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.bandwidth_mhz * 1e6
    }
}

/// Power allocation method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Linear,
    Rootfind,
    ActiveSet,
    Ga,
}

impl Method {
    /// Report order.
    pub const ALL: [Method; 4] = [
        Method::Linear,
        Method::Rootfind,
        Method::ActiveSet,
        Method::Ga,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Linear => "linear",
            Method::Rootfind => "rootfind",
            Method::ActiveSet => "active_set",
            Method::Ga => "ga",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" => Ok(Method::Linear),
            "rootfind" | "root_finding" | "root-finding" => Ok(Method::Rootfind),
            "active_set" | "activeset" | "active-set" => Ok(Method::ActiveSet),
            "ga" | "genetic" => Ok(Method::Ga),
            other => Err(Error::invalid(format!(
                "unknown method `{other}` (expected linear, rootfind, active_set or ga)"
            ))),
        }
    }
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub num_users: usize,
    pub num_subcarriers: usize,
    pub total_power: f64,
    /// Normalized target rate shares, one per user.
    pub proportions: Vec<f64>,
    pub mean_snr_db: f64,
    pub method: Method,
    pub seed: u64,
    pub ga_params: GaParams,
    pub profile: OfdmaProfile,
}

impl Scenario {
    /// Builds a scenario with uniform proportions and the sweep defaults
    /// (50 dB mean SNR, active-set method, seed 0).
    pub fn uniform(num_users: usize, num_subcarriers: usize, total_power: f64) -> Result<Self> {
        let weights = vec![1.0; num_users.max(1)];
        Self::with_weights(num_users, num_subcarriers, total_power, &weights)
    }

    /// Builds a scenario from raw (unnormalized) proportion weights.
    pub fn with_weights(
        num_users: usize,
        num_subcarriers: usize,
        total_power: f64,
        weights: &[f64],
    ) -> Result<Self> {
        let scenario = Self {
            num_users,
            num_subcarriers,
            total_power,
            proportions: normalize_proportions(weights)?,
            mean_snr_db: 50.0,
            method: Method::ActiveSet,
            seed: 0,
            ga_params: GaParams::default(),
            profile: OfdmaProfile::default(),
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_users == 0 {
            return Err(Error::invalid("at least one user is required"));
        }
        if self.num_subcarriers < self.num_users {
            return Err(Error::InfeasibleQuota {
                num_users: self.num_users,
                num_subcarriers: self.num_subcarriers,
            });
        }
        if !(self.total_power.is_finite() && self.total_power > 0.0) {
            return Err(Error::invalid(format!(
                "total power must be > 0, got {}",
                self.total_power
            )));
        }
        if self.proportions.len() != self.num_users {
            return Err(Error::invalid(format!(
                "{} proportions given for {} users",
                self.proportions.len(),
                self.num_users
            )));
        }
        if self
            .proportions
            .iter()
            .any(|g| !(g.is_finite() && *g > 0.0))
        {
            return Err(Error::invalid("every proportion must be > 0"));
        }
        let sum: f64 = self.proportions.iter().sum();
        if (sum - 1.0).abs() > PROPORTION_SUM_TOL {
            return Err(Error::invalid(format!(
                "proportions sum to {sum}, expected 1"
            )));
        }
        if !self.mean_snr_db.is_finite() {
            return Err(Error::invalid("mean SNR must be finite"));
        }
        self.ga_params.validate()?;
        self.profile.validate()
    }
}

/// Scales positive weights so they sum to one.
pub fn normalize_proportions(weights: &[f64]) -> Result<Vec<f64>> {
    if weights.is_empty() {
        return Err(Error::invalid("proportion weights must not be empty"));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(Error::invalid(format!(
            "proportion weight must be > 0, got {w}"
        )));
    }
    let sum: f64 = weights.iter().sum();
    let mut out: Vec<f64> = weights.iter().map(|w| w / sum).collect();
    // Fold the rounding residue into the largest share so the sum is 1 to
    // within one ulp.
    let residue = 1.0 - out.iter().sum::<f64>();
    if residue != 0.0 {
        let (i, _) =
            out.iter().enumerate().fold(
                (0, f64::MIN),
                |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
            );
        out[i] += residue;
    }
    Ok(out)
}

/// Per-user subcarrier counts `N_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotaVector(Vec<usize>);

impl QuotaVector {
    /// Wraps explicit counts. Every count must be at least one.
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::invalid("quota vector must not be empty"));
        }
        if counts.contains(&0) {
            return Err(Error::invalid("every user needs at least one subcarrier"));
        }
        Ok(Self(counts))
    }

    pub fn counts(&self) -> &[usize] {
        &self.0
    }

    pub fn num_users(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}

/// Largest-remainder apportionment of `N` subcarriers over `proportions`.
///
/// Floors of `γ_k·N` are handed out first; the leftover units go to the
/// largest fractional remainders, ties to the lower user index. A user left
/// with zero then takes one unit from the user holding the most (lowest index
/// among equals), so every user owns at least one subcarrier.
pub fn compute_quotas(proportions: &[f64], num_subcarriers: usize) -> Result<QuotaVector> {
    let k = proportions.len();
    if k == 0 {
        return Err(Error::invalid("proportions must not be empty"));
    }
    if proportions.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
        return Err(Error::invalid("every proportion must be > 0"));
    }
    if num_subcarriers < k {
        return Err(Error::InfeasibleQuota {
            num_users: k,
            num_subcarriers,
        });
    }
    let sum: f64 = proportions.iter().sum();
    let n = num_subcarriers as f64;

    let mut counts = Vec::with_capacity(k);
    let mut remainders = Vec::with_capacity(k);
    for g in proportions {
        let exact = g / sum * n;
        // Snap values that are integral up to rounding noise.
        let snapped = if (exact - exact.round()).abs() < 1e-9 {
            exact.round()
        } else {
            exact
        };
        let floor = snapped.floor();
        counts.push(floor as usize);
        remainders.push(snapped - floor);
    }

    let assigned: usize = counts.iter().sum();
    let leftover = num_subcarriers.saturating_sub(assigned);
    let mut order: Vec<usize> = (0..k).collect();
    // Stable sort keeps lower indices first among equal remainders.
    order.sort_by(|&a, &b| remainders[b].total_cmp(&remainders[a]));
    for &i in order.iter().take(leftover) {
        counts[i] += 1;
    }

    while let Some(empty) = counts.iter().position(|&c| c == 0) {
        let donor = (0..k)
            .max_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a)))
            .expect("k >= 1");
        counts[donor] -= 1;
        counts[empty] += 1;
    }

    debug_assert_eq!(counts.iter().sum::<usize>(), num_subcarriers);
    Ok(QuotaVector(counts))
}
