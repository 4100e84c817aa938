//! Independent reference implementations used only by tests.
//!
//! Nothing here calls into the solver code paths under test: water-filling is
//! done by sorting, root finding by plain bisection, and assignment by
//! exhaustive enumeration.

#![allow(dead_code)]

use ofdma_alloc::{
    assign_subcarriers, compute_quotas, generate_channel, AssignmentMatrix, ChannelMatrix,
    QuotaVector, Scenario,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Water-filling by sorting `1/H` ascending and taking the largest prefix whose
/// level stays above its worst member.
pub fn sorted_waterfill(gains: &[f64], budget: f64) -> Vec<f64> {
    let mut inv: Vec<f64> = gains.iter().map(|g| 1.0 / g).collect();
    inv.sort_by(f64::total_cmp);
    let mut level = budget + inv[0];
    let mut prefix = 0.0;
    for (m, &i) in inv.iter().enumerate() {
        prefix += i;
        let mu = (budget + prefix) / (m + 1) as f64;
        if mu <= i {
            break;
        }
        level = mu;
    }
    gains.iter().map(|g| (level - 1.0 / g).max(0.0)).collect()
}

pub fn rate(gains: &[f64], powers: &[f64]) -> f64 {
    gains
        .iter()
        .zip(powers)
        .map(|(h, p)| (1.0 + p * h).log2())
        .sum()
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Budget needed for `gains` to reach `target` rate, by bisection.
fn invert_rate(gains: &[f64], target: f64) -> f64 {
    if target <= 0.0 {
        return 0.0;
    }
    let mut hi = 1.0;
    while rate(gains, &sorted_waterfill(gains, hi)) < target {
        hi *= 2.0;
    }
    bisect(
        |p| rate(gains, &sorted_waterfill(gains, p)) - target,
        0.0,
        hi,
        200,
    )
}

/// Per-user totals for exact proportional rates, found by bisection on `P_1`.
pub fn bisection_rootfind(user_gains: &[Vec<f64>], proportions: &[f64], total: f64) -> Vec<f64> {
    let totals = |p1: f64| -> Vec<f64> {
        let r1 = rate(&user_gains[0], &sorted_waterfill(&user_gains[0], p1));
        let mut t = vec![p1];
        for k in 1..user_gains.len() {
            t.push(invert_rate(
                &user_gains[k],
                r1 * proportions[k] / proportions[0],
            ));
        }
        t
    };
    let p1 = bisect(|p| totals(p).iter().sum::<f64>() - total, 0.0, total, 200);
    totals(p1)
}

/// Equal-power total rate of an assignment given as owners per subcarrier.
pub fn equal_power_rate(channel: &ChannelMatrix, owners: &[usize], total: f64) -> f64 {
    let p = total / owners.len() as f64;
    owners
        .iter()
        .enumerate()
        .map(|(n, &k)| (1.0 + p * channel.get(k, n)).log2())
        .sum()
}

/// Best equal-power rate over every assignment meeting `quotas` exactly.
pub fn brute_force_assignment(channel: &ChannelMatrix, quotas: &[usize], total: f64) -> f64 {
    let k = channel.num_users();
    let n = channel.num_subcarriers();
    let mut best = f64::NEG_INFINITY;
    let mut owners = vec![0usize; n];
    for code in 0..k.pow(n as u32) {
        let mut c = code;
        let mut counts = vec![0usize; k];
        for o in owners.iter_mut() {
            *o = c % k;
            counts[*o] += 1;
            c /= k;
        }
        if counts == quotas {
            best = best.max(equal_power_rate(channel, &owners, total));
        }
    }
    best
}

/// Exponential CDF with the given mean.
pub fn exp_cdf(x: f64, mean: f64) -> f64 {
    1.0 - (-x / mean).exp()
}

/// Kolmogorov–Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// A random feasible instance with `K ≤ 8`, `N ≤ 64`, Rayleigh gains and
/// random (or uniform) proportions.
pub struct Instance {
    pub channel: ChannelMatrix,
    pub assignment: AssignmentMatrix,
    pub scenario: Scenario,
}

impl Instance {
    pub fn user_gains(&self) -> Vec<Vec<f64>> {
        (0..self.scenario.num_users)
            .map(|k| self.assignment.gains_of(&self.channel, k))
            .collect()
    }
}

pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0000_0000);
    let k = rng.random_range(1..=8);
    let n = rng.random_range(k.max(2)..=64);
    let snr = rng.random_range(10.0..=50.0);
    let power = rng.random_range(0.1..=10.0);
    let weights: Vec<f64> = if rng.random_bool(0.5) {
        vec![1.0; k]
    } else {
        (0..k).map(|_| rng.random_range(0.5..=2.0)).collect()
    };
    let mut scenario = Scenario::with_weights(k, n, power, &weights).unwrap();
    scenario.mean_snr_db = snr;
    scenario.seed = seed;
    let channel = generate_channel(k, n, snr, seed).unwrap();
    let quotas = compute_quotas(&scenario.proportions, n).unwrap();
    let assignment = assign_subcarriers(&channel, &quotas, power).unwrap();
    Instance {
        channel,
        assignment,
        scenario,
    }
}

/// A random instance where `N_k/γ_k` is constant: quotas are drawn first and
/// the proportions set to match them. At 50 dB every assigned subcarrier
/// stays above the water line, where the linear closed form is exact.
pub fn random_linear_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x11ea_0000_0000);
    let k = rng.random_range(1..=6);
    let counts: Vec<usize> = (0..k).map(|_| rng.random_range(1..=8)).collect();
    let n: usize = counts.iter().sum();
    let power = rng.random_range(0.5..=10.0);
    let weights: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let mut scenario = Scenario::with_weights(k, n, power, &weights).unwrap();
    scenario.seed = seed;
    let channel = generate_channel(k, n, 50.0, seed).unwrap();
    let quotas = QuotaVector::new(counts).unwrap();
    let assignment = assign_subcarriers(&channel, &quotas, power).unwrap();
    Instance {
        channel,
        assignment,
        scenario,
    }
}
