//! Effective subchannel SNR matrices and the seeded Rayleigh generator.

use std::io::{Read, Write};

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// `K×N` grid of effective SNR per watt. Allocating `p` watts to subcarrier
/// `n` of user `k` yields `log2(1 + p·H[k][n])` bit/s/Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    num_users: usize,
    num_subcarriers: usize,
    gains: Vec<f64>,
}

impl ChannelMatrix {
    /// Builds a matrix from row-major data.
    pub fn new(num_users: usize, num_subcarriers: usize, gains: Vec<f64>) -> Result<Self> {
        if num_users == 0 || num_subcarriers == 0 {
            return Err(Error::invalid("channel matrix needs K >= 1 and N >= 1"));
        }
        if gains.len() != num_users * num_subcarriers {
            return Err(Error::invalid(format!(
                "channel data has {} entries, expected {}x{}",
                gains.len(),
                num_users,
                num_subcarriers
            )));
        }
        if let Some(g) = gains.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
            return Err(Error::invalid(format!(
                "channel gain must be finite and >= 0, got {g}"
            )));
        }
        Ok(Self {
            num_users,
            num_subcarriers,
            gains,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("channel rows have unequal lengths"));
        }
        Self::new(k, n, rows.concat())
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_subcarriers(&self) -> usize {
        self.num_subcarriers
    }

    #[inline]
    pub fn get(&self, user: usize, subcarrier: usize) -> f64 {
        self.gains[user * self.num_subcarriers + subcarrier]
    }

    pub fn row(&self, user: usize) -> &[f64] {
        let start = user * self.num_subcarriers;
        &self.gains[start..start + self.num_subcarriers]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.gains
    }

    /// Returns a copy with user rows reordered: row `i` of the result is row
    /// `order[i]` of `self`.
    pub fn permute_users(&self, order: &[usize]) -> Self {
        let rows: Vec<Vec<f64>> = order.iter().map(|&u| self.row(u).to_vec()).collect();
        Self::from_rows(&rows).expect("permutation of a valid matrix")
    }

    /// Writes one CSV record per user, one field per subcarrier, no header.
    /// Values use the shortest round-trip decimal form.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(out);
        for k in 0..self.num_users {
            w.write_record(self.row(k).iter().map(|g| g.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(input);
        let mut rows = Vec::new();
        for (i, record) in r.records().enumerate() {
            let record = record?;
            let row = record
                .iter()
                .map(|f| {
                    f.parse::<f64>().map_err(|_| {
                        Error::invalid(format!("channel csv row {}: bad value `{f}`", i + 1))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Self::from_rows(&rows)
    }
}

/// Draws an i.i.d. Rayleigh-faded channel.
///
/// Each entry is an exponential variate with mean `10^(mean_snr_db/10)`,
/// obtained by inversion `-mean·ln(u)` of a uniform `u` on the open interval
/// (0, 1). The generator is ChaCha8 (`rand_chacha` 0.9) seeded with
/// `seed_from_u64(seed)`, and draws are consumed user-major: all subcarriers
/// of user 0, then user 1, and so on.
pub fn generate_channel(
    num_users: usize,
    num_subcarriers: usize,
    mean_snr_db: f64,
    seed: u64,
) -> Result<ChannelMatrix> {
    if num_users == 0 || num_subcarriers == 0 {
        return Err(Error::invalid("channel matrix needs K >= 1 and N >= 1"));
    }
    if !mean_snr_db.is_finite() {
        return Err(Error::invalid("mean SNR must be finite"));
    }
    let mean = 10f64.powf(mean_snr_db / 10.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gains = (0..num_users * num_subcarriers)
        .map(|_| {
            let u: f64 = rng.sample(Open01);
            -mean * u.ln()
        })
        .collect();
    ChannelMatrix::new(num_users, num_subcarriers, gains)
}
