//! Three small reference experiments, embedded as channel/assignment
//! fixtures.
//!
//! `table5` and `table6` carry gains only on assigned subcarriers (zeros
//! elsewhere), so fixture scenarios come with their assignment and skip the
//! assignment stage. The source grid for `table6` has rows for users 1 and 2
//! only; users 3 and 4 take the value of each column they own, which is the
//! single nonzero entry in that column of the two known rows.

use std::fmt;
use std::str::FromStr;

use crate::assignment::AssignmentMatrix;
use crate::channel::ChannelMatrix;
use crate::system::Scenario;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fixture {
    /// Two users, four subcarriers, 10 W, shares 75/25.
    Table4,
    /// Two users, eight subcarriers, 1 W, equal shares.
    Table5,
    /// Four users on the `table5` subcarriers, 1 W, equal shares.
    Table6,
}

impl Fixture {
    pub const ALL: [Fixture; 3] = [Fixture::Table4, Fixture::Table5, Fixture::Table6];

    pub fn name(self) -> &'static str {
        match self {
            Fixture::Table4 => "table4",
            Fixture::Table5 => "table5",
            Fixture::Table6 => "table6",
        }
    }
}

impl fmt::Display for Fixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Fixture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "table4" => Ok(Fixture::Table4),
            "table5" => Ok(Fixture::Table5),
            "table6" => Ok(Fixture::Table6),
            other => Err(Error::UnknownFixture(other.to_string())),
        }
    }
}

/// Gains of the eight shared subcarriers, user 1 row then user 2 row.
const TABLE5_GAINS: [[f64; 8]; 2] = [
    [189.0, 265.0, 0.0, 0.0, 0.0, 46.0, 0.0, 87.0],
    [0.0, 0.0, 301.0, 363.0, 288.0, 0.0, 230.0, 0.0],
];

pub fn channel_from_fixture(fixture: Fixture) -> (ChannelMatrix, AssignmentMatrix, Scenario) {
    let (rows, owners, power, weights): (Vec<Vec<f64>>, Vec<usize>, f64, Vec<f64>) = match fixture {
        Fixture::Table4 => (
            vec![vec![10.0, 8.0, 9.0, 7.0]; 2],
            vec![0, 0, 0, 1],
            10.0,
            vec![75.0, 25.0],
        ),
        Fixture::Table5 => (
            TABLE5_GAINS.iter().map(|r| r.to_vec()).collect(),
            vec![0, 0, 1, 1, 1, 0, 1, 0],
            1.0,
            vec![1.0, 1.0],
        ),
        Fixture::Table6 => {
            let owners = vec![0, 1, 1, 3, 3, 2, 2, 0];
            let column_gain = |n: usize| TABLE5_GAINS[0][n].max(TABLE5_GAINS[1][n]);
            let rows = (0..4)
                .map(|k| {
                    (0..8)
                        .map(|n| if owners[n] == k { column_gain(n) } else { 0.0 })
                        .collect()
                })
                .collect();
            (rows, owners, 1.0, vec![1.0; 4])
        }
    };
    let channel = ChannelMatrix::from_rows(&rows).expect("fixture gains are valid");
    let assignment =
        AssignmentMatrix::from_owners(rows.len(), owners).expect("fixture assignment is valid");
    let scenario = Scenario::with_weights(rows.len(), channel.num_subcarriers(), power, &weights)
        .expect("fixture scenario is valid");
    (channel, assignment, scenario)
}

/// Looks a fixture up by name.
pub fn channel_from_fixture_name(
    name: &str,
) -> Result<(ChannelMatrix, AssignmentMatrix, Scenario)> {
    Ok(channel_from_fixture(name.parse()?))
}

/// Values printed alongside each experiment.
pub mod published {
    /// Per-user totals for the 75/25 split (W).
    pub const TABLE4_POWERS: [f64; 2] = [7.66, 2.34];
    /// Per-user data rates.
    pub const TABLE4_RATES: [f64; 2] = [13.39008, 4.46336];

    #[allow(clippy::approx_constant)]
    pub const TABLE5_LINEAR_POWERS: [f64; 2] = [0.2929, 0.7071];
    pub const TABLE5_ACTIVE_SET_POWERS: [f64; 2] = [0.5, 0.5];
    pub const TABLE5_LINEAR_CAPACITY: f64 = 4.65;
    pub const TABLE5_ACTIVE_SET_CAPACITY: f64 = 4.85;

    pub const TABLE6_LINEAR_POWERS: [f64; 4] = [0.356, 0.382, 0.1903, 0.071];
    pub const TABLE6_ACTIVE_SET_POWERS: [f64; 4] = [0.25; 4];
    /// Capacities of users 1 & 2 and users 3 & 4 (bit/s/Hz).
    pub const TABLE6_LINEAR_PAIR_CAPACITY: [f64; 2] = [4.2463, 3.3577];
    pub const TABLE6_ACTIVE_SET_PAIR_CAPACITY: [f64; 2] = [4.4274, 3.839];

    /// GA per-user capacity by generation, two users on the `table5` inputs.
    pub const TABLE7_GA_CAPACITY: [[f64; 2]; 8] = [
        [5.0254, 2.9410],
        [3.0452, 4.3337],
        [4.3129, 4.7474],
        [5.6984, 4.3495],
        [6.0764, 5.6382],
        [6.2318, 6.0812],
        [6.2412, 6.1012],
        [6.3098, 6.1113],
    ];
}
