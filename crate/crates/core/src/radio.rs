//! Achievable link rates from geometry.

use crate::error::{invalid, Result};
use crate::params::InterferenceMode;
use crate::scenario::{Point, Scenario};

/// Distances below this are clamped before applying pathloss.
pub const MIN_DISTANCE: f64 = 1.0;

/// Received power `P * r^-alpha` with the distance clamped to [`MIN_DISTANCE`].
pub fn received_power(power: f64, distance: f64, alpha: f64) -> f64 {
    power * distance.max(MIN_DISTANCE).powf(-alpha)
}

/// Shannon rate `B log2(1 + S / (sigma^2 + I))`.
pub fn shannon_rate(bandwidth: f64, signal: f64, noise: f64, interference: f64) -> f64 {
    bandwidth * (signal / (noise + interference)).ln_1p() / std::f64::consts::LN_2
}

fn interference_excluding(scenario: &Scenario, rx: &Point, skip: &[usize]) -> f64 {
    let params = scenario.params();
    match params.interference_mode {
        InterferenceMode::None => 0.0,
        InterferenceMode::Constant(v) => v,
        InterferenceMode::Geometric => scenario
            .fap_pos()
            .iter()
            .enumerate()
            .filter(|(n, _)| !skip.contains(n))
            .map(|(n, pos)| received_power(params.fap_power(n), pos.distance(rx), params.pathloss_alpha))
            .sum(),
    }
}

/// Interference power at `receiver` while `serving` transmits.
pub fn interference_at(scenario: &Scenario, receiver: &Point, serving: usize) -> f64 {
    interference_excluding(scenario, receiver, &[serving])
}

/// Access-link rate `R_{m,u}` in bits/s.
pub fn access_rate(scenario: &Scenario, m: usize, u: usize) -> Result<f64> {
    if m >= scenario.num_faps() || u >= scenario.num_users() {
        return Err(invalid(format!("access link ({m}, {u}) out of range")));
    }
    let p = scenario.params();
    let rx = scenario.user_pos()[u];
    let signal = received_power(p.fap_power(m), scenario.access_distance(m, u), p.pathloss_alpha);
    Ok(shannon_rate(
        p.bw_access,
        signal,
        p.noise,
        interference_at(scenario, &rx, m),
    ))
}

/// Cooperative-link rate `R_{m,n}` in bits/s, with `m` transmitting to `n`.
///
/// In geometric interference mode the receiver is F-AP `n` and every F-AP
/// other than the two endpoints interferes.
pub fn coop_rate(scenario: &Scenario, m: usize, n: usize) -> Result<f64> {
    if m >= scenario.num_faps() || n >= scenario.num_faps() {
        return Err(invalid(format!("cooperative link ({m}, {n}) out of range")));
    }
    if m == n {
        return Err(invalid("cooperative link needs two distinct F-APs"));
    }
    let p = scenario.params();
    let rx = scenario.fap_pos()[n];
    let signal = received_power(p.fap_power(m), scenario.fap_distance(m, n), p.pathloss_alpha);
    Ok(shannon_rate(
        p.bw_coop,
        signal,
        p.noise,
        interference_excluding(scenario, &rx, &[m, n]),
    ))
}

/// All access and cooperative rates of a scenario, computed once.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkRateTable {
    access: Vec<Vec<f64>>,
    coop: Vec<Vec<f64>>,
}

impl LinkRateTable {
    pub fn compute(scenario: &Scenario) -> Self {
        let m_count = scenario.num_faps();
        let access = (0..m_count)
            .map(|m| {
                (0..scenario.num_users())
                    .map(|u| access_rate(scenario, m, u).expect("indices in range"))
                    .collect()
            })
            .collect();
        let coop = (0..m_count)
            .map(|m| {
                (0..m_count)
                    .map(|n| {
                        if m == n {
                            0.0
                        } else {
                            coop_rate(scenario, m, n).expect("indices in range")
                        }
                    })
                    .collect()
            })
            .collect();
        Self { access, coop }
    }

    /// Builds a table from explicit matrices (`access` is M x U, `coop` M x M).
    pub fn from_matrices(access: Vec<Vec<f64>>, coop: Vec<Vec<f64>>) -> Result<Self> {
        let m = coop.len();
        if access.len() != m || coop.iter().any(|r| r.len() != m) {
            return Err(invalid("rate matrices have inconsistent shapes"));
        }
        let positive = |r: &f64| *r > 0.0 && r.is_finite();
        if access.iter().flatten().any(|r| !positive(r))
            || (0..m).any(|a| (0..m).any(|b| a != b && !positive(&coop[a][b])))
        {
            return Err(invalid("rates must be positive and finite"));
        }
        Ok(Self { access, coop })
    }

    pub fn access(&self, m: usize, u: usize) -> f64 {
        self.access[m][u]
    }

    /// Cooperative rate from `m` to `n`; zero on the diagonal.
    pub fn coop(&self, m: usize, n: usize) -> f64 {
        self.coop[m][n]
    }

    pub fn num_faps(&self) -> usize {
        self.coop.len()
    }
}
