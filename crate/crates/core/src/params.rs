//! System parameters and unit conversions.
//!
//! All fields are stored in SI units (bits, Hz, watts, meters, joules/bit).
//! The [`units`] helpers convert from the paper-facing units (GB, MB, MHz,
//! dBm) used at the command-line boundary.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod units {
    //! Conversions from operator-facing units to SI.

    /// Bits in one gigabyte (10^9 bytes).
    pub const BITS_PER_GB: f64 = 8e9;
    /// Bits in one megabyte (10^6 bytes).
    pub const BITS_PER_MB: f64 = 8e6;

    pub fn dbm_to_watts(dbm: f64) -> f64 {
        10f64.powf((dbm - 30.0) / 10.0)
    }

    pub fn watts_to_dbm(watts: f64) -> f64 {
        10.0 * watts.log10() + 30.0
    }

    pub fn gb_to_bits(gb: f64) -> f64 {
        gb * BITS_PER_GB
    }

    pub fn mb_to_bits(mb: f64) -> f64 {
        mb * BITS_PER_MB
    }

    pub fn mhz_to_hz(mhz: f64) -> f64 {
        mhz * 1e6
    }
}

/// How the interference term `I` of the rate formulas is computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterferenceMode {
    None,
    /// A fixed interference power in watts on every link.
    Constant(f64),
    /// Sum of pathloss-attenuated powers of every non-participating F-AP.
    Geometric,
}

/// Transmit power of the F-APs, either one value for all or one per F-AP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FapPower {
    Uniform(f64),
    PerFap(Vec<f64>),
}

/// Whether a hit at a cluster peer (not the local F-AP) pays a cooperative hop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntraClusterHop {
    /// Intra-cluster transfers are free: only the access link is charged.
    #[default]
    Free,
    /// Add `L / R_{m,n}` (and its energy) when the content sits at a peer.
    Charged,
}

/// Denominator of the popularity-similarity coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilarityDenominator {
    /// Product of standard deviations (Pearson correlation).
    #[default]
    Std,
    /// Product of variances.
    Var,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemParams {
    /// Number of F-APs, `M`.
    pub num_faps: usize,
    /// Number of users, `U`.
    pub num_users: usize,
    /// Library size, `F`.
    pub num_contents: usize,
    /// Content size `L` in bits.
    pub content_size: f64,
    /// Per-F-AP cache capacity `C` in bits.
    pub capacity: f64,
    /// Access-link bandwidth `B1` in Hz.
    pub bw_access: f64,
    /// Cooperative-link bandwidth `B2` in Hz.
    pub bw_coop: f64,
    /// Noise power `sigma^2` in watts.
    pub noise: f64,
    /// F-AP transmit power `P_m` in watts.
    pub fap_power: FapPower,
    /// Cloud transmit power `P_s` in watts.
    pub cloud_power: f64,
    /// Fronthaul rate `R` in bits/s.
    pub cloud_rate: f64,
    pub pathloss_alpha: f64,
    /// Cache hardware coefficient `J_c` in joules per bit.
    pub cache_coeff: f64,
    /// Delay weight `mu` of the objective, in `[0, 1]`.
    pub weight: f64,
    /// Zipf skewness `eta`.
    pub zipf_eta: f64,
    /// Side of the square deployment area in meters.
    pub side_length: f64,
    /// User density `lambda_u` in users/m^2; `None` means `U / side^2`.
    pub user_density: Option<f64>,
    /// Social parameter `delta` weighting loss against contribution.
    pub social_delta: f64,
    /// Distance threshold `d_th` in meters for social ties.
    pub dist_threshold: f64,
    pub interference_mode: InterferenceMode,
    /// Fraction of rank positions randomly permuted per user.
    pub pref_shuffle: f64,
    pub intra_cluster_hop: IntraClusterHop,
    pub similarity_denominator: SimilarityDenominator,
    /// Permits `0 < C < L` (every cache is then empty).
    pub allow_degenerate_capacity: bool,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            num_faps: 15,
            num_users: 150,
            num_contents: 1000,
            content_size: units::mb_to_bits(500.0),
            capacity: units::gb_to_bits(50.0),
            bw_access: units::mhz_to_hz(10.0),
            bw_coop: units::mhz_to_hz(10.0),
            noise: units::dbm_to_watts(-100.0),
            fap_power: FapPower::Uniform(units::dbm_to_watts(46.0)),
            cloud_power: units::dbm_to_watts(46.0),
            cloud_rate: 100e6,
            pathloss_alpha: 4.0,
            cache_coeff: 6.25e-12,
            weight: 0.01,
            zipf_eta: 0.5,
            side_length: 1000.0,
            user_density: None,
            social_delta: 1.0,
            dist_threshold: 500.0,
            interference_mode: InterferenceMode::Constant(0.0),
            pref_shuffle: 0.3,
            intra_cluster_hop: IntraClusterHop::Free,
            similarity_denominator: SimilarityDenominator::Std,
            allow_degenerate_capacity: false,
        }
    }
}

impl SystemParams {
    /// Reads parameters from a TOML file. Missing keys keep their defaults.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let params: Self = toml::from_str(&text).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.num_faps == 0 || self.num_users == 0 || self.num_contents == 0 {
            return bad("num_faps, num_users and num_contents must be >= 1".into());
        }
        for (name, v) in [
            ("content_size", self.content_size),
            ("bw_access", self.bw_access),
            ("bw_coop", self.bw_coop),
            ("noise", self.noise),
            ("cloud_rate", self.cloud_rate),
            ("pathloss_alpha", self.pathloss_alpha),
            ("side_length", self.side_length),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        for (name, v) in [
            ("capacity", self.capacity),
            ("cloud_power", self.cloud_power),
            ("cache_coeff", self.cache_coeff),
            ("zipf_eta", self.zipf_eta),
            ("social_delta", self.social_delta),
            ("dist_threshold", self.dist_threshold),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be non-negative and finite, got {v}"));
            }
        }
        if self.capacity > 0.0 && self.capacity < self.content_size && !self.allow_degenerate_capacity {
            return bad(format!(
                "capacity {} bits holds no content of size {} bits (set allow_degenerate_capacity)",
                self.capacity, self.content_size
            ));
        }
        if !(0.0..=1.0).contains(&self.weight) {
            return bad(format!("weight must lie in [0, 1], got {}", self.weight));
        }
        if !(0.0..=1.0).contains(&self.pref_shuffle) {
            return bad(format!("pref_shuffle must lie in [0, 1], got {}", self.pref_shuffle));
        }
        if let Some(d) = self.user_density {
            if !(d >= 0.0 && d.is_finite()) {
                return bad(format!("user_density must be non-negative, got {d}"));
            }
        }
        match &self.fap_power {
            FapPower::Uniform(p) if !(*p >= 0.0 && p.is_finite()) => {
                return bad(format!("fap_power must be non-negative, got {p}"));
            }
            FapPower::PerFap(ps) => {
                if ps.len() != self.num_faps {
                    return bad(format!(
                        "fap_power lists {} values for {} F-APs",
                        ps.len(),
                        self.num_faps
                    ));
                }
                if ps.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
                    return bad("fap_power entries must be non-negative".into());
                }
            }
            _ => {}
        }
        if let InterferenceMode::Constant(v) = self.interference_mode {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("constant interference must be non-negative, got {v}"));
            }
        }
        Ok(())
    }

    /// Transmit power of F-AP `m` in watts.
    pub fn fap_power(&self, m: usize) -> f64 {
        match &self.fap_power {
            FapPower::Uniform(p) => *p,
            FapPower::PerFap(ps) => ps[m],
        }
    }

    pub fn user_density(&self) -> f64 {
        self.user_density
            .unwrap_or(self.num_users as f64 / (self.side_length * self.side_length))
    }

    /// Number of whole contents one cache holds, `floor(C / L)`.
    pub fn capacity_slots(&self) -> usize {
        let ratio = self.capacity / self.content_size;
        // absorb representation error when C is an exact multiple of L
        (ratio * (1.0 + 1e-12)).floor() as usize
    }
}
