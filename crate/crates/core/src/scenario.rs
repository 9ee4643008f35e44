//! Simulation world: geometry, user association and content demand.

use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::params::SystemParams;
use crate::rng::{self, TAG_FAP_POS, TAG_RANKING, TAG_USER_POS};

/// A position in the plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Zipf popularity over `num_contents` ranks: `p_r = r^-eta / sum_k k^-eta`.
///
/// ```
/// let p = fogcache::zipf_distribution(1.0, 2).unwrap();
/// assert!((p[0] - 2.0 / 3.0).abs() < 1e-15);
/// ```
pub fn zipf_distribution(eta: f64, num_contents: usize) -> Result<Vec<f64>> {
    if num_contents == 0 {
        return Err(invalid("Zipf distribution needs at least one content"));
    }
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(invalid(format!("Zipf skewness must be >= 0, got {eta}")));
    }
    let weights: Vec<f64> = (1..=num_contents).map(|r| (r as f64).powf(-eta)).collect();
    // smallest terms first keeps the normalizer accurate
    let total: f64 = weights.iter().rev().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Immutable simulation world.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    params: SystemParams,
    fap_pos: Vec<Point>,
    user_pos: Vec<Point>,
    local_fap: Vec<usize>,
    local_users: Vec<Vec<usize>>,
    demand: Vec<Vec<f64>>,
    seed: u64,
}

impl Scenario {
    /// Builds a scenario from explicit geometry and demand.
    ///
    /// `num_faps`, `num_users` and `num_contents` in `params` are overwritten
    /// by the sizes of the supplied vectors.
    pub fn from_parts(
        mut params: SystemParams,
        fap_pos: Vec<Point>,
        user_pos: Vec<Point>,
        demand: Vec<Vec<f64>>,
        seed: u64,
    ) -> Result<Self> {
        params.num_faps = fap_pos.len();
        params.num_users = user_pos.len();
        params.num_contents = demand.first().map_or(0, Vec::len);
        params.validate()?;
        if demand.len() != user_pos.len() {
            return Err(invalid(format!(
                "demand has {} rows for {} users",
                demand.len(),
                user_pos.len()
            )));
        }
        for (u, row) in demand.iter().enumerate() {
            if row.len() != params.num_contents {
                return Err(invalid(format!("demand row {u} has the wrong length")));
            }
            if row.iter().any(|p| !(*p >= 0.0)) {
                return Err(invalid(format!("demand row {u} has a negative entry")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(invalid(format!("demand row {u} sums to {sum}, not 1")));
            }
        }
        let local_fap: Vec<usize> = user_pos.iter().map(|p| nearest(&fap_pos, p)).collect();
        let mut local_users = vec![Vec::new(); fap_pos.len()];
        for (u, &m) in local_fap.iter().enumerate() {
            local_users[m].push(u);
        }
        Ok(Self {
            params,
            fap_pos,
            user_pos,
            local_fap,
            local_users,
            demand,
            seed,
        })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn num_faps(&self) -> usize {
        self.fap_pos.len()
    }

    pub fn num_users(&self) -> usize {
        self.user_pos.len()
    }

    pub fn num_contents(&self) -> usize {
        self.params.num_contents
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn fap_pos(&self) -> &[Point] {
        &self.fap_pos
    }

    pub fn user_pos(&self) -> &[Point] {
        &self.user_pos
    }

    /// The nearest F-AP of user `u`.
    pub fn local_fap(&self, u: usize) -> usize {
        self.local_fap[u]
    }

    /// Users whose local F-AP is `m`, in ascending order.
    pub fn local_users(&self, m: usize) -> &[usize] {
        &self.local_users[m]
    }

    /// Request probabilities of user `u`.
    pub fn demand(&self, u: usize) -> &[f64] {
        &self.demand[u]
    }

    pub fn fap_distance(&self, m: usize, n: usize) -> f64 {
        self.fap_pos[m].distance(&self.fap_pos[n])
    }

    pub fn access_distance(&self, m: usize, u: usize) -> f64 {
        self.fap_pos[m].distance(&self.user_pos[u])
    }

    /// Unnormalized demand at F-AP `m`: `sum_{u in U_m} p_{u,f}` per content.
    pub fn local_demand(&self, m: usize) -> Vec<f64> {
        let mut acc = vec![0.0; self.num_contents()];
        for &u in &self.local_users[m] {
            for (a, p) in acc.iter_mut().zip(&self.demand[u]) {
                *a += p;
            }
        }
        acc
    }

    /// Normalized local content popularity of F-AP `m`; all zeros when `m`
    /// has no local users.
    pub fn local_popularity(&self, m: usize) -> Result<Vec<f64>> {
        if m >= self.num_faps() {
            return Err(invalid(format!("F-AP {m} out of range")));
        }
        let mut acc = self.local_demand(m);
        let total: f64 = acc.iter().sum();
        if total > 0.0 {
            acc.iter_mut().for_each(|a| *a /= total);
        }
        Ok(acc)
    }

    /// A copy of this scenario with different parameters but the same
    /// geometry and demand. Sizes must match.
    pub fn with_params(&self, params: SystemParams) -> Result<Self> {
        if params.num_faps != self.num_faps()
            || params.num_users != self.num_users()
            || params.num_contents != self.num_contents()
        {
            return Err(invalid("parameter sizes do not match the scenario"));
        }
        params.validate()?;
        Ok(Self { params, ..self.clone() })
    }
}

fn nearest(faps: &[Point], p: &Point) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (m, f) in faps.iter().enumerate() {
        let d = f.distance(p);
        if d < best_d {
            best = m;
            best_d = d;
        }
    }
    best
}

/// Generates a scenario: uniform positions, nearest-F-AP association and
/// per-user Zipf demand over a partially shuffled global ranking.
pub fn generate_scenario(params: &SystemParams, seed: u64) -> Result<Scenario> {
    params.validate()?;
    let side = params.side_length;
    let draw_points = |tag: u64, n: usize| {
        let mut rng = rng::substream(seed, &[tag]);
        (0..n)
            .map(|_| Point::new(rng.random::<f64>() * side, rng.random::<f64>() * side))
            .collect::<Vec<_>>()
    };
    let fap_pos = draw_points(TAG_FAP_POS, params.num_faps);
    let user_pos = draw_points(TAG_USER_POS, params.num_users);

    let f = params.num_contents;
    let zipf = zipf_distribution(params.zipf_eta, f)?;
    let shuffled = (params.pref_shuffle * f as f64).round() as usize;
    let demand = (0..params.num_users)
        .map(|u| {
            let mut rng = rng::substream(seed, &[TAG_RANKING, u as u64]);
            // ranking[r] = content at rank r; global order is content index
            let mut ranking: Vec<usize> = (0..f).collect();
            if shuffled > 1 {
                let positions = index::sample(&mut rng, f, shuffled).into_vec();
                let mut moved: Vec<usize> = positions.iter().map(|&r| ranking[r]).collect();
                moved.shuffle(&mut rng);
                for (&r, c) in positions.iter().zip(moved) {
                    ranking[r] = c;
                }
            }
            let mut row = vec![0.0; f];
            for (r, &c) in ranking.iter().enumerate() {
                row[c] = zipf[r];
            }
            row
        })
        .collect();

    Scenario::from_parts(params.clone(), fap_pos, user_pos, demand, seed).map_err(|e| match e {
        Error::InvalidArgument(msg) => Error::InvariantViolation(msg),
        other => other,
    })
}
