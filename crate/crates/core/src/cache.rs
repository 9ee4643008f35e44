//! Delay and energy model of a cache placement.
//!
//! A request of user `u` for content `f` is served by the local F-AP `m` of
//! `u` in one of three mutually exclusive ways:
//!
//! * **local cluster**: some member of `m`'s cluster caches `f`; only the
//!   access link is used,
//! * **remote cluster**: `f` is cached outside the cluster and is relayed to
//!   `m` over the cooperative link from the remote holder with the best rate,
//! * **cloud**: `f` is cached nowhere and travels over the fronthaul.
//!
//! [`evaluate`] sums these per-request costs weighted by the demand. It
//! aggregates demand per F-AP and works on packed bit rows, so it is fast
//! enough for the optimizers; [`evaluate_per_request`] is the literal
//! per-user double sum and serves as a cross-check.

use serde::{Deserialize, Serialize};

use crate::matrix::{set_bits, CacheMatrix};
use crate::params::{IntraClusterHop, SystemParams};
use crate::partition::Partition;
use crate::radio::LinkRateTable;
use crate::scenario::Scenario;

/// Delay, energy and the weighted objective `mu T + (1 - mu) E`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    /// Total transmission delay `T` in seconds.
    pub delay: f64,
    /// Total energy `E` in joules, caching energy included.
    pub energy: f64,
    pub objective: f64,
}

impl EvalResult {
    pub fn new(delay: f64, energy: f64, weight: f64) -> Self {
        Self {
            delay,
            energy,
            objective: weight * delay + (1.0 - weight) * energy,
        }
    }
}

/// How a single request is delivered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delivery {
    /// Hit inside the local cluster. `peer` is the best-rate cluster member
    /// holding the content when the local F-AP itself does not.
    Local {
        peer: Option<usize>,
    },
    /// Relayed from F-AP `from` in another cluster.
    Remote {
        from: usize,
    },
    Cloud,
}

/// Whether any member of cluster `k` caches content `f`.
pub fn cluster_has(x: &CacheMatrix, partition: &Partition, k: usize, f: usize) -> bool {
    partition.cluster(k).iter().any(|&m| x.get(m, f))
}

/// The F-AP in `candidates` caching `f` with the highest rate from `m`
/// (lowest index on ties).
fn best_holder(
    rates: &LinkRateTable,
    x: &CacheMatrix,
    m: usize,
    f: usize,
    candidates: impl Iterator<Item = usize>,
) -> Option<usize> {
    let mut best: Option<usize> = None;
    for n in candidates {
        if n == m || !x.get(n, f) {
            continue;
        }
        if best.is_none_or(|b| rates.coop(m, n) > rates.coop(m, b)) {
            best = Some(n);
        }
    }
    best
}

/// Classifies the request of user `u` for content `f`.
pub fn delivery(
    scenario: &Scenario,
    rates: &LinkRateTable,
    x: &CacheMatrix,
    partition: &Partition,
    u: usize,
    f: usize,
) -> Delivery {
    let m = scenario.local_fap(u);
    let k = partition.cluster_of(m);
    if cluster_has(x, partition, k, f) {
        let peer = if x.get(m, f) {
            None
        } else {
            best_holder(rates, x, m, f, partition.cluster(k).iter().copied())
        };
        return Delivery::Local { peer };
    }
    let outside = (0..scenario.num_faps()).filter(|&n| partition.cluster_of(n) != k);
    match best_holder(rates, x, m, f, outside) {
        Some(from) => Delivery::Remote { from },
        None => Delivery::Cloud,
    }
}

fn charged(params: &SystemParams) -> bool {
    params.intra_cluster_hop == IntraClusterHop::Charged
}

/// Transmission delay in seconds of user `u` obtaining content `f`.
pub fn request_delay(
    scenario: &Scenario,
    rates: &LinkRateTable,
    x: &CacheMatrix,
    partition: &Partition,
    u: usize,
    f: usize,
) -> f64 {
    let p = scenario.params();
    let m = scenario.local_fap(u);
    let l = p.content_size;
    let access = l / rates.access(m, u);
    match delivery(scenario, rates, x, partition, u, f) {
        Delivery::Local { peer: Some(n) } if charged(p) => l / rates.coop(m, n) + access,
        Delivery::Local { .. } => access,
        Delivery::Remote { from } => l * (1.0 / rates.coop(m, from) + 1.0 / rates.access(m, u)),
        Delivery::Cloud => l * (1.0 / p.cloud_rate + 1.0 / rates.access(m, u)),
    }
}

/// Delivery energy in joules of user `u` obtaining content `f`.
pub fn request_energy(
    scenario: &Scenario,
    rates: &LinkRateTable,
    x: &CacheMatrix,
    partition: &Partition,
    u: usize,
    f: usize,
) -> f64 {
    let p = scenario.params();
    let m = scenario.local_fap(u);
    let (l, pm) = (p.content_size, p.fap_power(m));
    match delivery(scenario, rates, x, partition, u, f) {
        Delivery::Local { peer: Some(n) } if charged(p) => l * pm * (1.0 / rates.coop(m, n) + 1.0 / rates.access(m, u)),
        Delivery::Local { .. } => l * pm / rates.access(m, u),
        Delivery::Remote { from } => l * pm * (1.0 / rates.coop(m, from) + 1.0 / rates.access(m, u)),
        Delivery::Cloud => l * (p.cloud_power / p.cloud_rate + pm / rates.access(m, u)),
    }
}

/// Caching energy `E_c = J_c L * (number of cached copies)`.
pub fn caching_energy(x: &CacheMatrix, params: &SystemParams) -> f64 {
    params.cache_coeff * params.content_size * x.count_ones() as f64
}

/// Whether every F-AP stays within its storage capacity.
pub fn feasible(x: &CacheMatrix, params: &SystemParams) -> bool {
    (0..x.rows()).all(|m| x.row_count(m) as f64 * params.content_size <= params.capacity)
}

/// Literal per-user, per-content evaluation of the objective.
pub fn evaluate_per_request(
    scenario: &Scenario,
    rates: &LinkRateTable,
    x: &CacheMatrix,
    partition: &Partition,
) -> EvalResult {
    let mut delay = 0.0;
    let mut energy = 0.0;
    for u in 0..scenario.num_users() {
        for (f, &p) in scenario.demand(u).iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            delay += p * request_delay(scenario, rates, x, partition, u, f);
            energy += p * request_energy(scenario, rates, x, partition, u, f);
        }
    }
    let params = scenario.params();
    EvalResult::new(delay, caching_energy(x, params) + energy, params.weight)
}

/// Evaluates the objective of a placement.
pub fn evaluate(scenario: &Scenario, rates: &LinkRateTable, x: &CacheMatrix, partition: &Partition) -> EvalResult {
    Evaluator::new(scenario, rates, partition).evaluate(x)
}

/// Precomputed, placement-independent parts of the objective for a fixed
/// scenario and partition.
///
/// Every request pays its access link, so `T = sum_u L / R_{m,u} + extra`,
/// where the extra term depends on the placement only through the per-F-AP
/// aggregated demand `sum_{u in U_m} p_{u,f}`. The same holds for energy.
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    params: &'a SystemParams,
    partition: &'a Partition,
    num_contents: usize,
    /// F-APs with at least one local user.
    active: Vec<usize>,
    local_demand: Vec<Vec<f64>>,
    /// Other F-APs ordered by descending cooperative rate from `m`.
    by_rate: Vec<Vec<usize>>,
    inv_coop: Vec<Vec<f64>>,
    base_delay: f64,
    base_energy: f64,
}

impl<'a> Evaluator<'a> {
    pub fn new(scenario: &'a Scenario, rates: &LinkRateTable, partition: &'a Partition) -> Self {
        let params = scenario.params();
        let m_count = scenario.num_faps();
        assert_eq!(partition.num_faps(), m_count, "partition size differs from scenario");
        assert_eq!(rates.num_faps(), m_count, "rate table size differs from scenario");
        let l = params.content_size;
        let mut base_delay = 0.0;
        let mut base_energy = 0.0;
        for u in 0..scenario.num_users() {
            let m = scenario.local_fap(u);
            let t = l / rates.access(m, u);
            base_delay += t;
            base_energy += params.fap_power(m) * t;
        }
        let by_rate = (0..m_count)
            .map(|m| {
                let mut others: Vec<usize> = (0..m_count).filter(|&n| n != m).collect();
                // stable sort keeps lowest index first on equal rates
                others.sort_by(|&a, &b| rates.coop(m, b).total_cmp(&rates.coop(m, a)));
                others
            })
            .collect();
        let inv_coop = (0..m_count)
            .map(|m| {
                (0..m_count)
                    .map(|n| if m == n { 0.0 } else { 1.0 / rates.coop(m, n) })
                    .collect()
            })
            .collect();
        Self {
            params,
            partition,
            num_contents: scenario.num_contents(),
            active: (0..m_count).filter(|&m| !scenario.local_users(m).is_empty()).collect(),
            local_demand: (0..m_count).map(|m| scenario.local_demand(m)).collect(),
            by_rate,
            inv_coop,
            base_delay,
            base_energy,
        }
    }

    pub fn partition(&self) -> &Partition {
        self.partition
    }

    pub fn evaluate(&self, x: &CacheMatrix) -> EvalResult {
        assert_eq!(
            x.shape(),
            (self.partition.num_faps(), self.num_contents),
            "placement shape differs from scenario"
        );
        let p = self.params;
        let l = p.content_size;
        let words = x.words_per_row();
        let tail = match self.num_contents % 64 {
            0 => u64::MAX,
            r => (1u64 << r) - 1,
        };
        let charged = charged(p);
        let mut local = vec![0u64; words];
        let mut pending = vec![0u64; words];

        let mut extra_delay = 0.0;
        let mut extra_energy = 0.0;
        for &m in &self.active {
            let demand = &self.local_demand[m];
            let k = self.partition.cluster_of(m);
            let pm = p.fap_power(m);
            local.fill(0);
            for &n in self.partition.cluster(k) {
                for (a, b) in local.iter_mut().zip(x.row_words(n)) {
                    *a |= b;
                }
            }

            if charged {
                for (q, (a, b)) in pending.iter_mut().zip(local.iter().zip(x.row_words(m))) {
                    *q = a & !b;
                }
                for &n in self.by_rate[m].iter().filter(|&&n| self.partition.cluster_of(n) == k) {
                    let mass = take_hits(&mut pending, x.row_words(n), demand);
                    extra_delay += mass * l * self.inv_coop[m][n];
                    extra_energy += mass * pm * l * self.inv_coop[m][n];
                }
            }

            for (q, a) in pending.iter_mut().zip(&local) {
                *q = !a;
            }
            pending[words - 1] &= tail;
            for &n in &self.by_rate[m] {
                if self.partition.cluster_of(n) == k {
                    continue;
                }
                let mass = take_hits(&mut pending, x.row_words(n), demand);
                extra_delay += mass * l * self.inv_coop[m][n];
                extra_energy += mass * pm * l * self.inv_coop[m][n];
                if pending.iter().all(|&w| w == 0) {
                    break;
                }
            }
            let mass: f64 = set_bits(&pending).map(|f| demand[f]).sum();
            extra_delay += mass * l / p.cloud_rate;
            extra_energy += mass * p.cloud_power * l / p.cloud_rate;
        }

        EvalResult::new(
            self.base_delay + extra_delay,
            caching_energy(x, p) + self.base_energy + extra_energy,
            p.weight,
        )
    }
}

/// Clears from `pending` the bits present in `row` and returns the demand
/// mass of the cleared contents.
fn take_hits(pending: &mut [u64], row: &[u64], demand: &[f64]) -> f64 {
    let mut mass = 0.0;
    for (i, (q, r)) in pending.iter_mut().zip(row).enumerate() {
        let hits = *q & r;
        if hits != 0 {
            mass += set_bits(&[hits]).map(|b| demand[i * 64 + b]).sum::<f64>();
            *q &= !hits;
        }
    }
    mass
}
