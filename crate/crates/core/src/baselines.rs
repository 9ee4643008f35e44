//! Reference placements: random caching, most-popular-local, and an
//! exhaustive oracle for small instances.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cache::{EvalResult, Evaluator};
use crate::error::{invalid, Error, Result};
use crate::firefly::popularity_ranking;
use crate::matrix::CacheMatrix;
use crate::partition::Partition;
use crate::radio::LinkRateTable;
use crate::rng::{self, TAG_RANDOM_CACHING};
use crate::scenario::Scenario;

/// Largest `M * F` the exhaustive oracle accepts by default.
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeId {
    Random,
    GreedyLocal,
    ImprovedFa,
    Exhaustive,
}

impl SchemeId {
    pub const ALL: [SchemeId; 4] = [Self::Random, Self::GreedyLocal, Self::ImprovedFa, Self::Exhaustive];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Random => "random",
            Self::GreedyLocal => "greedy_local",
            Self::ImprovedFa => "improved_fa",
            Self::Exhaustive => "exhaustive",
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| invalid(format!("unknown scheme `{s}`")))
    }
}

fn slots(scenario: &Scenario) -> usize {
    scenario.params().capacity_slots().min(scenario.num_contents())
}

/// Every F-AP caches `floor(C / L)` distinct contents drawn uniformly.
pub fn random_caching(scenario: &Scenario, seed: u64) -> CacheMatrix {
    let (m_count, f_count) = (scenario.num_faps(), scenario.num_contents());
    let k = slots(scenario);
    let mut x = CacheMatrix::zeros(m_count, f_count);
    for m in 0..m_count {
        let mut rng = rng::substream(seed, &[TAG_RANDOM_CACHING, m as u64]);
        for f in index::sample(&mut rng, f_count, k) {
            x.set(m, f, true);
        }
    }
    x
}

/// Every F-AP caches its `floor(C / L)` locally most popular contents,
/// lowest index first on ties.
pub fn greedy_local(scenario: &Scenario) -> Result<CacheMatrix> {
    let (m_count, f_count) = (scenario.num_faps(), scenario.num_contents());
    let k = slots(scenario);
    let mut x = CacheMatrix::zeros(m_count, f_count);
    for m in 0..m_count {
        for &f in &popularity_ranking(&scenario.local_popularity(m)?)[..k] {
            x.set(m, f, true);
        }
    }
    Ok(x)
}

/// All rows with at most `k` of `f_count` bits set, in lexicographic order of
/// the bit sequence `x_0, x_1, ...` (so the empty row comes first).
fn row_subsets(f_count: usize, k: usize) -> Vec<Vec<u64>> {
    let mut rows: Vec<Vec<bool>> = Vec::new();
    let mut cur = vec![false; f_count];
    fn rec(f: usize, left: usize, cur: &mut Vec<bool>, out: &mut Vec<Vec<bool>>) {
        if f == cur.len() {
            out.push(cur.clone());
            return;
        }
        cur[f] = false;
        rec(f + 1, left, cur, out);
        if left > 0 {
            cur[f] = true;
            rec(f + 1, left - 1, cur, out);
            cur[f] = false;
        }
    }
    rec(0, k, &mut cur, &mut rows);
    rows.iter()
        .map(|bits| {
            let mut x = CacheMatrix::zeros(1, f_count);
            for (f, &b) in bits.iter().enumerate() {
                x.set(0, f, b);
            }
            x.row_words(0).to_vec()
        })
        .collect()
}

/// Global minimum of the objective over every feasible placement, by full
/// joint enumeration of per-row subsets. Ties go to the lexicographically
/// smallest matrix (row-major, 0 before 1).
///
/// Refuses instances with `M * F > cap`.
pub fn exhaustive_optimal(
    scenario: &Scenario,
    rates: &LinkRateTable,
    partition: &Partition,
    cap: usize,
) -> Result<(CacheMatrix, EvalResult)> {
    let (m_count, f_count) = (scenario.num_faps(), scenario.num_contents());
    let cells = m_count * f_count;
    if cells > cap {
        return Err(Error::OracleTooLarge { cells, cap });
    }
    if partition.num_faps() != m_count {
        return Err(invalid("partition does not match the scenario"));
    }
    let evaluator = Evaluator::new(scenario, rates, partition);
    let subsets = row_subsets(f_count, slots(scenario));
    if m_count == 0 {
        let x = CacheMatrix::zeros(0, f_count);
        let e = evaluator.evaluate(&x);
        return Ok((x, e));
    }

    // row 0 is the most significant digit; split the search over its choices
    let best = (0..subsets.len())
        .into_par_iter()
        .map(|first| {
            let mut x = CacheMatrix::zeros(m_count, f_count);
            x.row_words_mut(0).copy_from_slice(&subsets[first]);
            let mut digits = vec![0usize; m_count];
            let mut best: Option<(EvalResult, Vec<usize>)> = None;
            loop {
                for m in 1..m_count {
                    x.row_words_mut(m).copy_from_slice(&subsets[digits[m]]);
                }
                let e = evaluator.evaluate(&x);
                if best.as_ref().is_none_or(|(b, _)| e.objective < b.objective) {
                    best = Some((e, digits.clone()));
                }
                // odometer over rows 1..M, last row fastest
                let mut m = m_count;
                loop {
                    m -= 1;
                    if m == 0 {
                        let (e, mut d) = best.expect("at least one placement");
                        d[0] = first;
                        return (e, d);
                    }
                    digits[m] += 1;
                    if digits[m] < subsets.len() {
                        break;
                    }
                    digits[m] = 0;
                }
            }
        })
        .reduce_with(|a, b| {
            if b.0.objective < a.0.objective || (b.0.objective == a.0.objective && b.1 < a.1) {
                b
            } else {
                a
            }
        })
        .expect("at least one row subset");

    let (e, digits) = best;
    let mut x = CacheMatrix::zeros(m_count, f_count);
    for (m, &d) in digits.iter().enumerate() {
        x.row_words_mut(m).copy_from_slice(&subsets[d]);
    }
    Ok((x, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cache::{evaluate, feasible};
    use crate::firefly::{run_fa, FaConfig};
    use crate::params::SystemParams;
    use crate::scenario::{generate_scenario, Point};

    fn one_fap(pop: Vec<f64>, slots: usize, weight: f64) -> (Scenario, LinkRateTable) {
        let params = SystemParams {
            capacity: slots as f64 * 4e9,
            weight,
            ..Default::default()
        };
        let s = Scenario::from_parts(
            params,
            vec![Point::new(0.0, 0.0)],
            vec![Point::new(30.0, 40.0)],
            vec![pop],
            0,
        )
        .unwrap();
        let r = LinkRateTable::compute(&s);
        (s, r)
    }

    #[test]
    fn scheme_names_round_trip() {
        for id in SchemeId::ALL {
            assert_eq!(id.to_string().parse::<SchemeId>().unwrap(), id);
        }
        assert!("pio".parse::<SchemeId>().is_err());
    }

    #[test]
    fn row_subsets_are_lex_sorted() {
        let rows = row_subsets(3, 2);
        assert_eq!(rows.len(), 1 + 3 + 3);
        // bit f of word 0 is content f; lexicographic on (x0, x1, x2)
        let key = |w: &Vec<u64>| (0..3).map(|f| (w[0] >> f) & 1).collect::<Vec<_>>();
        assert!(rows.windows(2).all(|p| key(&p[0]) < key(&p[1])));
        assert_eq!(row_subsets(6, 2).len(), 22);
    }

    #[test]
    fn greedy_examples() {
        let (s, _) = one_fap(vec![0.5, 0.3, 0.2], 2, 0.01);
        assert_eq!(greedy_local(&s).unwrap().to_rows(), vec![vec![1, 1, 0]]);
        let (s, _) = one_fap(vec![0.25; 4], 2, 0.01);
        let x = greedy_local(&s).unwrap();
        assert_eq!(x.to_rows(), vec![vec![1, 1, 0, 0]]);
        assert_eq!(greedy_local(&s).unwrap(), x);
    }

    #[test]
    fn random_examples() {
        let (s, _) = one_fap(vec![0.5, 0.5], 0, 0.01);
        assert_eq!(random_caching(&s, 1).count_ones(), 0);
        let (s, _) = one_fap(vec![0.5, 0.5], 2, 0.01);
        assert_eq!(random_caching(&s, 1).to_rows(), vec![vec![1, 1]]);
        let params = SystemParams {
            num_faps: 5,
            num_users: 20,
            num_contents: 50,
            capacity: 7.0 * 4e9,
            ..Default::default()
        };
        let s = generate_scenario(&params, 3).unwrap();
        let a = random_caching(&s, 11);
        assert_eq!(a, random_caching(&s, 11));
        assert_ne!(a, random_caching(&s, 12));
        assert!((0..5).all(|m| a.row_count(m) == 7));
    }

    #[test]
    fn oracle_single_fap() {
        let (s, r) = one_fap(vec![0.7, 0.3], 1, 0.01);
        let p = Partition::singletons(1);
        let (x, e) = exhaustive_optimal(&s, &r, &p, DEFAULT_EXHAUSTIVE_CAP).unwrap();
        assert_eq!(x.to_rows(), vec![vec![1, 0]]);
        // independent check over the three feasible placements
        let all: Vec<f64> = [[0u8, 0], [1, 0], [0, 1]]
            .iter()
            .map(|row| evaluate(&s, &r, &CacheMatrix::from_rows(&[row]).unwrap(), &p).objective)
            .collect();
        assert_eq!(e.objective, all.iter().copied().fold(f64::INFINITY, f64::min));
        assert_eq!(e.objective, all[1]);
    }

    #[test]
    fn oracle_caches_everything_when_only_delay_counts() {
        let (s, r) = one_fap(vec![0.4, 0.3, 0.2, 0.1], 4, 1.0);
        let (x, _) = exhaustive_optimal(&s, &r, &Partition::singletons(1), DEFAULT_EXHAUSTIVE_CAP).unwrap();
        assert_eq!(x.count_ones(), 4);
    }

    #[test]
    fn oracle_refuses_large_instances() {
        let params = SystemParams {
            num_faps: 5,
            num_users: 10,
            num_contents: 5,
            capacity: 8e9,
            ..Default::default()
        };
        let s = generate_scenario(&params, 0).unwrap();
        let r = LinkRateTable::compute(&s);
        let err = exhaustive_optimal(&s, &r, &Partition::singletons(5), 24).unwrap_err();
        assert!(matches!(err, Error::OracleTooLarge { cells: 25, cap: 24 }));
    }

    /// Sequential enumeration of the whole product in lexicographic order.
    fn oracle_reference(s: &Scenario, r: &LinkRateTable, p: &Partition) -> (CacheMatrix, f64) {
        let (mc, fc) = (s.num_faps(), s.num_contents());
        let k = slots(s);
        let mut best: Option<(CacheMatrix, f64)> = None;
        for code in 0u64..(1 << (mc * fc)) {
            // most significant bit is x_{0,0}
            let mut x = CacheMatrix::zeros(mc, fc);
            for i in 0..mc * fc {
                x.set(i / fc, i % fc, (code >> (mc * fc - 1 - i)) & 1 == 1);
            }
            if (0..mc).any(|m| x.row_count(m) > k) {
                continue;
            }
            let o = evaluate(s, r, &x, p).objective;
            if best.as_ref().is_none_or(|(_, b)| o < *b) {
                best = Some((x, o));
            }
        }
        best.unwrap()
    }

    #[test]
    fn oracle_matches_plain_enumeration_and_dominates() {
        for seed in 0..6 {
            let params = SystemParams {
                num_faps: 3,
                num_users: 9,
                num_contents: 4,
                capacity: 2.0 * 4e9,
                zipf_eta: 0.7,
                ..Default::default()
            };
            let s = generate_scenario(&params, seed).unwrap();
            let r = LinkRateTable::compute(&s);
            for p in [Partition::singletons(3), Partition::whole(3)] {
                let (x, e) = exhaustive_optimal(&s, &r, &p, DEFAULT_EXHAUSTIVE_CAP).unwrap();
                let (xr, or) = oracle_reference(&s, &r, &p);
                assert_eq!(x, xr);
                assert_eq!(e.objective, or);
                assert!(feasible(&x, &params));
                let fa = run_fa(
                    &s,
                    &r,
                    &p,
                    &FaConfig {
                        population: 6,
                        max_iters: 10,
                        seed,
                        ..Default::default()
                    },
                )
                .unwrap();
                for other in [random_caching(&s, seed), greedy_local(&s).unwrap(), fa.best] {
                    assert!(feasible(&other, &params));
                    assert!(e.objective <= evaluate(&s, &r, &other, &p).objective);
                }
            }
        }
    }
}
