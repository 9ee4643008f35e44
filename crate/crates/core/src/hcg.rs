//! Cluster formation as a hedonic coalition game.
//!
//! Players are F-APs, coalitions are clusters, and F-AP `m` values a cluster
//! `S` at `U_m(S) = sum_{n in S} u_m(n)`. Starting from a random partition,
//! F-APs are visited in index order; each one looks at every cluster it
//! strictly prefers to its current peers (including seceding into a new,
//! empty cluster) and moves into the best such cluster that is *open* to it,
//! i.e. whose members all weakly accept the newcomer. Sweeps repeat until a
//! full sweep makes no move.
//!
//! With symmetric preferences every move raises the potential
//! `sum_m U_m(S_Pi(m))` by twice the mover's gain, so the dynamics terminate
//! in an individually stable partition.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::partition::Partition;
use crate::rng;
use crate::social::{cluster_preference, SocialGraph};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HcgConfig {
    /// Number of labels of the random initial partition; `None` means `ceil(M / 3)`.
    pub initial_clusters: Option<usize>,
    /// Maximum number of sweeps over all F-APs.
    pub max_passes: usize,
    /// Candidate clusters examined per F-AP and sweep; `None` means all.
    pub top_s: Option<usize>,
    pub seed: u64,
}

impl Default for HcgConfig {
    fn default() -> Self {
        Self {
            initial_clusters: None,
            max_passes: 100,
            top_s: None,
            seed: 0,
        }
    }
}

impl HcgConfig {
    pub fn initial_clusters_for(&self, num_faps: usize) -> usize {
        self.initial_clusters.unwrap_or(num_faps.div_ceil(3))
    }
}

/// One executed move of an F-AP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HcgMove {
    pub pass: usize,
    pub fap: usize,
    /// Potential before and after the move.
    pub potential_before: f64,
    pub potential_after: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HcgOutcome {
    pub partition: Partition,
    /// Sweeps executed, including the final sweep without moves.
    pub passes: usize,
    pub moves: Vec<HcgMove>,
    /// Set when `max_passes` sweeps all made moves.
    pub truncated: bool,
}

/// Assigns every F-AP a uniformly random label in `0..k0`; empty labels are
/// dropped.
pub fn initial_partition(num_faps: usize, k0: usize, seed: u64) -> Result<Partition> {
    if k0 == 0 || k0 > num_faps {
        return Err(invalid(format!(
            "initial cluster count {k0} must lie in 1..={num_faps}"
        )));
    }
    let mut rng = rng::substream(seed, &[rng::TAG_HCG]);
    let labels: Vec<usize> = (0..num_faps).map(|_| rng.random_range(0..k0)).collect();
    let clusters = (0..k0)
        .map(|k| (0..num_faps).filter(|&m| labels[m] == k).collect::<Vec<_>>())
        .filter(|c| !c.is_empty())
        .collect();
    Partition::from_clusters(num_faps, clusters)
}

/// A cluster is open to `m` when no member would be worse off with `m`
/// joining, i.e. `u_n(m) >= 0` for every member `n`.
pub fn is_open(graph: &SocialGraph, members: &[usize], m: usize) -> Result<bool> {
    if members.contains(&m) {
        return Err(invalid(format!("F-AP {m} is already a member")));
    }
    Ok(members.iter().all(|&n| graph.preference(n, m) >= 0.0))
}

/// `sum_m U_m(S_Pi(m))`.
pub fn potential(graph: &SocialGraph, partition: &Partition) -> f64 {
    partition
        .clusters()
        .iter()
        .flat_map(|c| c.iter().map(move |&m| cluster_preference(graph, m, c)))
        .sum()
}

/// Candidate clusters `m` strictly prefers to its current one, best first.
/// `None` stands for a new empty cluster.
fn improving_targets(graph: &SocialGraph, partition: &Partition, m: usize) -> Vec<(Option<usize>, f64)> {
    let current = partition.cluster_of(m);
    // u_m(m) = 0, so including m itself does not change the value
    let stay = cluster_preference(graph, m, partition.cluster(current));
    let mut targets: Vec<(Option<usize>, f64)> = (0..partition.len())
        .filter(|&k| k != current)
        .map(|k| (Some(k), cluster_preference(graph, m, partition.cluster(k))))
        .chain(std::iter::once((None, 0.0)))
        .filter(|&(_, value)| value > stay)
        .collect();
    // descending preference; existing clusters before the empty one, then by index
    targets.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then(a.0.unwrap_or(usize::MAX).cmp(&b.0.unwrap_or(usize::MAX)))
    });
    targets
}

fn open_target(graph: &SocialGraph, partition: &Partition, m: usize, target: Option<usize>) -> bool {
    match target {
        None => true,
        Some(k) => partition.cluster(k).iter().all(|&n| graph.preference(n, m) >= 0.0),
    }
}

/// Runs the switch dynamics from a random initial partition.
pub fn run_hcg(graph: &SocialGraph, config: &HcgConfig) -> Result<HcgOutcome> {
    let m_count = graph.num_faps();
    if config.max_passes == 0 {
        return Err(invalid("max_passes must be >= 1"));
    }
    if config.top_s == Some(0) {
        return Err(invalid("top_s must be >= 1"));
    }
    let start = initial_partition(m_count, config.initial_clusters_for(m_count), config.seed)?;
    Ok(run_hcg_from(graph, start, config))
}

/// Runs the switch dynamics from a given partition.
pub fn run_hcg_from(graph: &SocialGraph, start: Partition, config: &HcgConfig) -> HcgOutcome {
    let mut partition = start;
    let mut moves = Vec::new();
    let mut passes = 0;
    let mut settled = false;
    while passes < config.max_passes {
        passes += 1;
        let mut moved = false;
        for m in 0..graph.num_faps() {
            let targets = improving_targets(graph, &partition, m);
            let limit = config.top_s.unwrap_or(usize::MAX);
            let chosen = targets
                .iter()
                .take(limit)
                .find(|(k, _)| open_target(graph, &partition, m, *k));
            if let Some(&(target, _)) = chosen {
                let before = potential(graph, &partition);
                partition.move_member(m, target);
                moves.push(HcgMove {
                    pass: passes,
                    fap: m,
                    potential_before: before,
                    potential_after: potential(graph, &partition),
                });
                moved = true;
            }
        }
        if !moved {
            settled = true;
            break;
        }
    }
    HcgOutcome {
        partition,
        passes,
        moves,
        truncated: !settled,
    }
}

/// Exhaustive individual-stability check: no F-AP strictly prefers any
/// cluster (or the empty cluster) that is open to it.
pub fn is_individually_stable(graph: &SocialGraph, partition: &Partition) -> bool {
    (0..graph.num_faps()).all(|m| {
        let current = partition.cluster_of(m);
        let stay = cluster_preference(graph, m, partition.cluster(current));
        let leave_alone = partition.cluster(current).len() > 1 && 0.0 > stay;
        let join = (0..partition.len()).filter(|&k| k != current).any(|k| {
            let members = partition.cluster(k);
            cluster_preference(graph, m, members) > stay && members.iter().all(|&n| graph.preference(n, m) >= 0.0)
        });
        !(leave_alone || join)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn graph(m: usize, entries: &[(usize, usize, f64)]) -> SocialGraph {
        let mut mat = vec![vec![0.0; m]; m];
        for &(a, b, v) in entries {
            mat[a][b] = v;
            mat[b][a] = v;
        }
        SocialGraph::from_matrix(mat).unwrap()
    }

    fn random_graph(seed: u64, m: usize) -> SocialGraph {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let entries: Vec<_> = (0..m)
            .flat_map(|a| (a + 1..m).map(move |b| (a, b)))
            .map(|(a, b)| (a, b, rng.random_range(-1.0..1.0)))
            .collect();
        graph(m, &entries)
    }

    #[test]
    fn initial_partition_contract() {
        assert_eq!(initial_partition(5, 1, 3).unwrap(), Partition::whole(5));
        assert!(initial_partition(3, 4, 0).is_err());
        assert!(initial_partition(3, 0, 0).is_err());
        let p = initial_partition(6, 3, 7).unwrap();
        assert_eq!(p, initial_partition(6, 3, 7).unwrap());
        p.check_invariants();
        let p = initial_partition(6, 6, 1).unwrap();
        p.check_invariants();
    }

    #[test]
    fn openness() {
        let g = graph(4, &[(0, 3, -0.1), (1, 3, 0.0), (2, 3, 0.2)]);
        assert!(is_open(&g, &[], 3).unwrap());
        assert!(!is_open(&g, &[0], 3).unwrap());
        assert!(is_open(&g, &[1, 2], 3).unwrap());
        assert!(is_open(&g, &[3], 3).is_err());
    }

    #[test]
    fn zero_graph_is_a_fixed_point() {
        let g = graph(6, &[]);
        let cfg = HcgConfig {
            seed: 5,
            ..Default::default()
        };
        let start = initial_partition(6, 2, 5).unwrap();
        let out = run_hcg(&g, &cfg).unwrap();
        assert_eq!(out.partition, start);
        assert!(out.moves.is_empty() && out.passes == 1 && !out.truncated);
        assert!(is_individually_stable(&g, &out.partition));
        assert!(is_individually_stable(&g, &Partition::singletons(6)));
    }

    /// Every partition of `0..m`, by restricted growth strings.
    fn all_partitions(m: usize) -> Vec<Partition> {
        let mut out = Vec::new();
        let mut labels = vec![0usize; m];
        loop {
            let k = labels.iter().max().unwrap() + 1;
            let clusters = (0..k).map(|c| (0..m).filter(|&i| labels[i] == c).collect()).collect();
            out.push(Partition::from_clusters(m, clusters).unwrap());
            // next restricted growth string
            let mut i = m - 1;
            loop {
                let max_prefix = labels[..i].iter().max().copied().unwrap_or(0);
                if i > 0 && labels[i] <= max_prefix {
                    labels[i] += 1;
                    labels[i + 1..].iter_mut().for_each(|l| *l = 0);
                    break;
                }
                if i == 0 {
                    return out;
                }
                i -= 1;
            }
        }
    }

    #[test]
    fn two_players_merge() {
        let g = graph(2, &[(0, 1, 0.7)]);
        let stable: Vec<_> = all_partitions(2)
            .into_iter()
            .filter(|p| is_individually_stable(&g, p))
            .collect();
        assert_eq!(stable, vec![Partition::whole(2)]);
        assert!(!is_individually_stable(&g, &Partition::singletons(2)));
        let out = run_hcg_from(&g, Partition::singletons(2), &HcgConfig::default());
        assert_eq!(out.partition, Partition::whole(2));
    }

    #[test]
    fn three_players_pair_up() {
        let g = graph(3, &[(0, 1, 0.5), (0, 2, -0.3), (1, 2, -0.2)]);
        let parts = all_partitions(3);
        assert_eq!(parts.len(), 5);
        let expected = Partition::from_clusters(3, vec![vec![0, 1], vec![2]]).unwrap();
        let stable: Vec<_> = parts
            .iter()
            .filter(|p| is_individually_stable(&g, p))
            .cloned()
            .collect();
        assert_eq!(stable, vec![expected.clone()]);
        for start in parts {
            let out = run_hcg_from(&g, start, &HcgConfig::default());
            let mut lists = out.partition.to_index_lists();
            lists.sort();
            assert_eq!(lists, expected.to_index_lists());
        }
    }

    #[test]
    fn stability_checker_agrees_with_brute_force_definition() {
        // brute force: try every single-player deviation and compare preferences
        for seed in 0..20 {
            let g = random_graph(seed, 5);
            for p in all_partitions(5) {
                let mut deviates = false;
                for m in 0..5 {
                    let here = p.cluster(p.cluster_of(m)).to_vec();
                    let mut candidates: Vec<Vec<usize>> = p.clusters().to_vec();
                    candidates.push(vec![]);
                    for c in candidates {
                        if c.contains(&m) {
                            continue;
                        }
                        let mut joined = c.clone();
                        joined.push(m);
                        let better = cluster_preference(&g, m, &joined) > cluster_preference(&g, m, &here);
                        let accepted = c
                            .iter()
                            .all(|&n| cluster_preference(&g, n, &joined) >= cluster_preference(&g, n, &c));
                        deviates |= better && accepted;
                    }
                }
                assert_eq!(is_individually_stable(&g, &p), !deviates, "seed {seed} {p}");
            }
        }
    }

    #[test]
    fn limited_candidates_still_terminate() {
        let g = random_graph(3, 9);
        let cfg = HcgConfig {
            top_s: Some(1),
            seed: 2,
            ..Default::default()
        };
        let out = run_hcg(&g, &cfg).unwrap();
        out.partition.check_invariants();
        assert!(!out.truncated);
        assert!(run_hcg(
            &g,
            &HcgConfig {
                top_s: Some(0),
                ..Default::default()
            }
        )
        .is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn dynamics_converge_to_stable_partitions(seed in 0u64..100_000, m in 2usize..12) {
            let g = random_graph(seed, m);
            let out = run_hcg(&g, &HcgConfig { seed, ..Default::default() }).unwrap();
            out.partition.check_invariants();
            prop_assert!(!out.truncated);
            prop_assert!(is_individually_stable(&g, &out.partition));
            for mv in &out.moves {
                prop_assert!(mv.potential_after > mv.potential_before);
            }
        }
    }
}
