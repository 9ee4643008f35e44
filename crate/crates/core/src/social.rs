//! Pairwise social ties between F-APs and their preferences over clusters.
//!
//! The tie of F-AP `m` towards `n` trades a social contribution (how likely
//! their users meet, times how similar their content tastes are) against a
//! social loss (the caching and transmission overhead of cooperating), and
//! fades exponentially with distance up to a cutoff `d_th`. The mutual
//! preference `u_m(n) = psi_{m,n} + psi_{n,m}` is symmetric, so preferences
//! over clusters are additively separable.

use std::io::Write;

use crate::error::{invalid, Error, Result};
use crate::params::SimilarityDenominator;
use crate::radio::LinkRateTable;
use crate::scenario::Scenario;

/// Probability that two users at distance `d` are in contact:
/// `1 - exp(-lambda_u * pi * d^2)`.
pub fn contact_probability(d: f64, lambda_u: f64) -> Result<f64> {
    if !(d >= 0.0) || !(lambda_u >= 0.0) {
        return Err(invalid(format!(
            "contact probability needs d >= 0 and lambda >= 0, got {d}, {lambda_u}"
        )));
    }
    Ok(-(-lambda_u * std::f64::consts::PI * d * d).exp_m1())
}

fn check_pair(scenario: &Scenario, m: usize, n: usize) -> Result<()> {
    let count = scenario.num_faps();
    if m >= count || n >= count {
        return Err(invalid(format!("F-AP pair ({m}, {n}) out of range")));
    }
    if m == n {
        return Err(invalid("social quantities need two distinct F-APs"));
    }
    Ok(())
}

/// Sum of contact probabilities over all pairs of local users of `m` and `n`.
///
/// This is a weight, not a probability: it can exceed one.
pub fn pair_contact(scenario: &Scenario, m: usize, n: usize) -> Result<f64> {
    check_pair(scenario, m, n)?;
    let lambda = scenario.params().user_density();
    let pos = scenario.user_pos();
    let mut total = 0.0;
    for &u in scenario.local_users(m) {
        for &v in scenario.local_users(n) {
            total += contact_probability(pos[u].distance(&pos[v]), lambda)?;
        }
    }
    Ok(total)
}

/// Correlation-type similarity of two popularity vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Similarity {
    pub value: f64,
    /// Set when either vector is constant; `value` is then 0.
    pub degenerate: bool,
}

/// `E[(a - mean a)(b - mean b)] / (s(a) s(b))` where `s` is the standard
/// deviation or the variance depending on `denominator`.
pub fn similarity(a: &[f64], b: &[f64], denominator: SimilarityDenominator) -> Similarity {
    assert_eq!(a.len(), b.len(), "similarity of vectors of different lengths");
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let (mut cov, mut var_a, mut var_b) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - mean_a, y - mean_b);
        cov += dx * dy;
        var_a += dx * dx;
        var_b += dy * dy;
    }
    let (cov, var_a, var_b) = (cov / n, var_a / n, var_b / n);
    let flat = |var: f64, v: &[f64]| {
        let scale = v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        var <= (f64::EPSILON * scale).powi(2)
    };
    if a.is_empty() || flat(var_a, a) || flat(var_b, b) {
        return Similarity {
            value: 0.0,
            degenerate: true,
        };
    }
    let value = match denominator {
        SimilarityDenominator::Std => (cov / (var_a.sqrt() * var_b.sqrt())).clamp(-1.0, 1.0),
        SimilarityDenominator::Var => cov / (var_a * var_b),
    };
    Similarity {
        value,
        degenerate: false,
    }
}

/// Similarity of the local content popularity of F-APs `m` and `n`.
pub fn popularity_similarity(scenario: &Scenario, m: usize, n: usize) -> Result<Similarity> {
    check_pair(scenario, m, n)?;
    Ok(similarity(
        &scenario.local_popularity(m)?,
        &scenario.local_popularity(n)?,
        scenario.params().similarity_denominator,
    ))
}

/// Social loss `c_{m,n} = sum_f sum_{u in U_m} (p_{u,f} J_c + P_m / R_{m,n}) L`.
pub fn social_loss(scenario: &Scenario, rates: &LinkRateTable, m: usize, n: usize) -> Result<f64> {
    check_pair(scenario, m, n)?;
    let p = scenario.params();
    let per_request = p.fap_power(m) / rates.coop(m, n);
    let mut total = 0.0;
    for &u in scenario.local_users(m) {
        for &puf in scenario.demand(u) {
            total += (puf * p.cache_coeff + per_request) * p.content_size;
        }
    }
    Ok(total)
}

/// Every intermediate quantity of the directed tie from `m` to `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairComponents {
    pub distance: f64,
    /// `p_{m,n}`
    pub contact: f64,
    /// `rho_{m,n}`
    pub similarity: Similarity,
    /// `g_{m,n} = p_{m,n} rho_{m,n}`
    pub contribution: f64,
    /// `c_{m,n}`
    pub loss: f64,
    /// `psi_{m,n}`
    pub relationship: f64,
}

pub fn pair_components(
    scenario: &Scenario,
    rates: &LinkRateTable,
    m: usize,
    n: usize,
    delta: f64,
) -> Result<PairComponents> {
    let contact = pair_contact(scenario, m, n)?;
    let similarity = popularity_similarity(scenario, m, n)?;
    let loss = social_loss(scenario, rates, m, n)?;
    let distance = scenario.fap_distance(m, n);
    let contribution = contact * similarity.value;
    let threshold = scenario.params().dist_threshold;
    let relationship = if distance <= threshold {
        (-distance / threshold).exp() * (contribution - delta * loss)
    } else {
        0.0
    };
    Ok(PairComponents {
        distance,
        contact,
        similarity,
        contribution,
        loss,
        relationship,
    })
}

/// Directed social relationship `psi_{m,n}`; zero beyond the distance threshold.
pub fn social_relationship(scenario: &Scenario, rates: &LinkRateTable, m: usize, n: usize, delta: f64) -> Result<f64> {
    pair_components(scenario, rates, m, n, delta).map(|c| c.relationship)
}

/// Symmetric matrix of mutual preferences `u_m(n)` with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SocialGraph {
    mutual: Vec<Vec<f64>>,
    components: Vec<Vec<Option<PairComponents>>>,
}

impl SocialGraph {
    /// Wraps an explicit preference matrix, which must be symmetric with a
    /// zero diagonal.
    pub fn from_matrix(mutual: Vec<Vec<f64>>) -> Result<Self> {
        let m = mutual.len();
        for (i, row) in mutual.iter().enumerate() {
            if row.len() != m {
                return Err(invalid("preference matrix is not square"));
            }
            if row[i] != 0.0 {
                return Err(invalid(format!("self preference of F-AP {i} is not zero")));
            }
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite() || *v != mutual[j][i] {
                    return Err(invalid(format!("preference ({i}, {j}) is not symmetric and finite")));
                }
            }
        }
        Ok(Self {
            components: vec![vec![None; m]; m],
            mutual,
        })
    }

    pub fn num_faps(&self) -> usize {
        self.mutual.len()
    }

    /// `u_m(n)`.
    pub fn preference(&self, m: usize, n: usize) -> f64 {
        self.mutual[m][n]
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.mutual
    }

    /// The directed tie components from `m` to `n`, when built from a scenario.
    pub fn components(&self, m: usize, n: usize) -> Option<&PairComponents> {
        self.components[m][n].as_ref()
    }

    /// Writes one CSV line per ordered pair with all tie components.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let path = std::path::PathBuf::from("<social dump>");
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |source| Error::Csv {
            path: path.clone(),
            source,
        };
        w.write_record([
            "m",
            "n",
            "distance",
            "contact",
            "similarity",
            "similarity_degenerate",
            "contribution",
            "loss",
            "relationship",
            "mutual",
        ])
        .map_err(csv_err)?;
        for m in 0..self.num_faps() {
            for n in 0..self.num_faps() {
                if m == n {
                    continue;
                }
                let mut rec = vec![m.to_string(), n.to_string()];
                match &self.components[m][n] {
                    Some(c) => rec.extend([
                        c.distance.to_string(),
                        c.contact.to_string(),
                        c.similarity.value.to_string(),
                        c.similarity.degenerate.to_string(),
                        c.contribution.to_string(),
                        c.loss.to_string(),
                        c.relationship.to_string(),
                    ]),
                    None => rec.extend(std::iter::repeat_n(String::new(), 7)),
                }
                rec.push(self.mutual[m][n].to_string());
                w.write_record(&rec).map_err(csv_err)?;
            }
        }
        w.flush().map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })
    }
}

/// Builds the mutual preference graph of all F-APs.
pub fn build_social_graph(scenario: &Scenario, rates: &LinkRateTable, delta: f64) -> Result<SocialGraph> {
    let count = scenario.num_faps();
    let mut components = vec![vec![None; count]; count];
    for (m, row) in components.iter_mut().enumerate() {
        for (n, slot) in row.iter_mut().enumerate() {
            if m != n {
                *slot = Some(pair_components(scenario, rates, m, n, delta)?);
            }
        }
    }
    let mutual = (0..count)
        .map(|m| {
            (0..count)
                .map(|n| {
                    if m == n {
                        0.0
                    } else {
                        let (a, b) = (m.min(n), m.max(n));
                        // same summation order for (m, n) and (n, m)
                        components[a][b].unwrap().relationship + components[b][a].unwrap().relationship
                    }
                })
                .collect()
        })
        .collect();
    Ok(SocialGraph { mutual, components })
}

/// Preference of `m` for a cluster: `U_m(S) = sum_{n in S} u_m(n)`.
pub fn cluster_preference(graph: &SocialGraph, m: usize, members: &[usize]) -> f64 {
    members.iter().map(|&n| graph.preference(m, n)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{FapPower, SystemParams};
    use crate::scenario::{generate_scenario, Point};
    use proptest::prelude::*;

    #[test]
    fn contact_examples() {
        assert_eq!(contact_probability(0.0, 1e-4).unwrap(), 0.0);
        let d = (std::f64::consts::LN_2 / std::f64::consts::PI).sqrt();
        assert!((contact_probability(d, 1.0).unwrap() - 0.5).abs() < 1e-15);
        // 1 - e^-pi to 30 digits: 0.956786081736227750
        assert!((contact_probability(100.0, 1e-4).unwrap() - 0.956_786_081_736_227_8).abs() < 1e-15);
        assert!(contact_probability(-1.0, 1.0).is_err());
        assert!(contact_probability(1.0, -1.0).is_err());
    }

    #[test]
    fn similarity_examples() {
        let a = [0.5, 0.3, 0.2];
        let s = similarity(&a, &a, SimilarityDenominator::Std);
        assert!((s.value - 1.0).abs() < 1e-12 && !s.degenerate);
        let b: Vec<f64> = a.iter().map(|x| 1.0 - 2.0 * x).collect();
        assert!((similarity(&a, &b, SimilarityDenominator::Std).value + 1.0).abs() < 1e-12);
        // hand computation: sum of products -13/300, sums of squares 14/300
        let r = similarity(&a, &[0.2, 0.3, 0.5], SimilarityDenominator::Std).value;
        assert!((r + 13.0 / 14.0).abs() < 1e-12, "{r}");
        let flat = similarity(&a, &[0.25; 3], SimilarityDenominator::Std);
        assert!(flat.degenerate && flat.value == 0.0);
        // variance denominator scales by 1 / (sd_a sd_b); both variances are 14/900
        let v = similarity(&a, &[0.2, 0.3, 0.5], SimilarityDenominator::Var).value;
        assert!((v - (-13.0 / 14.0) / (14.0 / 900.0)).abs() < 1e-9, "{v}");
    }

    /// F-AP 0 with one user at (10, 0); F-AP 1 at (100, 0) with one user at
    /// (100, 10); F-AP 2 far away with no users.
    fn toy(delta: f64) -> (Scenario, LinkRateTable) {
        let params = SystemParams {
            fap_power: FapPower::Uniform(40.0),
            cache_coeff: 1e-9,
            content_size: 2.0,
            capacity: 2.0,
            dist_threshold: 200.0,
            user_density: Some(1e-4),
            social_delta: delta,
            ..Default::default()
        };
        let s = Scenario::from_parts(
            params,
            vec![Point::new(0.0, 0.0), Point::new(100.0, 0.0), Point::new(900.0, 900.0)],
            vec![Point::new(10.0, 0.0), Point::new(100.0, 10.0)],
            vec![vec![0.6, 0.3, 0.1], vec![0.2, 0.5, 0.3]],
            0,
        )
        .unwrap();
        let r = LinkRateTable::from_matrices(
            vec![vec![1e8, 1e7], vec![1e7, 1e8], vec![1e6, 1e6]],
            vec![vec![0.0, 5e7, 1e6], vec![4e7, 0.0, 1e6], vec![1e6, 1e6, 0.0]],
        )
        .unwrap();
        (s, r)
    }

    #[test]
    fn pair_contact_and_loss() {
        let (s, r) = toy(1.0);
        assert_eq!(pair_contact(&s, 2, 0).unwrap(), 0.0);
        let d = 90f64.hypot(10.0);
        let expected = 1.0 - (-1e-4 * std::f64::consts::PI * d * d).exp();
        assert!((pair_contact(&s, 0, 1).unwrap() - expected).abs() < 1e-15);
        assert!(pair_contact(&s, 1, 1).is_err());

        assert_eq!(social_loss(&s, &r, 2, 0).unwrap(), 0.0);
        // |U_0| = 1, F = 3: L (J_c + 3 P / R)
        let c = social_loss(&s, &r, 0, 1).unwrap();
        assert!((c - 2.0 * (1e-9 + 3.0 * 40.0 / 5e7)).abs() < 1e-18);
    }

    #[test]
    fn relationship_by_hand() {
        let (s, r) = toy(0.5);
        let d = 90f64.hypot(10.0);
        let p01 = 1.0 - (-1e-4 * std::f64::consts::PI * d * d).exp();
        let rho = similarity(&[0.6, 0.3, 0.1], &[0.2, 0.5, 0.3], SimilarityDenominator::Std).value;
        let c01 = 2.0 * (1e-9 + 3.0 * 40.0 / 5e7);
        let c10 = 2.0 * (1e-9 + 3.0 * 40.0 / 4e7);
        let decay = (-100.0f64 / 200.0).exp();
        let psi01 = decay * (p01 * rho - 0.5 * c01);
        let psi10 = decay * (p01 * rho - 0.5 * c10);
        assert!((social_relationship(&s, &r, 0, 1, 0.5).unwrap() - psi01).abs() < 1e-15);
        // F-AP 2 is beyond the threshold
        assert_eq!(social_relationship(&s, &r, 0, 2, 0.5).unwrap(), 0.0);

        let g = build_social_graph(&s, &r, 0.5).unwrap();
        assert!((g.preference(0, 1) - (psi01 + psi10)).abs() < 1e-15);
        assert_eq!(g.preference(0, 1), g.preference(1, 0));
        assert_eq!(g.preference(2, 0), 0.0);
        assert_eq!(g.preference(1, 1), 0.0);
    }

    #[test]
    fn zero_delta_keeps_decayed_contribution() {
        let (s, r) = toy(0.0);
        let c = pair_components(&s, &r, 0, 1, 0.0).unwrap();
        assert_eq!(c.relationship, (-c.distance / 200.0f64).exp() * c.contribution);

        // co-located F-APs: no decay; F-AP 1 loses its users to F-AP 0
        let pos = vec![Point::new(0.0, 0.0), Point::new(0.0, 0.0), Point::new(900.0, 900.0)];
        let demand = (0..2).map(|u| s.demand(u).to_vec()).collect();
        let s0 = Scenario::from_parts(s.params().clone(), pos, s.user_pos().to_vec(), demand, 0).unwrap();
        let c0 = pair_components(&s0, &r, 0, 1, 0.0).unwrap();
        assert_eq!(c0.distance, 0.0);
        assert_eq!(c0.relationship, c0.contribution);
    }

    #[test]
    fn cluster_preference_examples() {
        let g =
            SocialGraph::from_matrix(vec![vec![0.0, 1.5, -0.5], vec![1.5, 0.0, 2.0], vec![-0.5, 2.0, 0.0]]).unwrap();
        assert_eq!(cluster_preference(&g, 0, &[]), 0.0);
        assert_eq!(cluster_preference(&g, 0, &[0]), 0.0);
        assert_eq!(cluster_preference(&g, 0, &[1, 2]), 1.0);
        assert!(SocialGraph::from_matrix(vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(SocialGraph::from_matrix(vec![vec![1.0]]).is_err());
    }

    #[test]
    fn generated_graph_is_symmetric_and_respects_threshold() {
        let params = SystemParams {
            num_faps: 8,
            num_users: 60,
            num_contents: 50,
            ..Default::default()
        };
        let s = generate_scenario(&params, 5).unwrap();
        let r = LinkRateTable::compute(&s);
        let g = build_social_graph(&s, &r, 1.0).unwrap();
        for m in 0..8 {
            assert_eq!(g.preference(m, m), 0.0);
            for n in 0..8 {
                assert_eq!(g.preference(m, n), g.preference(n, m));
                if m != n && s.fap_distance(m, n) > params.dist_threshold {
                    assert_eq!(g.components(m, n).unwrap().relationship, 0.0);
                    assert_eq!(g.preference(m, n), 0.0);
                }
            }
        }
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 8 * 7);
    }

    #[test]
    fn far_pairs_ignore_popularity_changes() {
        let params = SystemParams {
            num_faps: 6,
            num_users: 40,
            num_contents: 30,
            dist_threshold: 350.0,
            ..Default::default()
        };
        let s = generate_scenario(&params, 9).unwrap();
        let r = LinkRateTable::compute(&s);
        let g = build_social_graph(&s, &r, 1.0).unwrap();
        let p2 = SystemParams {
            pref_shuffle: 0.9,
            ..params
        };
        let s2 = generate_scenario(&p2, 9).unwrap();
        let g2 = build_social_graph(&s2, &r, 1.0).unwrap();
        for m in 0..6 {
            for n in 0..6 {
                if s.fap_distance(m, n) > 350.0 {
                    assert_eq!(g.preference(m, n), g2.preference(m, n));
                }
            }
        }
    }

    proptest! {
        #[test]
        fn preference_is_additive(
            vals in proptest::collection::vec(-5.0f64..5.0, 28),
            mask in proptest::collection::vec(0u8..3, 8),
        ) {
            let mut mat = vec![vec![0.0; 8]; 8];
            let mut it = vals.into_iter();
            for i in 0..8 {
                for j in i + 1..8 {
                    let v = it.next().unwrap();
                    mat[i][j] = v;
                    mat[j][i] = v;
                }
            }
            let g = SocialGraph::from_matrix(mat).unwrap();
            let a: Vec<usize> = (0..8).filter(|&i| mask[i] == 1).collect();
            let b: Vec<usize> = (0..8).filter(|&i| mask[i] == 2).collect();
            let ab: Vec<usize> = a.iter().chain(&b).copied().collect();
            let lhs = cluster_preference(&g, 0, &ab);
            let rhs = cluster_preference(&g, 0, &a) + cluster_preference(&g, 0, &b);
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}
