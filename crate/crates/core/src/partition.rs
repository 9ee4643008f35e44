use std::fmt;

use crate::error::{invalid, Result};

/// A clustering of the F-APs into disjoint, nonempty coalitions.
///
/// Cluster member lists are kept sorted; cluster order is insertion order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    clusters: Vec<Vec<usize>>,
    member_of: Vec<usize>,
}

impl Partition {
    /// Validates that `clusters` is a disjoint cover of `0..num_faps`.
    pub fn from_clusters(num_faps: usize, clusters: Vec<Vec<usize>>) -> Result<Self> {
        let mut member_of = vec![usize::MAX; num_faps];
        let mut out = Vec::with_capacity(clusters.len());
        for mut c in clusters {
            if c.is_empty() {
                return Err(invalid("partition contains an empty cluster"));
            }
            c.sort_unstable();
            for &m in &c {
                if m >= num_faps {
                    return Err(invalid(format!("F-AP {m} out of range")));
                }
                if member_of[m] != usize::MAX {
                    return Err(invalid(format!("F-AP {m} appears in two clusters")));
                }
                member_of[m] = out.len();
            }
            out.push(c);
        }
        if let Some(m) = member_of.iter().position(|&k| k == usize::MAX) {
            return Err(invalid(format!("F-AP {m} is not in any cluster")));
        }
        Ok(Self {
            clusters: out,
            member_of,
        })
    }

    /// Every F-AP in its own cluster.
    pub fn singletons(num_faps: usize) -> Self {
        Self {
            clusters: (0..num_faps).map(|m| vec![m]).collect(),
            member_of: (0..num_faps).collect(),
        }
    }

    /// All F-APs in one cluster.
    pub fn whole(num_faps: usize) -> Self {
        Self {
            clusters: if num_faps == 0 {
                vec![]
            } else {
                vec![(0..num_faps).collect()]
            },
            member_of: vec![0; num_faps],
        }
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn cluster(&self, k: usize) -> &[usize] {
        &self.clusters[k]
    }

    /// Index of the cluster containing F-AP `m`.
    pub fn cluster_of(&self, m: usize) -> usize {
        self.member_of[m]
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn num_faps(&self) -> usize {
        self.member_of.len()
    }

    /// Moves `m` into cluster `target`, or into a new cluster when `None`.
    /// A cluster left empty is removed and later indices shift down.
    pub(crate) fn move_member(&mut self, m: usize, target: Option<usize>) {
        let from = self.member_of[m];
        let to = match target {
            Some(k) => k,
            None => {
                self.clusters.push(Vec::new());
                self.clusters.len() - 1
            }
        };
        debug_assert_ne!(from, to);
        self.clusters[from].retain(|&n| n != m);
        let pos = self.clusters[to].partition_point(|&n| n < m);
        self.clusters[to].insert(pos, m);
        self.member_of[m] = to;
        if self.clusters[from].is_empty() {
            self.clusters.remove(from);
            for k in self.member_of.iter_mut() {
                if *k > from {
                    *k -= 1;
                }
            }
        }
    }

    pub fn to_index_lists(&self) -> Vec<Vec<usize>> {
        self.clusters.clone()
    }

    #[cfg(test)]
    pub(crate) fn check_invariants(&self) {
        let rebuilt = Self::from_clusters(self.num_faps(), self.clusters.clone()).unwrap();
        assert_eq!(rebuilt.member_of, self.member_of);
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, c) in self.clusters.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for (i, m) in c.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{m}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}
