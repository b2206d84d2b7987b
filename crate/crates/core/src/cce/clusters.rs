use std::collections::{HashMap, HashSet};

use crate::lattice::BathRealization;
use crate::{Error, Result};

/// Connected spin clusters up to a maximum size, with links to every proper
/// subcluster present in the set.
///
/// Clusters are sorted index tuples, ordered by size and then
/// lexicographically. Connectivity is taken on the proximity graph with an
/// edge wherever two sites are at most `cutoff` apart.
#[derive(Debug, Clone)]
pub struct ClusterSet {
    max_order: usize,
    cutoff: f64,
    neighbors: Vec<Vec<usize>>,
    clusters: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
    subclusters: Vec<Vec<usize>>,
}

fn proximity_graph(bath: &BathRealization, cutoff: f64) -> Vec<Vec<usize>> {
    let n = bath.len();
    let mut neighbors = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if (bath.positions[j] - bath.positions[i]).norm() <= cutoff {
                neighbors[i].push(j);
                neighbors[j].push(i);
            }
        }
    }
    neighbors
}

/// All connected subsets of size ≤ `max_order` (clamped to the site count).
pub fn enumerate_clusters(
    bath: &BathRealization,
    cutoff: f64,
    max_order: usize,
) -> Result<ClusterSet> {
    if max_order == 0 {
        return Err(Error::param("cce_order", "must be at least 1"));
    }
    if !(cutoff >= 0.0) {
        return Err(Error::param("rc", "cutoff radius must be nonnegative"));
    }
    if bath.is_empty() {
        return Err(Error::EmptyBath);
    }
    let max_order = max_order.min(bath.len());
    let neighbors = proximity_graph(bath, cutoff);

    let mut clusters: Vec<Vec<usize>> = (0..bath.len()).map(|i| vec![i]).collect();
    let mut layer_start = 0;
    for _ in 1..max_order {
        let mut next: HashSet<Vec<usize>> = HashSet::new();
        for c in &clusters[layer_start..] {
            for &site in c {
                for &nb in &neighbors[site] {
                    if c.contains(&nb) {
                        continue;
                    }
                    let mut grown = c.clone();
                    let pos = grown.partition_point(|&x| x < nb);
                    grown.insert(pos, nb);
                    next.insert(grown);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        let mut next: Vec<Vec<usize>> = next.into_iter().collect();
        next.sort_unstable();
        layer_start = clusters.len();
        clusters.extend(next);
    }
    Ok(ClusterSet::assemble(max_order, cutoff, neighbors, clusters))
}

impl ClusterSet {
    /// Builds a set from an explicit cluster list (each sorted and
    /// deduplicated); use [`ClusterSet::validate`] to check closure.
    pub fn from_clusters(
        bath: &BathRealization,
        cutoff: f64,
        clusters: impl IntoIterator<Item = Vec<usize>>,
    ) -> Result<ClusterSet> {
        let mut list: Vec<Vec<usize>> = Vec::new();
        for mut c in clusters {
            c.sort_unstable();
            if let Some(w) = c.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::DuplicateSite(w[0]));
            }
            if c.is_empty() {
                return Err(Error::param("cluster", "must be non-empty"));
            }
            if let Some(&bad) = c.iter().find(|&&i| i >= bath.len()) {
                return Err(Error::SiteOutOfRange {
                    index: bad,
                    len: bath.len(),
                });
            }
            list.push(c);
        }
        list.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        list.dedup();
        let max_order = list.last().map_or(0, Vec::len);
        Ok(ClusterSet::assemble(
            max_order,
            cutoff,
            proximity_graph(bath, cutoff),
            list,
        ))
    }

    fn assemble(
        max_order: usize,
        cutoff: f64,
        neighbors: Vec<Vec<usize>>,
        clusters: Vec<Vec<usize>>,
    ) -> Self {
        let index: HashMap<Vec<usize>, usize> = clusters
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i))
            .collect();
        let subclusters = clusters
            .iter()
            .map(|c| {
                proper_subsets(c)
                    .filter_map(|s| index.get(&s).copied())
                    .collect::<Vec<_>>()
            })
            .collect();
        ClusterSet {
            max_order,
            cutoff,
            neighbors,
            clusters,
            index,
            subclusters,
        }
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn cluster(&self, k: usize) -> &[usize] {
        &self.clusters[k]
    }

    pub fn position(&self, cluster: &[usize]) -> Option<usize> {
        self.index.get(cluster).copied()
    }

    /// Indices of the proper subclusters of cluster `k` present in the set.
    pub fn subclusters(&self, k: usize) -> &[usize] {
        &self.subclusters[k]
    }

    /// Number of clusters of each size, index 0 = singletons.
    pub fn counts_by_size(&self) -> Vec<usize> {
        let mut out = vec![0; self.max_order];
        for c in &self.clusters {
            out[c.len() - 1] += 1;
        }
        out
    }

    pub fn is_connected(&self, sites: &[usize]) -> bool {
        let Some(&start) = sites.first() else {
            return false;
        };
        let mut seen = vec![start];
        let mut stack = vec![start];
        while let Some(s) = stack.pop() {
            for &nb in &self.neighbors[s] {
                if sites.contains(&nb) && !seen.contains(&nb) {
                    seen.push(nb);
                    stack.push(nb);
                }
            }
        }
        seen.len() == sites.len()
    }

    /// Checks the set invariants: every singleton is present, every cluster
    /// is connected, and every connected subcluster of a member is a member.
    pub fn validate(&self) -> Result<()> {
        for i in 0..self.neighbors.len() {
            if !self.index.contains_key(&vec![i]) {
                return Err(Error::MissingSubcluster(format!(
                    "singleton {{{i}}} absent"
                )));
            }
        }
        for c in &self.clusters {
            if !self.is_connected(c) {
                return Err(Error::MissingSubcluster(format!(
                    "cluster {c:?} is not connected"
                )));
            }
            for s in proper_subsets(c) {
                if self.is_connected(&s) && !self.index.contains_key(&s) {
                    return Err(Error::MissingSubcluster(format!(
                        "connected subcluster {s:?} of {c:?} absent"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Sparse expansion of C̃_k over C's, given the expansions of its
    /// subclusters.
    fn tilde_terms<'a>(
        &self,
        k: usize,
        lookup: impl Fn(usize) -> &'a [(usize, i64)],
    ) -> Vec<(usize, i64)> {
        let mut terms: HashMap<usize, i64> = HashMap::new();
        terms.insert(k, 1);
        for &s in &self.subclusters[k] {
            for &(idx, coef) in lookup(s) {
                *terms.entry(idx).or_insert(0) -= coef;
            }
        }
        let mut terms: Vec<(usize, i64)> = terms.into_iter().filter(|&(_, c)| c != 0).collect();
        terms.sort_unstable();
        terms
    }

    /// C̃_k = Σ coef·C_idx, from the subtraction recursion over the
    /// subclusters of `k`.
    pub fn irreducible_expansion(&self, k: usize) -> Vec<(usize, i64)> {
        let mut family: Vec<usize> = self.subclusters[k].to_vec();
        family.sort_unstable();
        let mut tilde: HashMap<usize, Vec<(usize, i64)>> = HashMap::new();
        for &c in &family {
            let terms = self.tilde_terms(c, |s| tilde[&s].as_slice());
            tilde.insert(c, terms);
        }
        self.tilde_terms(k, |s| tilde[&s].as_slice())
    }

    /// Integer weight of each cluster's correlation in the truncated
    /// expansion, so that Σ_{|ζ|≤order} C̃_ζ = Σ_η weight_η·C_η. Built by
    /// running the subtraction recursion on the coefficients themselves, in
    /// increasing cluster size.
    pub fn expansion_weights(&self, order: usize) -> Vec<i64> {
        let mut tilde: Vec<Vec<(usize, i64)>> = Vec::with_capacity(self.len());
        let mut weights = vec![0i64; self.len()];
        for k in 0..self.len() {
            let terms = self.tilde_terms(k, |s| tilde[s].as_slice());
            if self.clusters[k].len() <= order {
                for &(idx, coef) in &terms {
                    weights[idx] += coef;
                }
            }
            tilde.push(terms);
        }
        weights
    }
}

fn proper_subsets(c: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let n = c.len();
    let full = (1u32 << n) - 1;
    (1..full).map(move |mask| {
        (0..n)
            .filter(|b| mask & (1 << b) != 0)
            .map(|b| c[b])
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{A0_DIAMOND, GAMMA_C13};
    use crate::lattice::{SpeciesParams, Vec3};
    use crate::spinops::Spin;

    fn bath_at(points: &[[f64; 3]]) -> BathRealization {
        let sp =
            SpeciesParams::with_peak_ratio(Spin::HALF, GAMMA_C13, 3.4e-9, 1e4, A0_DIAMOND).unwrap();
        let pos: Vec<Vec3> = points.iter().map(|p| Vec3::from(*p) * 1e-10).collect();
        BathRealization::from_positions(A0_DIAMOND, sp, pos, Vec3::z()).unwrap()
    }

    #[test]
    fn three_close_sites() {
        let b = bath_at(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        let set = enumerate_clusters(&b, 2e-10, 3).unwrap();
        assert_eq!(set.len(), 7);
        assert_eq!(set.counts_by_size(), vec![3, 3, 1]);
        set.validate().unwrap();
        assert_eq!(set.subclusters(6).len(), 6);
    }

    #[test]
    fn distant_sites_form_no_pair() {
        let b = bath_at(&[[0.0, 0.0, 0.0], [10.0, 0.0, 0.0]]);
        let set = enumerate_clusters(&b, 2e-10, 2).unwrap();
        assert_eq!(set.counts_by_size(), vec![2, 0]);
    }

    #[test]
    fn chain_connectivity() {
        let b = bath_at(&[[0.0, 0.0, 0.0], [1.5, 0.0, 0.0], [3.0, 0.0, 0.0]]);
        let set = enumerate_clusters(&b, 2e-10, 3).unwrap();
        assert!(set.position(&[0, 1]).is_some());
        assert!(set.position(&[1, 2]).is_some());
        assert!(set.position(&[0, 2]).is_none());
        assert!(set.position(&[0, 1, 2]).is_some());
        // triple links to 3 singletons + 2 pairs
        assert_eq!(set.subclusters(set.position(&[0, 1, 2]).unwrap()).len(), 5);
    }

    #[test]
    fn order_clamped_and_errors() {
        let b = bath_at(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]);
        let set = enumerate_clusters(&b, 2e-10, 5).unwrap();
        assert_eq!(set.max_order(), 2);
        assert!(enumerate_clusters(&b, 2e-10, 0).is_err());
        let empty = bath_at(&[]);
        assert!(matches!(
            enumerate_clusters(&empty, 2e-10, 2),
            Err(Error::EmptyBath)
        ));
    }

    #[test]
    fn validate_detects_missing_subcluster() {
        let b = bath_at(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        let set = ClusterSet::from_clusters(
            &b,
            2e-10,
            vec![vec![0], vec![1], vec![2], vec![0, 1, 2], vec![0, 1]],
        )
        .unwrap();
        assert!(matches!(set.validate(), Err(Error::MissingSubcluster(_))));
        let ok = ClusterSet::from_clusters(&b, 2e-10, vec![vec![0], vec![1], vec![2], vec![1, 0]])
            .unwrap();
        ok.validate().unwrap();
    }

    #[test]
    fn weights_for_complete_triangle() {
        // Full expansion of a connected triple: only the largest cluster survives.
        let b = bath_at(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        let set = enumerate_clusters(&b, 2e-10, 3).unwrap();
        assert_eq!(set.expansion_weights(3), vec![0, 0, 0, 0, 0, 0, 1]);
        // Order 2: C = Σ C_pairs − Σ C_singletons
        assert_eq!(set.expansion_weights(2), vec![-1, -1, -1, 1, 1, 1, 0]);
        assert_eq!(set.expansion_weights(1), vec![1, 1, 1, 0, 0, 0, 0]);
    }

    #[test]
    fn irreducible_expansion_of_chain() {
        let b = bath_at(&[[0.0, 0.0, 0.0], [1.5, 0.0, 0.0], [3.0, 0.0, 0.0]]);
        let set = enumerate_clusters(&b, 2e-10, 3).unwrap();
        let pos = |c: &[usize]| set.position(c).unwrap();
        let mut want = vec![
            (pos(&[0, 1, 2]), 1),
            (pos(&[0, 1]), -1),
            (pos(&[1, 2]), -1),
            (pos(&[1]), 1),
        ];
        want.sort_unstable();
        assert_eq!(set.irreducible_expansion(pos(&[0, 1, 2])), want);
        assert_eq!(set.irreducible_expansion(pos(&[2])), vec![(pos(&[2]), 1)]);
    }

    #[test]
    fn weights_for_chain() {
        let b = bath_at(&[[0.0, 0.0, 0.0], [1.5, 0.0, 0.0], [3.0, 0.0, 0.0]]);
        let set = enumerate_clusters(&b, 2e-10, 3).unwrap();
        // C̃_abc = C_abc − C_ab − C_bc + C_b; adding lower orders leaves C_abc.
        let w = set.expansion_weights(3);
        let abc = set.position(&[0, 1, 2]).unwrap();
        for (k, &x) in w.iter().enumerate() {
            assert_eq!(x, if k == abc { 1 } else { 0 });
        }
    }
}
