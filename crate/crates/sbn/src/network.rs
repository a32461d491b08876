//! Sigmoid belief networks: a DAG of binary units where each unit activates
//! with probability σ(Σ_j J_ij S_j + h_i) given its parents.
//!
//! Nodes are identified by their topological index; every edge must point
//! from a smaller index (parent) to a larger one (child), which makes
//! acyclicity a structural invariant. Construction rejects out-of-order or
//! duplicate edges instead of re-sorting.
//!
//! Log-probabilities are computed in log space throughout, via
//! `ln σ(±z) = -softplus(∓z)`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::math::{sigmoid, softplus};
use crate::rng::Rng64;

/// One directed edge: `parent < child`, with coupling weight `weight`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub child: usize,
    pub parent: usize,
    pub weight: f64,
}

/// A sigmoid belief network over binary nodes 0..N, stored as per-node biases
/// plus a sparse edge list with parent/child adjacency indexes.
///
/// Networks are immutable once built except through the explicit parameter
/// setters used by training; shared references are safe across threads.
#[derive(Debug, Clone)]
pub struct SigmoidBeliefNetwork {
    biases: Vec<f64>,
    /// Sorted by (child, parent); edges of one child are contiguous.
    edges: Vec<Edge>,
    /// CSR offsets into `edges`: incoming edges of node i occupy
    /// `edges[parent_offsets[i]..parent_offsets[i + 1]]`.
    parent_offsets: Vec<usize>,
    /// Outgoing edge indices per node, ascending child index.
    child_edges: Vec<Vec<u32>>,
}

impl SigmoidBeliefNetwork {
    /// Builds a network from biases and `(child, parent, weight)` triples.
    ///
    /// Rejects edges with `parent >= child`, duplicate `(child, parent)`
    /// pairs, indices out of range, and non-finite parameters.
    pub fn new(biases: Vec<f64>, edge_list: &[(usize, usize, f64)]) -> Result<Self> {
        let n = biases.len();
        for (i, h) in biases.iter().enumerate() {
            if !h.is_finite() {
                return Err(Error::NonFinite {
                    what: format!("bias of node {i}"),
                });
            }
        }
        let mut edges: Vec<Edge> = Vec::with_capacity(edge_list.len());
        for &(child, parent, weight) in edge_list {
            if child >= n {
                return Err(Error::NodeIndex {
                    index: child,
                    n_nodes: n,
                });
            }
            if parent >= child {
                return Err(Error::EdgeOrder { child, parent });
            }
            if !weight.is_finite() {
                return Err(Error::NonFinite {
                    what: format!("weight of edge ({child}, {parent})"),
                });
            }
            edges.push(Edge {
                child,
                parent,
                weight,
            });
        }
        edges.sort_by_key(|e| (e.child, e.parent));
        for w in edges.windows(2) {
            if w[0].child == w[1].child && w[0].parent == w[1].parent {
                return Err(Error::DuplicateEdge {
                    child: w[1].child,
                    parent: w[1].parent,
                });
            }
        }
        let mut parent_offsets = vec![0usize; n + 1];
        for e in &edges {
            parent_offsets[e.child + 1] += 1;
        }
        for i in 0..n {
            parent_offsets[i + 1] += parent_offsets[i];
        }
        let mut child_edges = vec![Vec::new(); n];
        for (idx, e) in edges.iter().enumerate() {
            child_edges[e.parent].push(idx as u32);
        }
        Ok(Self {
            biases,
            edges,
            parent_offsets,
            child_edges,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.biases.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn bias(&self, i: usize) -> f64 {
        self.biases[i]
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    /// Incoming edges of `i` (its parents), ascending parent index.
    pub fn parents(&self, i: usize) -> &[Edge] {
        &self.edges[self.parent_offsets[i]..self.parent_offsets[i + 1]]
    }

    /// Outgoing edges of `j` (its children), ascending child index.
    pub fn children(&self, j: usize) -> impl Iterator<Item = &Edge> + '_ {
        self.child_edges[j]
            .iter()
            .map(move |&e| &self.edges[e as usize])
    }

    /// All edges, sorted by (child, parent).
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Weight J_ij for child `i` and parent `j`, if that edge exists.
    pub fn weight(&self, child: usize, parent: usize) -> Option<f64> {
        let slice = self.parents(child);
        slice
            .binary_search_by_key(&parent, |e| e.parent)
            .ok()
            .map(|k| slice[k].weight)
    }

    fn check_node(&self, i: usize) -> Result<()> {
        if i < self.n_nodes() {
            Ok(())
        } else {
            Err(Error::NodeIndex {
                index: i,
                n_nodes: self.n_nodes(),
            })
        }
    }

    /// Adds `delta` to the weight of edge index `e` (training update).
    pub fn nudge_weight(&mut self, e: usize, delta: f64) {
        self.edges[e].weight += delta;
    }

    /// Adds `delta` to the bias of node `i` (training update).
    pub fn nudge_bias(&mut self, i: usize, delta: f64) {
        self.biases[i] += delta;
    }

    /// The summed input z_i = Σ_j J_ij S_j + h_i under `config`.
    pub fn local_field(&self, config: &FullConfiguration, i: usize) -> Result<f64> {
        self.check_node(i)?;
        let mut z = self.biases[i];
        for e in self.parents(i) {
            if config.bit(e.parent) == 1 {
                z += e.weight;
            }
        }
        Ok(z)
    }

    /// P(S_i = 1 | parents) = σ(z_i).
    pub fn activation_probability(&self, config: &FullConfiguration, i: usize) -> Result<f64> {
        Ok(sigmoid(self.local_field(config, i)?))
    }

    /// P(S_i = `config[i]` | parents): σ(z_i) when the configured bit is 1,
    /// 1 - σ(z_i) when it is 0.
    pub fn conditional(&self, config: &FullConfiguration, i: usize) -> Result<f64> {
        let z = self.local_field(config, i)?;
        Ok(if config.bit(i) == 1 {
            sigmoid(z)
        } else {
            sigmoid(-z)
        })
    }

    /// ln P(S) = Σ_i ln P(S_i | parents), accumulated in log space.
    pub fn log_joint(&self, config: &FullConfiguration) -> f64 {
        debug_assert_eq!(config.len(), self.n_nodes());
        let mut total = 0.0;
        for i in 0..self.n_nodes() {
            let z = self.local_field(config, i).expect("index checked");
            // ln σ(z) = -softplus(-z); ln(1 - σ(z)) = -softplus(z)
            total -= if config.bit(i) == 1 {
                softplus(-z)
            } else {
                softplus(z)
            };
        }
        total
    }

    /// Energy -ln P(S); the Boltzmann reading of the joint at unit
    /// temperature.
    pub fn energy(&self, config: &FullConfiguration) -> f64 {
        -self.log_joint(config)
    }

    /// Draws a full configuration by sampling each node after its parents
    /// (index order suffices: parents always precede children).
    pub fn sample(&self, rng: &mut Rng64) -> FullConfiguration {
        let mut bits = vec![0u8; self.n_nodes()];
        for i in 0..self.n_nodes() {
            let mut z = self.biases[i];
            for e in self.parents(i) {
                if bits[e.parent] == 1 {
                    z += e.weight;
                }
            }
            bits[i] = u8::from(rng.bernoulli(sigmoid(z)));
        }
        FullConfiguration(bits)
    }
}

/// A complete 0/1 assignment to all nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FullConfiguration(Vec<u8>);

impl FullConfiguration {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidProbability {
                value: f64::from(b),
                bounds: "{0, 1} (configuration bit)",
            });
        }
        Ok(Self(bits))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bit(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn set_bit(&mut self, i: usize, b: u8) {
        assert!(b <= 1, "bit must be 0 or 1");
        self.0[i] = b;
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }
}

/// A partial instantiation: clamped node -> bit. Hidden nodes are the
/// complement of the clamped key set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Evidence {
    clamped: BTreeMap<usize, u8>,
}

impl Evidence {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, u8)>) -> Result<Self> {
        let mut clamped = BTreeMap::new();
        for (i, b) in pairs {
            if b > 1 {
                return Err(Error::InvalidProbability {
                    value: f64::from(b),
                    bounds: "{0, 1} (evidence bit)",
                });
            }
            if clamped.insert(i, b).is_some() {
                return Err(Error::DuplicateEvidence { node: i });
            }
        }
        Ok(Self { clamped })
    }

    /// The clamped bit of node `i`, or None when `i` is hidden.
    pub fn bit(&self, i: usize) -> Option<u8> {
        self.clamped.get(&i).copied()
    }

    pub fn is_hidden(&self, i: usize) -> bool {
        !self.clamped.contains_key(&i)
    }

    pub fn n_clamped(&self) -> usize {
        self.clamped.len()
    }

    /// Clamped (node, bit) pairs in ascending node order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, u8)> + '_ {
        self.clamped.iter().map(|(&i, &b)| (i, b))
    }

    /// Hidden node indices of an N-node network, ascending.
    pub fn hidden_nodes(&self, n_nodes: usize) -> Vec<usize> {
        (0..n_nodes).filter(|i| self.is_hidden(*i)).collect()
    }

    /// Errors if any clamped index is out of range for an N-node network.
    pub fn check_against(&self, n_nodes: usize) -> Result<()> {
        match self.clamped.keys().next_back() {
            Some(&max) if max >= n_nodes => Err(Error::NodeIndex {
                index: max,
                n_nodes,
            }),
            _ => Ok(()),
        }
    }
}

/// Noisy-OR conditional: P(S_i = 1 | parents) = 1 - Π_j (1 - p_j)^{S_j},
/// the alternative local model where parents act as independent causes.
///
/// Each `p[j]` is the probability that parent j alone activates the child;
/// values must lie in [0, 1).
pub fn noisy_or_conditional(p: &[f64], parent_bits: &[u8]) -> Result<f64> {
    if p.len() != parent_bits.len() {
        return Err(Error::Dimension(format!(
            "{} cause probabilities vs {} parent bits",
            p.len(),
            parent_bits.len()
        )));
    }
    let mut survive = 1.0;
    for (&pj, &bit) in p.iter().zip(parent_bits) {
        if !(0.0..1.0).contains(&pj) {
            return Err(Error::InvalidProbability {
                value: pj,
                bounds: "[0, 1) (noisy-OR cause probability)",
            });
        }
        if bit == 1 {
            survive *= 1.0 - pj;
        }
    }
    Ok(1.0 - survive)
}

/// Noisy-OR gating function ρ(z) = 1 - e^{-z}.
pub fn noisy_or_gate(z: f64) -> f64 {
    -(-z).exp_m1()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain3() -> SigmoidBeliefNetwork {
        // 0 -> 1 -> 2 with hand-set parameters
        SigmoidBeliefNetwork::new(vec![0.3, -0.2, 0.7], &[(1, 0, 0.9), (2, 1, -1.1)]).unwrap()
    }

    fn random_net(n: usize, edge_prob: f64, rng: &mut Rng64) -> SigmoidBeliefNetwork {
        let biases: Vec<f64> = (0..n).map(|_| rng.next_range(-1.0, 1.0)).collect();
        let mut edges = Vec::new();
        for child in 1..n {
            for parent in 0..child {
                if rng.next_f64() < edge_prob {
                    edges.push((child, parent, rng.next_range(-1.0, 1.0)));
                }
            }
        }
        SigmoidBeliefNetwork::new(biases, &edges).unwrap()
    }

    fn config_from_index(n: usize, idx: usize) -> FullConfiguration {
        FullConfiguration::new((0..n).map(|k| ((idx >> k) & 1) as u8).collect()).unwrap()
    }

    #[test]
    fn construction_rejects_bad_edges() {
        assert!(matches!(
            SigmoidBeliefNetwork::new(vec![0.0, 0.0], &[(0, 1, 0.5)]),
            Err(Error::EdgeOrder { .. })
        ));
        assert!(matches!(
            SigmoidBeliefNetwork::new(vec![0.0, 0.0], &[(1, 1, 0.5)]),
            Err(Error::EdgeOrder { .. })
        ));
        assert!(matches!(
            SigmoidBeliefNetwork::new(vec![0.0, 0.0], &[(1, 0, 0.5), (1, 0, 0.2)]),
            Err(Error::DuplicateEdge { .. })
        ));
        assert!(matches!(
            SigmoidBeliefNetwork::new(vec![0.0, f64::NAN], &[]),
            Err(Error::NonFinite { .. })
        ));
        assert!(matches!(
            SigmoidBeliefNetwork::new(vec![0.0, 0.0], &[(2, 0, 0.5)]),
            Err(Error::NodeIndex { .. })
        ));
    }

    #[test]
    fn adjacency_views_are_consistent_and_sorted() {
        let mut rng = Rng64::new(11);
        let net = random_net(9, 0.5, &mut rng);
        let mut from_parents: Vec<(usize, usize, f64)> = Vec::new();
        for i in 0..net.n_nodes() {
            let mut last = None;
            for e in net.parents(i) {
                assert!(last.is_none_or(|p| p < e.parent));
                last = Some(e.parent);
                from_parents.push((e.child, e.parent, e.weight));
            }
        }
        let mut from_children: Vec<(usize, usize, f64)> = Vec::new();
        for j in 0..net.n_nodes() {
            let mut last = None;
            for e in net.children(j) {
                assert!(last.is_none_or(|c| c < e.child));
                last = Some(e.child);
                from_children.push((e.child, e.parent, e.weight));
            }
        }
        from_children.sort_by_key(|a| (a.0, a.1));
        assert_eq!(from_parents, from_children);
        assert_eq!(from_parents.len(), net.n_edges());
    }

    #[test]
    fn local_field_examples() {
        let net = SigmoidBeliefNetwork::new(vec![0.3], &[]).unwrap();
        let c = FullConfiguration::zeros(1);
        assert_eq!(net.local_field(&c, 0).unwrap(), 0.3);

        let net = SigmoidBeliefNetwork::new(vec![0.0, 0.4], &[(1, 0, 2.5)]).unwrap();
        let c = FullConfiguration::zeros(2);
        assert_eq!(net.local_field(&c, 1).unwrap(), 0.4);

        let net =
            SigmoidBeliefNetwork::new(vec![0.0, 0.0, 0.1], &[(2, 0, 0.5), (2, 1, -0.25)]).unwrap();
        let c = FullConfiguration::new(vec![1, 1, 0]).unwrap();
        assert!((net.local_field(&c, 2).unwrap() - 0.35).abs() < 1e-15);

        assert!(matches!(
            net.local_field(&c, 3),
            Err(Error::NodeIndex { .. })
        ));
    }

    #[test]
    fn conditional_examples() {
        let net = SigmoidBeliefNetwork::new(vec![0.0], &[]).unwrap();
        let mut c = FullConfiguration::zeros(1);
        c.set_bit(0, 1);
        assert_eq!(net.conditional(&c, 0).unwrap(), 0.5);

        // h = 2, single parent on, J = -2 -> sigma(0) = 0.5
        let net = SigmoidBeliefNetwork::new(vec![0.0, 2.0], &[(1, 0, -2.0)]).unwrap();
        let mut c = FullConfiguration::new(vec![1, 1]).unwrap();
        assert_eq!(net.conditional(&c, 1).unwrap(), 0.5);
        c.set_bit(1, 0);
        assert_eq!(net.conditional(&c, 1).unwrap(), 0.5);
    }

    #[test]
    fn conditional_normalizes() {
        let mut rng = Rng64::new(5);
        let net = random_net(7, 0.5, &mut rng);
        for trial in 0..50 {
            let mut c = config_from_index(7, trial * 37 % 128);
            for i in 0..7 {
                c.set_bit(i, 1);
                let p1 = net.conditional(&c, i).unwrap();
                c.set_bit(i, 0);
                let p0 = net.conditional(&c, i).unwrap();
                assert!((p0 + p1 - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn conditional_ignores_non_parents() {
        let mut rng = Rng64::new(6);
        let net = random_net(8, 0.4, &mut rng);
        for i in 0..8 {
            let parents: Vec<usize> = net.parents(i).iter().map(|e| e.parent).collect();
            let mut c = config_from_index(8, 0b1011_0101);
            let base = net.conditional(&c, i).unwrap();
            for k in 0..8 {
                if k != i && !parents.contains(&k) {
                    c.set_bit(k, 1 - c.bit(k));
                    assert_eq!(net.conditional(&c, i).unwrap(), base);
                }
            }
        }
    }

    #[test]
    fn log_joint_single_node() {
        let net = SigmoidBeliefNetwork::new(vec![0.0], &[]).unwrap();
        let mut c = FullConfiguration::zeros(1);
        c.set_bit(0, 1);
        assert!((net.log_joint(&c) - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn log_joint_zero_network_is_uniform() {
        let net = SigmoidBeliefNetwork::new(vec![0.0; 4], &[(1, 0, 0.0), (3, 2, 0.0)]).unwrap();
        let expect = -4.0 * 2f64.ln();
        for idx in 0..16 {
            let c = config_from_index(4, idx);
            assert!((net.log_joint(&c) - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn log_joint_sums_to_one() {
        let mut rng = Rng64::new(77);
        for n in [5usize, 12] {
            let net = random_net(n, 0.6, &mut rng);
            let total: f64 = (0..(1usize << n))
                .map(|idx| net.log_joint(&config_from_index(n, idx)).exp())
                .sum();
            assert!((total - 1.0).abs() < 1e-12, "n {n}: total {total}");
        }
    }

    #[test]
    fn energy_is_negated_log_joint() {
        let net = SigmoidBeliefNetwork::new(vec![0.0], &[]).unwrap();
        let mut c = FullConfiguration::zeros(1);
        c.set_bit(0, 1);
        assert!((net.energy(&c) - 2f64.ln()).abs() < 1e-15);

        let mut rng = Rng64::new(8);
        for _ in 0..1000 {
            let net = random_net(6, 0.5, &mut rng);
            let c = config_from_index(6, rng.next_below(64));
            assert_eq!(net.energy(&c), -net.log_joint(&c));
        }
    }

    #[test]
    fn energy_matches_three_term_form() {
        // -ln P(S) = -sum J S S - sum h S + sum softplus(z) evaluated directly
        let net = chain3();
        for idx in 0..8 {
            let c = config_from_index(3, idx);
            let (s0, s1, s2) = (
                f64::from(c.bit(0)),
                f64::from(c.bit(1)),
                f64::from(c.bit(2)),
            );
            let quad = 0.9 * s1 * s0 + (-1.1) * s2 * s1;
            let lin = 0.3 * s0 + (-0.2) * s1 + 0.7 * s2;
            let z0: f64 = 0.3;
            let z1: f64 = -0.2 + 0.9 * s0;
            let z2: f64 = 0.7 - 1.1 * s1;
            let sp = (1.0 + z0.exp()).ln() + (1.0 + z1.exp()).ln() + (1.0 + z2.exp()).ln();
            let direct = -quad - lin + sp;
            assert!((net.energy(&c) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn noisy_or_examples() {
        assert_eq!(noisy_or_conditional(&[0.3, 0.8], &[0, 0]).unwrap(), 0.0);
        assert_eq!(noisy_or_conditional(&[0.5], &[1]).unwrap(), 0.5);
        assert!((noisy_or_conditional(&[0.5, 0.5], &[1, 1]).unwrap() - 0.75).abs() < 1e-15);
        assert!(noisy_or_conditional(&[1.0], &[1]).is_err());
        assert!(noisy_or_conditional(&[-0.1], &[0]).is_err());
        assert!(noisy_or_conditional(&[0.5, 0.5], &[1]).is_err());
    }

    #[test]
    fn noisy_or_matches_gating_form() {
        let mut rng = Rng64::new(9);
        for _ in 0..200 {
            let k = 1 + rng.next_below(6);
            let p: Vec<f64> = (0..k).map(|_| rng.next_f64() * 0.99).collect();
            let bits: Vec<u8> = (0..k).map(|_| u8::from(rng.bernoulli(0.5))).collect();
            let direct = noisy_or_conditional(&p, &bits).unwrap();
            let theta_sum: f64 = p
                .iter()
                .zip(&bits)
                .filter(|(_, &b)| b == 1)
                .map(|(&pj, _)| -(1.0 - pj).ln())
                .sum();
            assert!((direct - noisy_or_gate(theta_sum)).abs() < 1e-12);
        }
    }

    #[test]
    fn sampling_matches_marginals() {
        let net = SigmoidBeliefNetwork::new(vec![0.0; 3], &[(2, 0, 0.0)]).unwrap();
        let mut rng = Rng64::new(10);
        let n = 100_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            let c = net.sample(&mut rng);
            for (i, cnt) in counts.iter_mut().enumerate() {
                *cnt += c.bit(i) as usize;
            }
        }
        for cnt in counts {
            let mean = cnt as f64 / n as f64;
            assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
        }

        let net = SigmoidBeliefNetwork::new(vec![2.0], &[]).unwrap();
        let mut rng = Rng64::new(11);
        let hits = (0..n).filter(|_| net.sample(&mut rng).bit(0) == 1).count();
        let mean = hits as f64 / n as f64;
        assert!((mean - sigmoid(2.0)).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn sampling_matches_exact_joint() {
        let mut rng = Rng64::new(12);
        let net = random_net(5, 0.6, &mut rng);
        let n = 1_000_000usize;
        let mut counts = vec![0usize; 32];
        for _ in 0..n {
            let c = net.sample(&mut rng);
            let idx: usize = (0..5).map(|k| (c.bit(k) as usize) << k).sum();
            counts[idx] += 1;
        }
        for (idx, &count) in counts.iter().enumerate() {
            let p = net.log_joint(&config_from_index(5, idx)).exp();
            let se = (p * (1.0 - p) / n as f64).sqrt();
            let observed = count as f64 / n as f64;
            assert!(
                (observed - p).abs() <= 3.0 * se + 1e-9,
                "cell {idx}: observed {observed}, exact {p}, se {se}"
            );
        }
    }

    #[test]
    fn evidence_checks() {
        let ev = Evidence::from_pairs([(0, 1), (3, 0)]).unwrap();
        assert_eq!(ev.bit(0), Some(1));
        assert_eq!(ev.bit(1), None);
        assert_eq!(ev.hidden_nodes(4), vec![1, 2]);
        assert!(ev.check_against(4).is_ok());
        assert!(ev.check_against(3).is_err());
        assert!(Evidence::from_pairs([(0, 2)]).is_err());
        assert!(Evidence::from_pairs([(0, 1), (0, 0)]).is_err());
    }
}
