//! Brute-force oracles: exact likelihood, posterior tables, KL divergence,
//! and exact expectations of the softplus term under a factorized
//! distribution.
//!
//! Everything here enumerates hidden completions (or parent states), so hard
//! guards cap the enumeration size; exceeding a guard is an error rather
//! than a silent stall. These functions are pure and safe to call
//! concurrently.

use crate::error::{Error, Result};
use crate::math::{bernoulli_entropy, softplus, StreamingLogSumExp};
use crate::network::{Evidence, FullConfiguration, SigmoidBeliefNetwork};

/// Enumeration cap for [`log_likelihood`] (2^25 completions).
pub const MAX_HIDDEN_LIKELIHOOD: usize = 25;
/// Enumeration cap for [`posterior_table`] and [`kl_divergence`].
pub const MAX_HIDDEN_TABLE: usize = 20;
/// Per-node parent cap for [`expected_softplus`].
pub const MAX_PARENTS: usize = 20;

fn check_hidden_guard(count: usize, limit: usize) -> Result<()> {
    if count > limit {
        Err(Error::HiddenSetTooLarge { count, limit })
    } else {
        Ok(())
    }
}

/// Writes hidden bits `mask` into `config`; bit k of the mask is the k-th
/// hidden node in ascending index order.
fn apply_mask(config: &mut FullConfiguration, hidden: &[usize], mask: usize) {
    for (k, &node) in hidden.iter().enumerate() {
        config.set_bit(node, ((mask >> k) & 1) as u8);
    }
}

fn base_config(net: &SigmoidBeliefNetwork, evidence: &Evidence) -> FullConfiguration {
    let mut config = FullConfiguration::zeros(net.n_nodes());
    for (i, b) in evidence.iter() {
        config.set_bit(i, b);
    }
    config
}

/// ln P(V): log-sum-exp over all hidden completions of the log-joint.
pub fn log_likelihood(net: &SigmoidBeliefNetwork, evidence: &Evidence) -> Result<f64> {
    evidence.check_against(net.n_nodes())?;
    let hidden = evidence.hidden_nodes(net.n_nodes());
    check_hidden_guard(hidden.len(), MAX_HIDDEN_LIKELIHOOD)?;
    let mut config = base_config(net, evidence);
    let mut lse = StreamingLogSumExp::new();
    for mask in 0..(1usize << hidden.len()) {
        apply_mask(&mut config, &hidden, mask);
        lse.push(net.log_joint(&config));
    }
    Ok(lse.value())
}

/// The exact posterior P(H | V) laid out over all hidden configurations.
///
/// Entry `mask` holds the probability of the completion where bit k of the
/// mask gives the value of the k-th hidden node (ascending index order).
#[derive(Debug, Clone)]
pub struct PosteriorTable {
    hidden: Vec<usize>,
    probs: Vec<f64>,
    log_likelihood: f64,
}

impl PosteriorTable {
    pub fn hidden_nodes(&self) -> &[usize] {
        &self.hidden
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, mask: usize) -> f64 {
        self.probs[mask]
    }

    pub fn log_likelihood(&self) -> f64 {
        self.log_likelihood
    }

    /// Posterior marginal P(S_node = 1 | V) for a hidden node.
    pub fn marginal(&self, node: usize) -> Result<f64> {
        let k = self
            .hidden
            .iter()
            .position(|&h| h == node)
            .ok_or(Error::VisibleNode { node })?;
        Ok(self
            .probs
            .iter()
            .enumerate()
            .filter(|(mask, _)| (mask >> k) & 1 == 1)
            .map(|(_, &p)| p)
            .sum())
    }
}

/// Enumerates P(H | V) = exp(ln P(H, V) - ln P(V)) for every completion.
pub fn posterior_table(net: &SigmoidBeliefNetwork, evidence: &Evidence) -> Result<PosteriorTable> {
    evidence.check_against(net.n_nodes())?;
    let hidden = evidence.hidden_nodes(net.n_nodes());
    check_hidden_guard(hidden.len(), MAX_HIDDEN_TABLE)?;
    let mut config = base_config(net, evidence);
    let mut log_joints = Vec::with_capacity(1usize << hidden.len());
    let mut lse = StreamingLogSumExp::new();
    for mask in 0..(1usize << hidden.len()) {
        apply_mask(&mut config, &hidden, mask);
        let lj = net.log_joint(&config);
        log_joints.push(lj);
        lse.push(lj);
    }
    let log_likelihood = lse.value();
    let probs = log_joints
        .into_iter()
        .map(|lj| (lj - log_likelihood).exp())
        .collect();
    Ok(PosteriorTable {
        hidden,
        probs,
        log_likelihood,
    })
}

fn check_mu(mu: &[f64], expected_len: usize, what: &str) -> Result<()> {
    if mu.len() != expected_len {
        return Err(Error::Dimension(format!(
            "{what}: got {} means, expected {expected_len}",
            mu.len()
        )));
    }
    for &m in mu {
        if !(0.0..=1.0).contains(&m) {
            return Err(Error::InvalidProbability {
                value: m,
                bounds: "[0, 1] (mean)",
            });
        }
    }
    Ok(())
}

/// KL(Q || P(H|V)) for the product-Bernoulli Q with hidden means `mu`
/// (ascending hidden index order). Uses the 0 ln 0 := 0 convention; an
/// infinite value is possible only when the posterior itself has zeros.
pub fn kl_divergence(net: &SigmoidBeliefNetwork, evidence: &Evidence, mu: &[f64]) -> Result<f64> {
    evidence.check_against(net.n_nodes())?;
    let hidden = evidence.hidden_nodes(net.n_nodes());
    check_hidden_guard(hidden.len(), MAX_HIDDEN_TABLE)?;
    check_mu(mu, hidden.len(), "kl_divergence")?;
    let log_z = log_likelihood(net, evidence)?;
    let mut config = base_config(net, evidence);
    let mut kl = 0.0;
    for mask in 0..(1usize << hidden.len()) {
        // ln Q(h); a zero factor kills the whole term (0 ln 0 := 0)
        let mut log_q = 0.0;
        let mut q_zero = false;
        for (k, &m) in mu.iter().enumerate() {
            let factor = if (mask >> k) & 1 == 1 { m } else { 1.0 - m };
            if factor == 0.0 {
                q_zero = true;
                break;
            }
            log_q += factor.ln();
        }
        if q_zero {
            continue;
        }
        apply_mask(&mut config, &hidden, mask);
        let log_p = net.log_joint(&config) - log_z;
        kl += log_q.exp() * (log_q - log_p);
    }
    Ok(kl)
}

/// Exact <softplus(z_i)> under independent Bernoulli parents with the given
/// per-node means, by enumerating the states of pa(S_i).
pub fn expected_softplus(net: &SigmoidBeliefNetwork, mu: &[f64], i: usize) -> Result<f64> {
    if i >= net.n_nodes() {
        return Err(Error::NodeIndex {
            index: i,
            n_nodes: net.n_nodes(),
        });
    }
    check_mu(mu, net.n_nodes(), "expected_softplus")?;
    let parents = net.parents(i);
    if parents.len() > MAX_PARENTS {
        return Err(Error::TooManyParents {
            node: i,
            count: parents.len(),
            limit: MAX_PARENTS,
        });
    }
    let mut total = 0.0;
    for mask in 0..(1usize << parents.len()) {
        let mut weight = 1.0;
        let mut z = net.bias(i);
        for (k, e) in parents.iter().enumerate() {
            if (mask >> k) & 1 == 1 {
                weight *= mu[e.parent];
                z += e.weight;
            } else {
                weight *= 1.0 - mu[e.parent];
            }
        }
        if weight > 0.0 {
            total += weight * softplus(z);
        }
    }
    Ok(total)
}

/// The factorized lower bound on ln P(V) with the softplus expectations
/// computed exactly:
///
/// ```text
/// sum_ij J_ij mu_i mu_j + sum_i h_i mu_i - sum_i <softplus(z_i)> + entropy
/// ```
///
/// `mu` holds the hidden means in ascending hidden index order; visible
/// means are the clamped bits. The gap ln P(V) - bound equals the KL
/// divergence of the same factorized distribution.
pub fn mean_field_bound(
    net: &SigmoidBeliefNetwork,
    evidence: &Evidence,
    mu: &[f64],
) -> Result<f64> {
    evidence.check_against(net.n_nodes())?;
    let hidden = evidence.hidden_nodes(net.n_nodes());
    check_mu(mu, hidden.len(), "mean_field_bound")?;
    let mut full_mu = vec![0.0; net.n_nodes()];
    for (i, b) in evidence.iter() {
        full_mu[i] = f64::from(b);
    }
    for (k, &node) in hidden.iter().enumerate() {
        full_mu[node] = mu[k];
    }
    let mut total = 0.0;
    for e in net.edges() {
        total += e.weight * full_mu[e.child] * full_mu[e.parent];
    }
    for i in 0..net.n_nodes() {
        total += net.bias(i) * full_mu[i];
        total -= expected_softplus(net, &full_mu, i)?;
    }
    for &node in &hidden {
        total += bernoulli_entropy(full_mu[node]);
    }
    Ok(total)
}
