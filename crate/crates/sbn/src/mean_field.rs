//! Variational mean-field inference for sigmoid belief networks.
//!
//! The posterior over hidden units is approximated by a product of
//! independent Bernoulli distributions with means μ_i. The intractable
//! expectation <ln(1 + e^{z_i})> in the bound is itself upper-bounded,
//! per node, by
//!
//! ```text
//! xi <z> + ln <e^{-xi z} + e^{(1-xi) z}>,
//! ```
//!
//! a convex function of the extra parameter ξ_i whose minimum lies in
//! [0, 1]. The two moments inside the logarithm factor over parents, so the
//! whole bound
//!
//! ```text
//! L_V = sum_ij J_ij mu_i mu_j + sum_i h_i mu_i
//!       - sum_i xi_i (sum_j J_ij mu_j + h_i)
//!       - sum_i ln <e^{-xi_i z_i} + e^{(1-xi_i) z_i}>
//!       + sum_i entropy(mu_i)
//! ```
//!
//! is cheap to evaluate. Solving alternates (i) independent 1-D
//! minimizations for every ξ_i with (ii) asynchronous fixed-point sweeps
//! over the hidden means
//!
//! ```text
//! mu_i = σ(h_i + sum_j [J_ij mu_j + J_ji (mu_j - xi_j) + K_ji]),
//! ```
//!
//! whose effective input collects the whole Markov blanket of unit i. Each
//! single-coordinate step cannot decrease L_V: the ξ step is an exact
//! minimization, and the μ step maximizes a tangent minorant of L_V in μ_i.
//!
//! A solve owns its state; many solves may share one immutable network.

use crate::error::{Error, Result};
use crate::math::{
    bernoulli_entropy, bernoulli_log_moment, log_sum_exp_2, one_minus_exp_over_moment, sigmoid,
};
use crate::network::{Evidence, SigmoidBeliefNetwork};

/// Lower clamp applied to hidden means inside the entropy term only.
const ENTROPY_CLAMP: f64 = 1e-12;

/// Variational parameters: one mean μ_i per node (clamped to the evidence
/// bit for visible nodes) and one bound parameter ξ_i in [0, 1] per node.
#[derive(Debug, Clone)]
pub struct MeanFieldState {
    mu: Vec<f64>,
    xi: Vec<f64>,
    visible: Vec<bool>,
}

impl MeanFieldState {
    /// Fresh state: hidden means at `init_mu`, visible means at their
    /// evidence bits, all ξ at 0.5 (the first ξ pass replaces them).
    pub fn init(net: &SigmoidBeliefNetwork, evidence: &Evidence, init_mu: f64) -> Result<Self> {
        evidence.check_against(net.n_nodes())?;
        if !(0.0..=1.0).contains(&init_mu) {
            return Err(Error::InvalidProbability {
                value: init_mu,
                bounds: "[0, 1] (initial mean)",
            });
        }
        let n = net.n_nodes();
        let mut mu = vec![init_mu; n];
        let mut visible = vec![false; n];
        for (i, b) in evidence.iter() {
            mu[i] = f64::from(b);
            visible[i] = true;
        }
        Ok(Self {
            mu,
            xi: vec![0.5; n],
            visible,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self, i: usize) -> f64 {
        self.mu[i]
    }

    pub fn xi(&self, i: usize) -> f64 {
        self.xi[i]
    }

    pub fn mus(&self) -> &[f64] {
        &self.mu
    }

    pub fn xis(&self) -> &[f64] {
        &self.xi
    }

    pub fn is_visible(&self, i: usize) -> bool {
        self.visible[i]
    }

    pub fn hidden_nodes(&self) -> Vec<usize> {
        (0..self.n_nodes()).filter(|&i| !self.visible[i]).collect()
    }

    /// Hidden means in ascending node order (the layout the exact-inference
    /// oracles take).
    pub fn hidden_mu(&self) -> Vec<f64> {
        (0..self.n_nodes())
            .filter(|&i| !self.visible[i])
            .map(|i| self.mu[i])
            .collect()
    }

    /// Sets a hidden mean; visible means are fixed by the evidence.
    pub fn set_mu(&mut self, i: usize, value: f64) -> Result<()> {
        if self.visible[i] {
            return Err(Error::VisibleNode { node: i });
        }
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::InvalidProbability {
                value,
                bounds: "[0, 1] (mean)",
            });
        }
        self.mu[i] = value;
        Ok(())
    }

    pub fn set_xi(&mut self, i: usize, value: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::InvalidProbability {
                value,
                bounds: "[0, 1] (xi)",
            });
        }
        self.xi[i] = value;
        Ok(())
    }
}

/// ln <e^{-ξ_i z_i}> = -ξ_i h_i + Σ_j ln(1 - μ_j + μ_j e^{-ξ_i J_ij}),
/// accumulated as a sum of logs.
pub fn log_moment_neg(net: &SigmoidBeliefNetwork, state: &MeanFieldState, i: usize) -> f64 {
    let xi = state.xi(i);
    let mut acc = -xi * net.bias(i);
    for e in net.parents(i) {
        acc += bernoulli_log_moment(state.mu(e.parent), -xi * e.weight);
    }
    acc
}

/// ln <e^{(1-ξ_i) z_i}>, same shape with exponent (1 - ξ_i).
pub fn log_moment_pos(net: &SigmoidBeliefNetwork, state: &MeanFieldState, i: usize) -> f64 {
    let one_minus_xi = 1.0 - state.xi(i);
    let mut acc = one_minus_xi * net.bias(i);
    for e in net.parents(i) {
        acc += bernoulli_log_moment(state.mu(e.parent), one_minus_xi * e.weight);
    }
    acc
}

/// φ_i = <e^{(1-ξ)z}> / (<e^{-ξz}> + <e^{(1-ξ)z}>), evaluated stably as a
/// sigmoid of the log-moment difference. Always in (0, 1).
pub fn phi(net: &SigmoidBeliefNetwork, state: &MeanFieldState, i: usize) -> f64 {
    sigmoid(log_moment_pos(net, state, i) - log_moment_neg(net, state, i))
}

/// K_ij = -∂/∂μ_j ln <e^{-ξ_i z_i} + e^{(1-ξ_i) z_i}>; zero unless j is a
/// parent of i, so K inherits the sparsity of J.
pub fn kappa(net: &SigmoidBeliefNetwork, state: &MeanFieldState, i: usize, j: usize) -> f64 {
    let Some(weight) = net.weight(i, j) else {
        return 0.0;
    };
    let phi_i = phi(net, state, i);
    let xi = state.xi(i);
    let mu_j = state.mu(j);
    (1.0 - phi_i) * one_minus_exp_over_moment(mu_j, -xi * weight)
        + phi_i * one_minus_exp_over_moment(mu_j, (1.0 - xi) * weight)
}

/// The bound L_V split into its five signed parts.
#[derive(Debug, Clone, Copy)]
pub struct BoundBreakdown {
    /// Σ_ij J_ij μ_i μ_j over edges.
    pub quadratic: f64,
    /// Σ_i h_i μ_i.
    pub bias: f64,
    /// Σ_i ξ_i (Σ_j J_ij μ_j + h_i).
    pub xi_linear: f64,
    /// Σ_i ln <e^{-ξ_i z_i} + e^{(1-ξ_i) z_i}>.
    pub log_moment: f64,
    /// Σ_i over hidden nodes of -[μ ln μ + (1-μ) ln(1-μ)].
    pub entropy: f64,
    /// quadratic + bias - xi_linear - log_moment + entropy.
    pub total: f64,
}

/// Evaluates the bound L_V <= ln P(V) at the given state.
///
/// Hidden means are clamped to [1e-12, 1 - 1e-12] inside the entropy term;
/// visible nodes contribute zero entropy.
pub fn bound(net: &SigmoidBeliefNetwork, state: &MeanFieldState) -> BoundBreakdown {
    let mut quadratic = 0.0;
    for e in net.edges() {
        quadratic += e.weight * state.mu(e.child) * state.mu(e.parent);
    }
    let mut bias = 0.0;
    let mut xi_linear = 0.0;
    let mut log_moment = 0.0;
    let mut entropy = 0.0;
    for i in 0..net.n_nodes() {
        bias += net.bias(i) * state.mu(i);
        let mut mean_field = net.bias(i);
        for e in net.parents(i) {
            mean_field += e.weight * state.mu(e.parent);
        }
        xi_linear += state.xi(i) * mean_field;
        log_moment += log_sum_exp_2(log_moment_neg(net, state, i), log_moment_pos(net, state, i));
        if !state.is_visible(i) {
            let m = state.mu(i).clamp(ENTROPY_CLAMP, 1.0 - ENTROPY_CLAMP);
            entropy += bernoulli_entropy(m);
        }
    }
    let total = quadratic + bias - xi_linear - log_moment + entropy;
    BoundBreakdown {
        quadratic,
        bias,
        xi_linear,
        log_moment,
        entropy,
        total,
    }
}

/// Golden-section search for the minimum of `f` on [0, 1]. Never evaluates
/// outside the interval; the returned argmin is within `tol` of a local
/// minimizer (the global one when `f` is convex, which holds for the ξ
/// objectives minimized here).
pub fn minimize_on_unit_interval(f: impl Fn(f64) -> f64, tol: f64) -> (f64, f64) {
    const INV_GOLDEN: f64 = 0.618_033_988_749_894_9; // (sqrt(5) - 1) / 2
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let mut c = b - INV_GOLDEN * (b - a);
    let mut d = a + INV_GOLDEN * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_GOLDEN * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// One full ξ pass: each ξ_i is set to the minimizer of its own bound term
///
/// ```text
/// g_i(ξ) = ξ (Σ_j J_ij μ_j + h_i) + ln <e^{-ξ z_i} + e^{(1-ξ) z_i}>,
/// ```
///
/// a convex function on [0, 1]. The ξ terms of different nodes do not
/// couple, so the pass is N independent line searches. A candidate is kept
/// only if it does not evaluate worse than the current ξ_i, which makes the
/// pass monotone in L_V even when the objective is flat.
pub fn update_xi(net: &SigmoidBeliefNetwork, state: &mut MeanFieldState, xi_tol: f64) {
    for i in 0..net.n_nodes() {
        let h = net.bias(i);
        let parents = net.parents(i);
        let mut mean_field = h;
        for e in parents {
            mean_field += e.weight * state.mu(e.parent);
        }
        let objective = |xi: f64| {
            let mut neg = -xi * h;
            let mut pos = (1.0 - xi) * h;
            for e in parents {
                let mu = state.mu(e.parent);
                neg += bernoulli_log_moment(mu, -xi * e.weight);
                pos += bernoulli_log_moment(mu, (1.0 - xi) * e.weight);
            }
            xi * mean_field + log_sum_exp_2(neg, pos)
        };
        let current = objective(state.xi(i));
        let (candidate, value) = minimize_on_unit_interval(objective, xi_tol);
        if value <= current {
            state.xi[i] = candidate;
        }
    }
}

/// One asynchronous fixed-point update of a hidden mean:
///
/// ```text
/// mu_i = σ(h_i + Σ_j [J_ij μ_j + J_ji (μ_j - ξ_j) + K_ji])
/// ```
///
/// The sum collects i's parents (J_ij terms) and children (J_ji and K_ji
/// terms); all other terms of the fixed-point equation vanish. The new mean
/// is written into the state and returned.
pub fn update_mu(net: &SigmoidBeliefNetwork, state: &mut MeanFieldState, i: usize) -> Result<f64> {
    if i >= net.n_nodes() {
        return Err(Error::NodeIndex {
            index: i,
            n_nodes: net.n_nodes(),
        });
    }
    if state.is_visible(i) {
        return Err(Error::VisibleNode { node: i });
    }
    let mut field = net.bias(i);
    for e in net.parents(i) {
        field += e.weight * state.mu(e.parent);
    }
    let children: Vec<(usize, f64)> = net.children(i).map(|e| (e.child, e.weight)).collect();
    for (child, weight) in children {
        field += weight * (state.mu(child) - state.xi(child));
        field += kappa(net, state, child, i);
    }
    let new_mu = sigmoid(field);
    state.mu[i] = new_mu;
    Ok(new_mu)
}

/// Knobs for [`solve`]; the defaults match the documented convergence
/// criteria (max |Δμ| < 1e-8 and |ΔL_V| < 1e-10 within 1000 sweeps).
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Initial hidden mean (maximum-entropy 0.5 by default).
    pub init_mu: f64,
    /// Sweep-to-sweep threshold on max |Δμ_i|.
    pub tol_mu: f64,
    /// Sweep-to-sweep threshold on |ΔL_V|.
    pub tol_bound: f64,
    /// Hard cap on alternating sweeps.
    pub max_sweeps: usize,
    /// Interval tolerance of each golden-section ξ minimization.
    pub xi_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            init_mu: 0.5,
            tol_mu: 1e-8,
            tol_bound: 1e-10,
            max_sweeps: 1000,
            xi_tol: 1e-10,
        }
    }
}

/// A converged (or capped) mean-field fit.
#[derive(Debug, Clone)]
pub struct Solution {
    pub state: MeanFieldState,
    pub bound: BoundBreakdown,
    /// False when the sweep cap was reached before both tolerances held.
    pub converged: bool,
    /// Sweeps actually performed.
    pub sweeps: usize,
}

/// Runs the alternating solver: a full ξ pass, then one asynchronous μ
/// sweep in ascending node order, repeated until both tolerances hold or
/// `max_sweeps` is reached. Non-convergence is reported in the solution,
/// not an error.
pub fn solve(
    net: &SigmoidBeliefNetwork,
    evidence: &Evidence,
    options: &SolveOptions,
) -> Result<Solution> {
    let mut state = MeanFieldState::init(net, evidence, options.init_mu)?;
    let hidden = state.hidden_nodes();
    let mut last = bound(net, &state);
    let mut converged = false;
    let mut sweeps = 0;
    for sweep in 1..=options.max_sweeps {
        sweeps = sweep;
        update_xi(net, &mut state, options.xi_tol);
        let mut max_delta_mu = 0.0f64;
        for &i in &hidden {
            let old = state.mu(i);
            let new = update_mu(net, &mut state, i).expect("hidden node update");
            max_delta_mu = max_delta_mu.max((new - old).abs());
        }
        let current = bound(net, &state);
        let delta_bound = (current.total - last.total).abs();
        last = current;
        if max_delta_mu < options.tol_mu && delta_bound < options.tol_bound {
            converged = true;
            break;
        }
    }
    Ok(Solution {
        state,
        bound: last,
        converged,
        sweeps,
    })
}
