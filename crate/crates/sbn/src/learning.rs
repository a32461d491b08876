//! Gradient-ascent learning on the mean-field bound, maximum-likelihood
//! classification, and score normalization.
//!
//! For a converged state the partial derivatives of the bound at fixed
//! (μ, ξ) are also its total derivatives in the parameters, because the
//! state sits at an interior stationary point; training therefore clamps
//! each pattern, solves, and steps every weight and bias along the
//! closed-form gradients.

use crate::error::{Error, Result};
use crate::io::BitmapDataset;
use crate::math::exp_over_moment;
use crate::mean_field::{phi, solve, MeanFieldState, SolveOptions};
use crate::network::{Evidence, SigmoidBeliefNetwork};
use crate::rng::Rng64;

/// ∂L_V/∂J_ij at fixed (μ, ξ):
///
/// ```text
/// -(ξ_i - μ_i) μ_j
///   + (1 - φ_i) ξ_i μ_j e^{-ξ_i J_ij}     / (1 - μ_j + μ_j e^{-ξ_i J_ij})
///   - φ_i (1 - ξ_i) μ_j e^{(1-ξ_i) J_ij}  / (1 - μ_j + μ_j e^{(1-ξ_i) J_ij})
/// ```
///
/// `j` must be a parent of `i`.
pub fn grad_weight(
    net: &SigmoidBeliefNetwork,
    state: &MeanFieldState,
    i: usize,
    j: usize,
) -> Result<f64> {
    let Some(weight) = net.weight(i, j) else {
        return Err(Error::Dimension(format!("no edge ({i}, {j})")));
    };
    let phi_i = phi(net, state, i);
    let xi = state.xi(i);
    let mu_i = state.mu(i);
    let mu_j = state.mu(j);
    Ok(
        -(xi - mu_i) * mu_j + (1.0 - phi_i) * xi * mu_j * exp_over_moment(mu_j, -xi * weight)
            - phi_i * (1.0 - xi) * mu_j * exp_over_moment(mu_j, (1.0 - xi) * weight),
    )
}

/// ∂L_V/∂h_i at fixed (μ, ξ): simply μ_i - φ_i.
pub fn grad_bias(net: &SigmoidBeliefNetwork, state: &MeanFieldState, i: usize) -> f64 {
    state.mu(i) - phi(net, state, i)
}

/// Training hyperparameters. `sweeps` counts passes through the whole
/// training set; each pattern triggers one solve and one gradient step on
/// all parameters.
#[derive(Debug, Clone)]
pub struct TrainOptions {
    /// Learning rate η.
    pub rate: f64,
    /// Passes through the training set.
    pub sweeps: usize,
    /// Seed for the pattern-order shuffle.
    pub seed: u64,
    /// Reshuffle the pattern order each sweep; in-file order otherwise.
    pub shuffle: bool,
    /// Solver settings used per pattern.
    pub solve: SolveOptions,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            rate: 0.05,
            sweeps: 5,
            seed: 0,
            shuffle: true,
            solve: SolveOptions::default(),
        }
    }
}

/// Outcome of [`train`]: the adapted network, the per-sweep mean of the
/// bound over training patterns, and how many solves hit the sweep cap.
#[derive(Debug, Clone)]
pub struct TrainResult {
    pub net: SigmoidBeliefNetwork,
    pub trace: Vec<f64>,
    pub non_converged: usize,
}

fn check_visible_map(net: &SigmoidBeliefNetwork, visible_map: &[usize]) -> Result<()> {
    let mut seen = vec![false; net.n_nodes()];
    for &node in visible_map {
        if node >= net.n_nodes() {
            return Err(Error::NodeIndex {
                index: node,
                n_nodes: net.n_nodes(),
            });
        }
        if seen[node] {
            return Err(Error::Dimension(format!("visible map repeats node {node}")));
        }
        seen[node] = true;
    }
    Ok(())
}

fn pattern_evidence(pattern: &[u8], visible_map: &[usize]) -> Result<Evidence> {
    Evidence::from_pairs(visible_map.iter().cloned().zip(pattern.iter().cloned()))
}

/// Gradient ascent on the bound: for each pattern, clamp it onto the
/// visible map, solve the mean-field equations, and move every weight and
/// bias by η times its gradient. Patterns are revisited `sweeps` times.
pub fn train(
    net: SigmoidBeliefNetwork,
    dataset: &BitmapDataset,
    visible_map: &[usize],
    options: &TrainOptions,
) -> Result<TrainResult> {
    if options.rate < 0.0 || !options.rate.is_finite() {
        return Err(Error::NonFinite {
            what: "learning rate".into(),
        });
    }
    if visible_map.len() != dataset.width() {
        return Err(Error::Dimension(format!(
            "visible map covers {} nodes but patterns have {} bits",
            visible_map.len(),
            dataset.width()
        )));
    }
    check_visible_map(&net, visible_map)?;

    let mut net = net;
    let edge_pairs: Vec<(usize, usize)> = net.edges().iter().map(|e| (e.child, e.parent)).collect();
    let mut rng = Rng64::new(options.seed);
    let mut order: Vec<usize> = (0..dataset.n_patterns()).collect();
    let mut trace = Vec::with_capacity(options.sweeps);
    let mut non_converged = 0usize;
    let mut weight_steps = vec![0.0f64; edge_pairs.len()];
    let mut bias_steps = vec![0.0f64; net.n_nodes()];

    for _ in 0..options.sweeps {
        if options.shuffle {
            rng.shuffle(&mut order);
        }
        let mut sweep_total = 0.0;
        for &k in &order {
            let evidence = pattern_evidence(dataset.pattern(k), visible_map)?;
            let solution = solve(&net, &evidence, &options.solve)?;
            if !solution.converged {
                non_converged += 1;
            }
            sweep_total += solution.bound.total;
            for (e, &(child, parent)) in edge_pairs.iter().enumerate() {
                weight_steps[e] = options.rate * grad_weight(&net, &solution.state, child, parent)?;
            }
            for (i, step) in bias_steps.iter_mut().enumerate() {
                *step = options.rate * grad_bias(&net, &solution.state, i);
            }
            for (e, &step) in weight_steps.iter().enumerate() {
                net.nudge_weight(e, step);
            }
            for (i, &step) in bias_steps.iter().enumerate() {
                net.nudge_bias(i, step);
            }
        }
        trace.push(sweep_total / dataset.n_patterns().max(1) as f64);
    }
    Ok(TrainResult {
        net,
        trace,
        non_converged,
    })
}

/// Assigns `pattern` to the model whose solved bound is highest; ties break
/// toward the lowest class index. At least two models are required, and all
/// must share the caller's visible map.
pub fn classify(
    models: &[SigmoidBeliefNetwork],
    pattern: &[u8],
    visible_map: &[usize],
    solve_options: &SolveOptions,
) -> Result<usize> {
    if models.len() < 2 {
        return Err(Error::Dimension(
            "classification needs at least two models".into(),
        ));
    }
    if pattern.len() != visible_map.len() {
        return Err(Error::Dimension(format!(
            "pattern has {} bits but the visible map covers {} nodes",
            pattern.len(),
            visible_map.len()
        )));
    }
    let evidence = pattern_evidence(pattern, visible_map)?;
    let mut best = 0usize;
    let mut best_bound = f64::NEG_INFINITY;
    for (class, model) in models.iter().enumerate() {
        check_visible_map(model, visible_map)?;
        let solution = solve(model, &evidence, solve_options)?;
        if solution.bound.total > best_bound {
            best_bound = solution.bound.total;
            best = class;
        }
    }
    Ok(best)
}

/// Normalizes an accumulated bound so that a network with zero weights and
/// biases scores exactly -1: `total / (n_patterns * n_visible * ln 2)`.
pub fn normalized_score(total_bound: f64, n_patterns: usize, n_visible: usize) -> Result<f64> {
    if n_patterns == 0 {
        return Err(Error::ZeroCount("n_patterns"));
    }
    if n_visible == 0 {
        return Err(Error::ZeroCount("n_visible"));
    }
    Ok(total_bound / (n_patterns as f64 * n_visible as f64 * std::f64::consts::LN_2))
}
