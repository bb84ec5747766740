//! Placement of interpolation nodes from gray-level statistics.
//!
//! The first and last node sit on the darkest and brightest level present in
//! the image. Every interior node `v_i` is then driven to the mean level of the
//! pixels whose level falls in the closed interval `[v_{i-1}, v_{i+1}]`, by
//! repeating
//!
//! ```text
//! v_i <- mean{ l(p) : l(p) in [v_{i-1}, v_{i+1}] }      for all interior i at once
//! ```
//!
//! until no node moves by `epsilon` or more. Neighbouring intervals overlap, so
//! a pixel may contribute to two bins. All bin sums come from the level
//! histogram, which is exact for integer levels.

use serde::Serialize;
use thiserror::Error;

use crate::image::{GrayImage, Histogram};
use crate::polycurve::NodeSet;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("image is constant at level {0}; there is no range to spread")]
    ConstantImage(u16),
    #[error("image has {distinct} distinct levels, too few to place {n} nodes")]
    TooFewDistinctLevels { distinct: usize, n: usize },
    #[error("node range is degenerate: min {0} equals max")]
    DegenerateRange(f64),
    #[error("bin index {index} is not interior for {n} nodes")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("nodes lost strict ordering at iteration {iteration}: {nodes:?}; reduce n")]
    NodeOrderViolation { iteration: usize, nodes: Vec<f64> },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
}

/// Iteration parameters for [`solve_nodes`].
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSolverConfig {
    /// Total node count, endpoints included.
    pub n: usize,
    /// Stop once the largest node move is below this many gray levels.
    pub epsilon: f64,
    pub max_iterations: usize,
    /// Starting positions for the `n - 2` interior nodes. Equidistant when `None`.
    pub initial_interior_nodes: Option<Vec<f64>>,
}

impl Default for NodeSolverConfig {
    fn default() -> Self {
        Self {
            n: 4,
            epsilon: 0.5,
            max_iterations: 100,
            initial_interior_nodes: None,
        }
    }
}

impl NodeSolverConfig {
    pub fn with_n(n: usize) -> Self {
        Self {
            n,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), SolverError> {
        if self.n < 2 {
            return Err(SolverError::InvalidConfig(format!(
                "n must be at least 2, got {}",
                self.n
            )));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(SolverError::InvalidConfig(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.max_iterations == 0 {
            return Err(SolverError::InvalidConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolverWarning {
    /// No pixel fell in the bin of node `index` (0-based); the node kept its position.
    EmptyBin { iteration: usize, index: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeSolverResult {
    pub nodes: NodeSet,
    /// Number of update steps performed.
    pub iterations: usize,
    pub converged: bool,
    /// Node vectors from the initial guess (`trace[0]`) through the final iterate.
    pub trace: Vec<Vec<f64>>,
    pub warnings: Vec<SolverWarning>,
}

/// Pixel count and level sum over the closed interval around one interior node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinStats {
    /// 0-based node index, `1..=n-2`.
    pub index: usize,
    pub lower: f64,
    pub upper: f64,
    pub pixel_count: u64,
    pub level_sum: u64,
}

impl BinStats {
    pub fn mean(&self) -> Option<f64> {
        (self.pixel_count > 0).then(|| self.level_sum as f64 / self.pixel_count as f64)
    }
}

/// One Jacobi step: the new node vector and the interior indices whose bin was empty.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeUpdate {
    pub nodes: NodeSet,
    pub empty_bins: Vec<usize>,
}

pub fn min_max_levels(image: &GrayImage) -> (f64, f64) {
    let (lo, hi) = image
        .levels()
        .iter()
        .fold((u16::MAX, u16::MIN), |(lo, hi), &l| (lo.min(l), hi.max(l)));
    (f64::from(lo), f64::from(hi))
}

/// `n` equidistant nodes from `v_min` to `v_max`, both included.
pub fn init_nodes(v_min: f64, v_max: f64, n: usize) -> Result<NodeSet, SolverError> {
    if n < 2 {
        return Err(SolverError::InvalidConfig(format!(
            "n must be at least 2, got {n}"
        )));
    }
    if v_min == v_max {
        return Err(SolverError::DegenerateRange(v_min));
    }
    let step = (v_max - v_min) / (n - 1) as f64;
    let mut nodes: Vec<f64> = (0..n).map(|i| v_min + i as f64 * step).collect();
    nodes[n - 1] = v_max;
    NodeSet::new(nodes).map_err(|e| SolverError::InvalidConfig(e.to_string()))
}

/// Statistics of the bin around interior node `index` (0-based), computed by
/// scanning the image's histogram.
pub fn bin_stats(
    image: &GrayImage,
    nodes: &NodeSet,
    index: usize,
) -> Result<BinStats, SolverError> {
    bin_stats_from_histogram(&image.histogram(), nodes, index)
}

pub fn bin_stats_from_histogram(
    histogram: &Histogram,
    nodes: &NodeSet,
    index: usize,
) -> Result<BinStats, SolverError> {
    let v = nodes.as_slice();
    if index == 0 || index + 1 >= v.len() {
        return Err(SolverError::IndexOutOfRange { index, n: v.len() });
    }
    let (lower, upper) = (v[index - 1], v[index + 1]);
    let (pixel_count, level_sum) = closed_interval_sums(histogram.counts(), lower, upper);
    Ok(BinStats {
        index,
        lower,
        upper,
        pixel_count,
        level_sum,
    })
}

/// Count and level sum of all levels `u` with `lower <= u <= upper`, summed in
/// ascending level order.
fn closed_interval_sums(counts: &[u64], lower: f64, upper: f64) -> (u64, u64) {
    let max = (counts.len() - 1) as f64;
    let lo = lower.ceil().max(0.0);
    let hi = upper.floor().min(max);
    if lo > hi {
        return (0, 0);
    }
    let (lo, hi) = (lo as usize, hi as usize);
    counts[lo..=hi]
        .iter()
        .zip(lo as u64..)
        .fold((0, 0), |(n, s), (&c, level)| (n + c, s + c * level))
}

/// Replaces every interior node with the mean level of its bin, all bins taken
/// from the current `nodes`. Nodes with an empty bin stay where they are.
pub fn iterate_nodes(image: &GrayImage, nodes: &NodeSet) -> Result<NodeUpdate, SolverError> {
    step(&image.histogram(), nodes, 1)
}

fn step(
    histogram: &Histogram,
    nodes: &NodeSet,
    iteration: usize,
) -> Result<NodeUpdate, SolverError> {
    let v = nodes.as_slice();
    let n = v.len();
    let mut next = v.to_vec();
    let mut empty_bins = Vec::new();
    for (i, slot) in next.iter_mut().enumerate().take(n - 1).skip(1) {
        let stats = bin_stats_from_histogram(histogram, nodes, i)?;
        match stats.mean() {
            Some(mean) => {
                debug_assert!(stats.lower <= mean && mean <= stats.upper);
                *slot = mean;
            }
            None => empty_bins.push(i),
        }
    }
    let nodes = NodeSet::new(next.clone()).map_err(|_| SolverError::NodeOrderViolation {
        iteration,
        nodes: next,
    })?;
    Ok(NodeUpdate { nodes, empty_bins })
}

pub fn solve_nodes(
    image: &GrayImage,
    config: &NodeSolverConfig,
) -> Result<NodeSolverResult, SolverError> {
    solve_nodes_from_histogram(&image.histogram(), config)
}

pub fn solve_nodes_from_histogram(
    histogram: &Histogram,
    config: &NodeSolverConfig,
) -> Result<NodeSolverResult, SolverError> {
    config.validate()?;
    let (lo, hi) = histogram
        .occupied_range()
        .ok_or_else(|| SolverError::InvalidConfig("empty histogram".into()))?;
    if lo == hi {
        return Err(SolverError::ConstantImage(lo));
    }
    // k distinct levels leave k - 1 gaps, enough room for at most k + 1 nodes
    let distinct = histogram.distinct_levels();
    if distinct + 1 < config.n {
        return Err(SolverError::TooFewDistinctLevels {
            distinct,
            n: config.n,
        });
    }
    let (v_min, v_max) = (f64::from(lo), f64::from(hi));
    let mut nodes = match &config.initial_interior_nodes {
        None => init_nodes(v_min, v_max, config.n)?,
        Some(interior) => initial_from_interior(v_min, v_max, config.n, interior)?,
    };

    let mut trace = vec![nodes.as_slice().to_vec()];
    let mut warnings = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < config.max_iterations {
        iterations += 1;
        let update = step(histogram, &nodes, iterations)?;
        warnings.extend(
            update
                .empty_bins
                .iter()
                .map(|&index| SolverWarning::EmptyBin {
                    iteration: iterations,
                    index,
                }),
        );
        let change = max_change(nodes.as_slice(), update.nodes.as_slice());
        nodes = update.nodes;
        trace.push(nodes.as_slice().to_vec());
        if change < config.epsilon {
            converged = true;
            break;
        }
    }

    Ok(NodeSolverResult {
        nodes,
        iterations,
        converged,
        trace,
        warnings,
    })
}

fn initial_from_interior(
    v_min: f64,
    v_max: f64,
    n: usize,
    interior: &[f64],
) -> Result<NodeSet, SolverError> {
    if interior.len() != n - 2 {
        return Err(SolverError::InvalidConfig(format!(
            "expected {} initial interior nodes, got {}",
            n - 2,
            interior.len()
        )));
    }
    if interior.iter().any(|&v| !(v > v_min && v < v_max)) {
        return Err(SolverError::InvalidConfig(format!(
            "initial interior nodes must lie strictly inside ({v_min}, {v_max})"
        )));
    }
    let mut all = Vec::with_capacity(n);
    all.push(v_min);
    all.extend_from_slice(interior);
    all.push(v_max);
    NodeSet::new(all).map_err(|e| SolverError::InvalidConfig(e.to_string()))
}

fn max_change(old: &[f64], new: &[f64]) -> f64 {
    old.iter()
        .zip(new)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}
