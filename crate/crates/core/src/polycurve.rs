//! Polygonal interpolation functions in the absolute-value basis.
//!
//! A polygonal function is written as `f(v) = sum_i a_i * |v - v_i|`. Given
//! strictly increasing nodes `v_i` and target values `f_i`, the coefficients
//! `a_i` that make `f(v_i) = f_i` have a closed form built from the segment
//! difference quotients and the end-to-end quotient `(f_n + f_1) / (v_n - v_1)`.
//!
//! Between the first and last node the function is the usual piecewise-linear
//! interpolant. Outside that span it keeps going with slope `+sum(a)` to the
//! right and `-sum(a)` to the left, which is why callers that map real images
//! clamp the input to `[v_1, v_n]` first.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("at least two nodes are required, got {0}")]
    TooFewNodes(usize),
    #[error("nodes must be strictly increasing: v[{index}] = {left} is not below v[{}] = {right}", index + 1)]
    NonIncreasingNodes { index: usize, left: f64, right: f64 },
    #[error("first and last node coincide at {0}")]
    DegenerateSpan(f64),
    #[error("node or target value is not finite")]
    NonFinite,
    #[error("{values} target values for {nodes} nodes")]
    LengthMismatch { nodes: usize, values: usize },
    #[error("target value f[{index}] = {value} lies outside [0, {range_max}]")]
    TargetOutOfRange {
        index: usize,
        value: f64,
        range_max: f64,
    },
    #[error("range maximum must be positive and finite, got {0}")]
    InvalidRangeMax(f64),
}

/// Relative gap below which two neighbouring nodes count as coincident.
pub const MIN_RELATIVE_GAP: f64 = 1e-9;

/// Strictly increasing interpolation abscissas, at least two of them.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct NodeSet(Vec<f64>);

impl NodeSet {
    pub fn new(nodes: Vec<f64>) -> Result<Self, CurveError> {
        if nodes.len() < 2 {
            return Err(CurveError::TooFewNodes(nodes.len()));
        }
        if nodes.iter().any(|v| !v.is_finite()) {
            return Err(CurveError::NonFinite);
        }
        let first = nodes[0];
        let last = nodes[nodes.len() - 1];
        if first == last {
            return Err(CurveError::DegenerateSpan(first));
        }
        let min_gap = MIN_RELATIVE_GAP * (last - first).abs();
        for (index, pair) in nodes.windows(2).enumerate() {
            if !(pair[1] - pair[0] >= min_gap && pair[1] > pair[0]) {
                return Err(CurveError::NonIncreasingNodes {
                    index,
                    left: pair[0],
                    right: pair[1],
                });
            }
        }
        Ok(Self(nodes))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn first(&self) -> f64 {
        self.0[0]
    }

    pub fn last(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Target ordinates paired with a [`NodeSet`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct TargetValues(Vec<f64>);

impl TargetValues {
    pub fn new(values: Vec<f64>) -> Result<Self, CurveError> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CurveError::NonFinite);
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A solved polygonal function: nodes, targets and the matching coefficients.
///
/// Immutable once built; the interpolation conditions hold up to rounding.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolygonalFunction {
    nodes: NodeSet,
    #[serde(rename = "targets")]
    values: TargetValues,
    #[serde(rename = "coefficients")]
    coeffs: Vec<f64>,
    range_max: f64,
}

/// Solves the interpolation conditions `f(v_i) = f_i` in closed form.
///
/// With `s_k = (f_{k+1} - f_k) / (v_{k+1} - v_k)` and `t = (f_n + f_1) / (v_n - v_1)`:
///
/// ```text
/// a_1 = (t + s_1) / 2
/// a_i = (s_i - s_{i-1}) / 2      for 1 < i < n
/// a_n = (t - s_{n-1}) / 2
/// ```
pub fn solve_coefficients(
    nodes: NodeSet,
    values: TargetValues,
    range_max: f64,
) -> Result<PolygonalFunction, CurveError> {
    if !(range_max.is_finite() && range_max > 0.0) {
        return Err(CurveError::InvalidRangeMax(range_max));
    }
    if nodes.len() != values.len() {
        return Err(CurveError::LengthMismatch {
            nodes: nodes.len(),
            values: values.len(),
        });
    }
    if let Some((index, &value)) = values
        .as_slice()
        .iter()
        .enumerate()
        .find(|(_, &f)| !(0.0..=range_max).contains(&f))
    {
        return Err(CurveError::TargetOutOfRange {
            index,
            value,
            range_max,
        });
    }

    let v = nodes.as_slice();
    let f = values.as_slice();
    let n = v.len();
    let total = (f[n - 1] + f[0]) / (v[n - 1] - v[0]);
    let quotients: Vec<f64> = v
        .windows(2)
        .zip(f.windows(2))
        .map(|(dv, df)| (df[1] - df[0]) / (dv[1] - dv[0]))
        .collect();

    let mut coeffs = Vec::with_capacity(n);
    coeffs.push(0.5 * (total + quotients[0]));
    coeffs.extend(quotients.windows(2).map(|q| 0.5 * (q[1] - q[0])));
    coeffs.push(0.5 * (total - quotients[n - 2]));

    Ok(PolygonalFunction {
        nodes,
        values,
        coeffs,
        range_max,
    })
}

impl PolygonalFunction {
    pub fn nodes(&self) -> &NodeSet {
        &self.nodes
    }

    pub fn values(&self) -> &TargetValues {
        &self.values
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn range_max(&self) -> f64 {
        self.range_max
    }

    /// `sum_i a_i * |v - v_i|`, with no clamping of `v` or of the result.
    pub fn evaluate(&self, v: f64) -> f64 {
        self.coeffs
            .iter()
            .zip(self.nodes.as_slice())
            .map(|(a, vi)| a * (v - vi).abs())
            .sum()
    }

    /// Evaluates at `v` clamped to `[v_1, v_n]`.
    pub fn evaluate_clamped(&self, v: f64) -> f64 {
        self.evaluate(v.clamp(self.nodes.first(), self.nodes.last()))
    }

    /// Slopes of the `n - 1` segments between consecutive nodes, read off the
    /// coefficients: segment `k` has slope `sum_{j<=k} a_j - sum_{j>k} a_j`.
    pub fn segment_slopes(&self) -> Vec<f64> {
        let mut left = 0.0;
        let mut right: f64 = self.coeffs.iter().sum();
        self.coeffs[..self.coeffs.len() - 1]
            .iter()
            .map(|a| {
                left += a;
                right -= a;
                left - right
            })
            .collect()
    }

    /// Slope for `v > v_n`; the slope for `v < v_1` is its negation.
    pub fn exterior_slope(&self) -> f64 {
        self.coeffs.iter().sum()
    }
}
