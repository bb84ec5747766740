//! End-to-end enhancement: solve nodes, pin equidistant targets, solve the
//! coefficients and push every pixel through a lookup table.

use std::time::Instant;

use serde::Serialize;

use crate::image::GrayImage;
use crate::nodesolver::{self, NodeSolverConfig, NodeSolverResult};
use crate::polycurve::{self, PolygonalFunction, TargetValues};
use crate::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct EnhanceConfig {
    pub n: usize,
    pub epsilon: f64,
    pub max_iterations: usize,
    /// Top of the output range. Defaults to the input image's max level.
    pub output_max: Option<u16>,
}

impl Default for EnhanceConfig {
    fn default() -> Self {
        let solver = NodeSolverConfig::default();
        Self {
            n: solver.n,
            epsilon: solver.epsilon,
            max_iterations: solver.max_iterations,
            output_max: None,
        }
    }
}

impl EnhanceConfig {
    pub fn with_n(n: usize) -> Self {
        Self {
            n,
            ..Self::default()
        }
    }

    fn solver_config(&self) -> NodeSolverConfig {
        NodeSolverConfig {
            n: self.n,
            epsilon: self.epsilon,
            max_iterations: self.max_iterations,
            initial_interior_nodes: None,
        }
    }
}

/// Output level for every possible input level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LookupTable {
    entries: Vec<u16>,
    output_max: u16,
}

impl LookupTable {
    pub fn entries(&self) -> &[u16] {
        &self.entries
    }

    pub fn output_max(&self) -> u16 {
        self.output_max
    }

    pub fn apply(&self, image: &GrayImage) -> GrayImage {
        image.map_levels(&self.entries, self.output_max)
    }

    /// 64-bit FNV-1a over the little-endian entries.
    pub fn checksum(&self) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        self.entries
            .iter()
            .flat_map(|e| e.to_le_bytes())
            .fold(OFFSET, |h, b| (h ^ u64::from(b)).wrapping_mul(PRIME))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct StageTimings {
    pub nodes_ms: f64,
    pub coefficients_ms: f64,
    pub lut_ms: f64,
    pub apply_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnhanceReport {
    pub node_result: NodeSolverResult,
    pub function: PolygonalFunction,
    pub lut_checksum: u64,
    /// Wall-clock timings; left out of serialized reports so they stay reproducible.
    #[serde(skip)]
    pub timing: StageTimings,
}

/// `f_i = (i - 1) / (n - 1) * output_max` for `i = 1..=n`.
pub fn equidistant_targets(n: usize, output_max: f64) -> TargetValues {
    let last = (n.max(2) - 1) as f64;
    let mut values: Vec<f64> = (0..n).map(|i| i as f64 / last * output_max).collect();
    if let Some(end) = values.last_mut() {
        *end = output_max;
    }
    TargetValues::new(values).expect("finite targets")
}

pub fn build_transform(
    image: &GrayImage,
    config: &EnhanceConfig,
) -> Result<(PolygonalFunction, NodeSolverResult), Error> {
    let node_result = nodesolver::solve_nodes(image, &config.solver_config())?;
    let output_max = f64::from(config.output_max.unwrap_or(image.max_level()));
    let function = polycurve::solve_coefficients(
        node_result.nodes.clone(),
        equidistant_targets(config.n, output_max),
        output_max,
    )?;
    Ok((function, node_result))
}

/// Tabulates `round(f(clamp(u, v_1, v_n)))`, clamped to the output range, for
/// every level `u` in `0..=max_level`. Rounding is half away from zero.
pub fn build_lut(poly: &PolygonalFunction, max_level: u16) -> LookupTable {
    let output_max = poly.range_max().round().clamp(0.0, f64::from(u16::MAX)) as u16;
    let top = f64::from(output_max);
    let entries = (0..=max_level)
        .map(|u| poly.evaluate_clamped(f64::from(u)).round().clamp(0.0, top) as u16)
        .collect();
    LookupTable {
        entries,
        output_max,
    }
}

pub fn enhance(
    image: &GrayImage,
    config: &EnhanceConfig,
) -> Result<(GrayImage, EnhanceReport), Error> {
    let mut timing = StageTimings::default();

    let start = Instant::now();
    let node_result = nodesolver::solve_nodes(image, &config.solver_config())?;
    timing.nodes_ms = elapsed_ms(start);

    let start = Instant::now();
    let output_max = f64::from(config.output_max.unwrap_or(image.max_level()));
    let function = polycurve::solve_coefficients(
        node_result.nodes.clone(),
        equidistant_targets(config.n, output_max),
        output_max,
    )?;
    timing.coefficients_ms = elapsed_ms(start);

    let start = Instant::now();
    let lut = build_lut(&function, image.max_level());
    timing.lut_ms = elapsed_ms(start);

    let start = Instant::now();
    let output = lut.apply(image);
    timing.apply_ms = elapsed_ms(start);

    let report = EnhanceReport {
        node_result,
        function,
        lut_checksum: lut.checksum(),
        timing,
    };
    Ok((output, report))
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}
