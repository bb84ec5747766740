//! Gray-level image enhancement with polygonal point transforms.
//!
//! The transform is a piecewise-linear function `f(v) = sum_i a_i * |v - v_i|`.
//! Its nodes `v_i` come from the image itself: the first and last sit on the
//! darkest and brightest level present, and the interior ones are iterated to
//! the mean level of the pixels between their neighbours. The node values are
//! spread evenly over the output range, which pushes the output histogram
//! toward a uniform one.
//!
//! ```
//! use polygray::{enhance, EnhanceConfig, GrayImage};
//!
//! let dark = GrayImage::from_fn(64, 64, 255, |x, y| ((x + y) / 4 + 10) as u16).unwrap();
//! let (bright, report) = enhance(&dark, &EnhanceConfig::with_n(3)).unwrap();
//! assert_eq!(report.function.nodes().first(), 10.0);
//! assert_eq!(bright.levels().iter().max(), Some(&255));
//! ```

pub mod cli;
pub mod image;
pub mod imageio;
pub mod nodesolver;
pub mod pipeline;
pub mod polycurve;

use thiserror::Error;

pub use crate::image::{GrayImage, Histogram, ImageError};
pub use crate::imageio::{read_pgm, write_pgm, PgmFormat, PnmError};
pub use crate::nodesolver::{
    solve_nodes, NodeSolverConfig, NodeSolverResult, SolverError, SolverWarning,
};
pub use crate::pipeline::{
    build_lut, build_transform, enhance, EnhanceConfig, EnhanceReport, LookupTable,
};
pub use crate::polycurve::{
    solve_coefficients, CurveError, NodeSet, PolygonalFunction, TargetValues,
};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Pnm(#[from] PnmError),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
