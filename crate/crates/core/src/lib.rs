//! Partition of unity interpolation of scattered data on convex domains.
//!
//! Local Wendland C² interpolants are solved on overlapping balls centered on
//! a regular grid reduced to the domain, and blended with Shepard weights.
//! kd-trees answer the range searches that assign data and evaluation points
//! to balls.
//!
//! ```no_run
//! use pu_convex::prelude::*;
//!
//! let domain = make_domain(Shape::Disk, 2)?;
//! let (data, fraction) = filter_points(&domain, &halton_points(1600, 2)?)?;
//! let values: Vec<f64> = data.iter().map(|p| franke2(p[0], p[1])).collect();
//! let covering = make_covering(&domain, data.len(), fraction, CoveringOptions::default())?;
//! let model = assemble(&domain, &data, &values, covering, Kernel::new(0.1)?, AssembleOptions::default())?;
//! let out = evaluate(&model, &data)?;
//! # Ok::<(), pu_convex::Error>(())
//! ```

pub mod error;
pub mod evaluation;
pub mod experiment;
pub mod geometry;
pub mod halton;
pub mod kdtree;
pub mod partition;
pub mod rbf;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::error::{Error, Result};
    pub use crate::evaluation::{franke, franke2, franke3, mae, rmse, ErrorReport};
    pub use crate::geometry::{
        filter_points, grid_points, make_domain, ConvexDomain, GridLayout, Halfspace, PointSet, Shape,
    };
    pub use crate::halton::{halton_points, radical_inverse, HaltonConfig};
    pub use crate::kdtree::KdTree;
    pub use crate::partition::{
        assemble, evaluate, fill_distance, make_covering, max_overlap, shepard_weights, AssembleOptions,
        Covering, CoveringOptions, Evaluation, PuModel,
    };
    pub use crate::rbf::{eval_local, kernel_matrix, solve_coefficients, wendland_c2, Kernel, LocalInterpolant};
}
