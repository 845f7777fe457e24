//! Partition of unity assembly and evaluation.
//!
//! The domain is covered by balls of a common radius centered on a regular
//! grid (reduced to the points inside the domain). Each ball gets its own
//! RBF interpolant over the data it captures, and the global value at `x` is
//! the Shepard-weighted blend
//!
//! ```text
//! I(x) = Σ_j W_j(x) R_j(x),   W_j(x) = w_j(x) / Σ_k w_k(x),
//! ```
//!
//! where `w_j` is the Wendland C² profile scaled to the ball radius, so its
//! support is exactly the ball. Weights sum to one wherever at least one ball
//! is active, which is what makes the blend a partition of unity.

use log::debug;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{distance, filter_points, grid_points, ConvexDomain, GridLayout, PointSet};
use crate::kdtree::KdTree;
use crate::rbf::{wendland_profile, Kernel, LocalInterpolant};

/// Largest per-axis count tried before a domain is declared too thin.
fn max_per_axis(dim: usize) -> usize {
    (1e8f64.powf(1.0 / dim as f64) + 1e-9).floor() as usize
}

/// Knobs for [`make_covering`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoveringOptions {
    pub layout: GridLayout,
    /// Multiplies the nominal radius `√2 / m`.
    pub radius_scale: f64,
}

impl Default for CoveringOptions {
    fn default() -> Self {
        Self {
            layout: GridLayout::Inclusive,
            radius_scale: 1.0,
        }
    }
}

/// Subdomain centers with their common radius.
#[derive(Clone, Debug)]
pub struct Covering {
    centers: PointSet,
    radius: f64,
    grid_total: usize,
}

impl Covering {
    /// A covering from explicit centers. `grid_total` is the size of the grid
    /// the centers were drawn from (the `D` of the radius rule).
    pub fn new(centers: PointSet, radius: f64, grid_total: usize) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::Empty("covering needs at least one center"));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Config(format!("subdomain radius must be positive, got {radius}")));
        }
        Ok(Self {
            centers,
            radius,
            grid_total,
        })
    }

    pub fn centers(&self) -> &PointSet {
        &self.centers
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn grid_total(&self) -> usize {
        self.grid_total
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.centers.dim()
    }
}

/// Number of subdomains aimed for: about `2^(dim+1)` data points each.
pub fn target_subdomains(n: usize, dim: usize) -> f64 {
    n as f64 / 2f64.powi(dim as i32 + 1)
}

/// Builds the covering for `n` data points in `domain`.
///
/// `volume_fraction` is the share of the unit box occupied by the domain
/// (the in-domain fraction of the generated candidates is a free estimate).
/// The per-axis grid count is `m = round(((n / 2^(N+1)) / ρ)^(1/N))`, raised
/// until at least one grid point lands inside; the radius is `√2 / m`.
pub fn make_covering(
    domain: &ConvexDomain,
    n: usize,
    volume_fraction: f64,
    options: CoveringOptions,
) -> Result<Covering> {
    if n == 0 {
        return Err(Error::Empty("covering needs at least one data point"));
    }
    if !(volume_fraction > 0.0 && volume_fraction <= 1.0) {
        return Err(Error::Config(format!(
            "volume fraction must lie in (0, 1], got {volume_fraction}"
        )));
    }
    if !(options.radius_scale > 0.0 && options.radius_scale.is_finite()) {
        return Err(Error::Config(format!(
            "radius scale must be positive, got {}",
            options.radius_scale
        )));
    }
    let dim = domain.dim();
    let wanted = target_subdomains(n, dim) / volume_fraction;
    let mut per_axis = (wanted.powf(1.0 / dim as f64).round() as usize).max(1);
    let limit = max_per_axis(dim);
    loop {
        if per_axis > limit {
            return Err(Error::ThinDomain { max_per_axis: limit });
        }
        let grid = grid_points(dim, per_axis, options.layout)?;
        let grid_total = grid.len();
        let (centers, _) = filter_points(domain, &grid)?;
        if !centers.is_empty() {
            let radius = options.radius_scale * std::f64::consts::SQRT_2 / per_axis as f64;
            debug!(
                "covering: m = {per_axis}, D = {grid_total}, d = {}, radius = {radius}",
                centers.len()
            );
            return Covering::new(centers, radius, grid_total);
        }
        per_axis += 1;
    }
}

/// Normalized Shepard weights for `x` over the given `(center, radius)`
/// subdomains.
pub fn shepard_weights(x: &[f64], active: &[(&[f64], f64)]) -> Result<Vec<f64>> {
    if active.is_empty() {
        return Err(Error::Empty("no active subdomain"));
    }
    let raw: Vec<f64> = active
        .iter()
        .map(|(c, r)| wendland_profile(distance(x, c) / r))
        .collect();
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Empty("point lies outside the support of every active subdomain"));
    }
    Ok(raw.into_iter().map(|w| w / total).collect())
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AssembleOptions {
    /// Diagonal shift for every local system. Zero keeps exact interpolation.
    pub jitter: f64,
}

/// A solved subdomain: the interpolant and the data indices it was fitted to.
#[derive(Clone, Debug)]
pub struct LocalFit {
    pub interpolant: LocalInterpolant,
    pub data_indices: Vec<usize>,
}

/// The assembled partition of unity interpolant.
#[derive(Clone, Debug)]
pub struct PuModel {
    covering: Covering,
    locals: Vec<Option<LocalFit>>,
    data_index: KdTree,
    center_index: KdTree,
    values: Vec<f64>,
    kernel: Kernel,
    empty_count: usize,
}

/// Output of [`evaluate`]: one value per point, plus the points no active
/// subdomain reached (those took the nearest data value).
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub values: Vec<f64>,
    pub uncovered: Vec<usize>,
}

/// kd-trees over the data points and the subdomain centers.
#[derive(Clone, Debug)]
pub struct SpatialIndexes {
    data: KdTree,
    centers: KdTree,
}

impl SpatialIndexes {
    pub fn build(data: &PointSet, covering: &Covering) -> Result<Self> {
        Ok(Self {
            data: KdTree::build(data.clone())?,
            centers: KdTree::build(covering.centers().clone())?,
        })
    }
}

/// Solves every local problem of `covering` over `data`.
///
/// Subdomains that capture no data are kept as empty slots and counted in
/// [`PuModel::empty_count`]. A failed local solve aborts assembly with the
/// subdomain index attached.
pub fn assemble(
    domain: &ConvexDomain,
    data: &PointSet,
    values: &[f64],
    covering: Covering,
    kernel: Kernel,
    options: AssembleOptions,
) -> Result<PuModel> {
    if data.dim() != domain.dim() || covering.dim() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            found: if data.dim() != domain.dim() { data.dim() } else { covering.dim() },
        });
    }
    let indexes = SpatialIndexes::build(data, &covering)?;
    assemble_indexed(domain, indexes, values, covering, kernel, options)
}

/// [`assemble`] with prebuilt kd-trees.
pub fn assemble_indexed(
    domain: &ConvexDomain,
    indexes: SpatialIndexes,
    values: &[f64],
    covering: Covering,
    kernel: Kernel,
    options: AssembleOptions,
) -> Result<PuModel> {
    let SpatialIndexes {
        data: data_index,
        centers: center_index,
    } = indexes;
    let data = data_index.points();
    if data.dim() != domain.dim() || covering.dim() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            found: if data.dim() != domain.dim() { data.dim() } else { covering.dim() },
        });
    }
    if center_index.points() != covering.centers() {
        return Err(Error::Config("center index does not match the covering".into()));
    }
    if data.len() != values.len() {
        return Err(Error::LengthMismatch {
            left: data.len(),
            right: values.len(),
        });
    }
    if let Some(i) = data.iter().position(|p| !domain.contains_unchecked(p)) {
        return Err(Error::Config(format!("data point {i} lies outside domain `{}`", domain.label())));
    }

    let solved: Vec<Result<Option<LocalFit>>> = (0..covering.len())
        .into_par_iter()
        .map(|j| {
            let local = data_index.range_query(covering.centers().get(j), covering.radius())?;
            if local.is_empty() {
                return Ok(None);
            }
            let local_values: Vec<f64> = local.iter().map(|&i| values[i]).collect();
            let interpolant =
                LocalInterpolant::fit_with_jitter(data.select(&local), &local_values, kernel, options.jitter)
                    .map_err(|e| match e {
                        Error::DuplicatePoints(a, b) => Error::DuplicatePoints(local[a], local[b]),
                        other => other,
                    })?;
            Ok(Some(LocalFit {
                interpolant,
                data_indices: local,
            }))
        })
        .collect();

    let mut locals = Vec::with_capacity(solved.len());
    for (j, fit) in solved.into_iter().enumerate() {
        locals.push(fit.map_err(|e| e.in_subdomain(j))?);
    }
    let empty_count = locals.iter().filter(|l| l.is_none()).count();
    if empty_count > 0 {
        debug!("{empty_count} of {} subdomains captured no data", locals.len());
    }

    Ok(PuModel {
        covering,
        locals,
        data_index,
        center_index,
        values: values.to_vec(),
        kernel,
        empty_count,
    })
}

impl PuModel {
    pub fn covering(&self) -> &Covering {
        &self.covering
    }

    pub fn locals(&self) -> &[Option<LocalFit>] {
        &self.locals
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn empty_count(&self) -> usize {
        self.empty_count
    }

    pub fn data(&self) -> &PointSet {
        self.data_index.points()
    }

    pub fn data_values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.covering.dim()
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Active subdomains at `x` with their normalized weights, in ascending
    /// subdomain order. Empty when `x` is outside every solved subdomain's
    /// support.
    pub fn weights_at(&self, x: &[f64]) -> Result<Vec<(usize, f64)>> {
        self.check_dim(x)?;
        let radius = self.covering.radius();
        let candidates = self.center_index.range_query(x, radius)?;
        let active: Vec<usize> = candidates
            .into_iter()
            .filter(|&j| self.locals[j].is_some())
            .filter(|&j| wendland_profile(distance(x, self.covering.centers().get(j)) / radius) > 0.0)
            .collect();
        if active.is_empty() {
            return Ok(Vec::new());
        }
        let balls: Vec<(&[f64], f64)> = active
            .iter()
            .map(|&j| (self.covering.centers().get(j), radius))
            .collect();
        let weights = shepard_weights(x, &balls)?;
        Ok(active.into_iter().zip(weights).collect())
    }

    /// The blended value at `x`, or `None` if no subdomain is active there.
    pub fn value_at(&self, x: &[f64]) -> Result<Option<f64>> {
        let weights = self.weights_at(x)?;
        if weights.is_empty() {
            return Ok(None);
        }
        Ok(Some(
            weights
                .iter()
                .map(|&(j, w)| {
                    let fit = self.locals[j].as_ref().expect("active subdomains are solved");
                    w * fit.interpolant.eval_unchecked(x)
                })
                .sum(),
        ))
    }

    /// Number of subdomain balls containing `x`, solved or not.
    pub fn overlap_at(&self, x: &[f64]) -> Result<usize> {
        self.check_dim(x)?;
        Ok(self.center_index.range_query(x, self.covering.radius())?.len())
    }
}

/// Evaluates the global interpolant at every point of `eval_pts`.
pub fn evaluate(model: &PuModel, eval_pts: &PointSet) -> Result<Evaluation> {
    if eval_pts.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: eval_pts.dim(),
        });
    }
    let results: Vec<Result<(f64, bool)>> = (0..eval_pts.len())
        .into_par_iter()
        .map(|i| {
            let x = eval_pts.get(i);
            match model.value_at(x)? {
                Some(v) => Ok((v, true)),
                None => {
                    let (nearest, _) = model.data_index.nearest(x)?;
                    Ok((model.values[nearest], false))
                }
            }
        })
        .collect();

    let mut values = Vec::with_capacity(results.len());
    let mut uncovered = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        let (v, covered) = r?;
        values.push(v);
        if !covered {
            uncovered.push(i);
        }
    }
    Ok(Evaluation { values, uncovered })
}

/// Largest number of subdomains overlapping at any of `eval_pts`.
pub fn max_overlap(model: &PuModel, eval_pts: &PointSet) -> Result<usize> {
    if eval_pts.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: eval_pts.dim(),
        });
    }
    (0..eval_pts.len())
        .into_par_iter()
        .map(|i| model.overlap_at(eval_pts.get(i)))
        .try_reduce(|| 0, |a, b| Ok(a.max(b)))
}

/// Largest distance from a probe to its nearest data point.
pub fn fill_distance(data: &PointSet, probes: &PointSet) -> Result<f64> {
    if probes.is_empty() {
        return Err(Error::Empty("fill distance needs probe points"));
    }
    if probes.dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            found: probes.dim(),
        });
    }
    let tree = KdTree::build(data.clone())?;
    (0..probes.len())
        .into_par_iter()
        .map(|i| tree.nearest(probes.get(i)).map(|(_, d)| d))
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}
