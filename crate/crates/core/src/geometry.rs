//! Point sets, convex domains in halfspace form, and regular grids on the unit
//! hypercube.
//!
//! Every domain lives inside `[0,1]^N`. A [`ConvexDomain`] stores only the
//! constraints that cut into the box; the box faces themselves are always
//! checked by [`ConvexDomain::contains`].

use std::fmt;
use std::io::BufRead;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::halton;

/// Slack allowed on every halfspace and box face when testing containment.
pub const CONTAINMENT_TOLERANCE: f64 = 1e-12;

/// Number of sides of the polygon standing in for the circle in `disk` and
/// `cylinder`.
pub const DISK_POLYGON_SIDES: usize = 128;

const MAX_GRID_POINTS: u128 = 100_000_000;

/// A set of points of a common dimension, stored as one flat coordinate
/// buffer.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::UnsupportedDimension {
                dim,
                reason: "points need at least one coordinate",
            });
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: coords.len() % dim,
            });
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index: pos / dim });
        }
        Ok(Self { dim, coords })
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            coords: Vec::new(),
        }
    }

    pub fn with_capacity(dim: usize, capacity: usize) -> Self {
        Self {
            dim,
            coords: Vec::with_capacity(dim * capacity),
        }
    }

    /// Builds a set from row slices. All rows must share a length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).ok_or(Error::Empty("point rows"))?;
        let mut set = Self::with_capacity(dim, rows.len());
        for row in rows {
            set.push(row.as_ref())?;
        }
        Ok(set)
    }

    pub fn push(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: p.len(),
            });
        }
        if p.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index: self.len() });
        }
        self.coords.extend_from_slice(p);
        Ok(())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.coords
    }

    /// Copies the points at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> PointSet {
        let mut out = PointSet::with_capacity(self.dim, indices.len());
        for &i in indices {
            out.coords.extend_from_slice(self.get(i));
        }
        out
    }

    pub fn centroid(&self) -> Option<Vec<f64>> {
        if self.is_empty() {
            return None;
        }
        let mut c = vec![0.0; self.dim];
        for p in self.iter() {
            for (acc, x) in c.iter_mut().zip(p) {
                *acc += x;
            }
        }
        let n = self.len() as f64;
        c.iter_mut().for_each(|v| *v /= n);
        Some(c)
    }
}

#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

/// `{ x : normal·x <= offset }` with a unit normal.
#[derive(Clone, Debug, PartialEq)]
pub struct Halfspace {
    normal: Vec<f64>,
    offset: f64,
}

impl Halfspace {
    /// Normalizes `normal` (and scales `offset` with it).
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self> {
        let norm = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite() && offset.is_finite()) {
            return Err(Error::Config(format!(
                "halfspace normal must be finite and nonzero, got {normal:?}"
            )));
        }
        Ok(Self {
            normal: normal.iter().map(|v| v / norm).collect(),
            offset: offset / norm,
        })
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// `offset - normal·p`: nonnegative inside, and equal to the distance to
    /// the bounding hyperplane.
    #[inline]
    pub fn slack(&self, p: &[f64]) -> f64 {
        self.offset - self.normal.iter().zip(p).map(|(n, x)| n * x).sum::<f64>()
    }
}

/// The builtin domain shapes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Shape {
    Triangle,
    Disk,
    Hexagon,
    Pyramid,
    Cylinder,
    HexPrism,
    Cube,
}

impl Shape {
    pub const ALL: [Shape; 7] = [
        Shape::Triangle,
        Shape::Disk,
        Shape::Hexagon,
        Shape::Pyramid,
        Shape::Cylinder,
        Shape::HexPrism,
        Shape::Cube,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Shape::Triangle => "triangle",
            Shape::Disk => "disk",
            Shape::Hexagon => "hexagon",
            Shape::Pyramid => "pyramid",
            Shape::Cylinder => "cylinder",
            Shape::HexPrism => "hexprism",
            Shape::Cube => "cube",
        }
    }

    /// Required dimension, or `None` for the cube which exists in any.
    pub fn native_dim(self) -> Option<usize> {
        match self {
            Shape::Triangle | Shape::Disk | Shape::Hexagon => Some(2),
            Shape::Pyramid | Shape::Cylinder | Shape::HexPrism => Some(3),
            Shape::Cube => None,
        }
    }

    /// Exact area/volume as a fraction of the unit box. The disk value is for
    /// the true circle, not its polygonal stand-in.
    pub fn volume_fraction(self) -> f64 {
        match self {
            Shape::Triangle => 0.5,
            Shape::Disk | Shape::Cylinder => std::f64::consts::FRAC_PI_4,
            Shape::Hexagon | Shape::HexPrism => 0.75,
            Shape::Pyramid => 1.0 / 3.0,
            Shape::Cube => 1.0,
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Shape::ALL
            .into_iter()
            .find(|shape| shape.label() == s)
            .ok_or_else(|| Error::UnknownShape(s.to_string()))
    }
}

/// A bounded convex region: the unit box intersected with a list of
/// halfspaces.
#[derive(Clone, Debug)]
pub struct ConvexDomain {
    dim: usize,
    halfspaces: Vec<Halfspace>,
    label: String,
    interior_point: Vec<f64>,
}

impl ConvexDomain {
    /// `[0,1]^dim` with no extra constraints.
    pub fn unit_box(dim: usize) -> Result<Self> {
        make_domain(Shape::Cube, dim)
    }

    /// Custom domain from explicit halfspaces (intersected with the unit box).
    /// Fails if a Halton probe of the box finds no interior point.
    pub fn from_halfspaces(dim: usize, halfspaces: Vec<Halfspace>, label: impl Into<String>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::UnsupportedDimension {
                dim,
                reason: "domains need at least one axis",
            });
        }
        for h in &halfspaces {
            if h.normal.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: h.normal.len(),
                });
            }
        }
        if dim > halton::MAX_DIM {
            return Err(Error::UnsupportedDimension {
                dim,
                reason: "custom domains are supported up to dimension 6",
            });
        }
        let mut domain = Self {
            dim,
            halfspaces,
            label: label.into(),
            interior_point: vec![0.5; dim],
        };
        let probe = halton::halton_points(4096, dim.max(halton::MIN_DIM))?;
        let mut inside = PointSet::with_capacity(dim, 64);
        for p in probe.iter() {
            let p = &p[..dim];
            if domain.contains_unchecked(p) {
                inside.push(p)?;
            }
        }
        domain.interior_point = inside
            .centroid()
            .ok_or_else(|| Error::Config(format!("domain `{}` is empty", domain.label)))?;
        Ok(domain)
    }

    /// Reads the plain-text halfspace format: a header line `N H` followed by
    /// `H` lines of `n_1 ... n_N offset`. Blank lines and `#` comments are
    /// skipped.
    pub fn from_reader<R: BufRead>(reader: R, label: impl Into<String>) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut halfspaces = Vec::new();
        let mut last_line = 0;
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            last_line = lineno;
            let line = line.map_err(|e| Error::Parse {
                line: lineno,
                message: e.to_string(),
            })?;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            match header {
                None => {
                    if fields.len() != 2 {
                        return Err(Error::Parse {
                            line: lineno,
                            message: format!("expected header `N H`, found {} fields", fields.len()),
                        });
                    }
                    let parse = |s: &str, what: &str| {
                        s.parse::<usize>().map_err(|_| Error::Parse {
                            line: lineno,
                            message: format!("invalid {what} `{s}`"),
                        })
                    };
                    let dim = parse(fields[0], "dimension")?;
                    let count = parse(fields[1], "halfspace count")?;
                    if dim == 0 {
                        return Err(Error::Parse {
                            line: lineno,
                            message: "dimension must be positive".into(),
                        });
                    }
                    header = Some((dim, count));
                }
                Some((dim, count)) => {
                    if halfspaces.len() == count {
                        return Err(Error::Parse {
                            line: lineno,
                            message: format!("more than the declared {count} halfspaces"),
                        });
                    }
                    if fields.len() != dim + 1 {
                        return Err(Error::Parse {
                            line: lineno,
                            message: format!("expected {} numbers, found {}", dim + 1, fields.len()),
                        });
                    }
                    let values = fields
                        .iter()
                        .map(|s| {
                            s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::Parse {
                                line: lineno,
                                message: format!("invalid number `{s}`"),
                            })
                        })
                        .collect::<Result<Vec<f64>>>()?;
                    let h = Halfspace::new(values[..dim].to_vec(), values[dim]).map_err(|e| Error::Parse {
                        line: lineno,
                        message: e.to_string(),
                    })?;
                    halfspaces.push(h);
                }
            }
        }
        let (dim, count) = header.ok_or(Error::Parse {
            line: last_line.max(1),
            message: "missing header".into(),
        })?;
        if halfspaces.len() != count {
            return Err(Error::Parse {
                line: last_line.max(1),
                message: format!("declared {count} halfspaces, found {}", halfspaces.len()),
            });
        }
        Self::from_halfspaces(dim, halfspaces, label)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(std::io::BufReader::new(file), format!("hull:{}", path.display()))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Constraints beyond the unit box.
    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    /// A point strictly inside the domain: the analytic centroid for builtin
    /// shapes, a sample mean for custom ones.
    pub fn interior_point(&self) -> &[f64] {
        &self.interior_point
    }

    pub fn contains(&self, p: &[f64]) -> Result<bool> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: p.len(),
            });
        }
        Ok(self.contains_unchecked(p))
    }

    #[inline]
    pub(crate) fn contains_unchecked(&self, p: &[f64]) -> bool {
        p.iter()
            .all(|&x| (-CONTAINMENT_TOLERANCE..=1.0 + CONTAINMENT_TOLERANCE).contains(&x))
            && self.halfspaces.iter().all(|h| h.slack(p) >= -CONTAINMENT_TOLERANCE)
    }

    /// Distance from `p` to the boundary, or its negation when `p` is
    /// outside. Exact for interior points because redundant constraints
    /// always have slack at least the true boundary distance.
    pub fn signed_boundary_distance(&self, p: &[f64]) -> f64 {
        let box_slack = p
            .iter()
            .map(|&x| x.min(1.0 - x))
            .fold(f64::INFINITY, f64::min);
        self.halfspaces
            .iter()
            .map(|h| h.slack(p))
            .fold(box_slack, f64::min)
    }
}

/// Builds one of the builtin shapes.
///
/// * `triangle`: hull of (0,0), (1,0), (0.5,1).
/// * `disk`: regular 128-gon inscribed in the circle of radius 0.5 about (0.5,0.5).
/// * `hexagon`: (0,0.5), (0.25,0), (0.75,0), (1,0.5), (0.75,1), (0.25,1).
/// * `pyramid`: base `[0,1]^2 x {0}`, apex (0.5,0.5,1).
/// * `cylinder`, `hexprism`: the disk and hexagon extruded over `z in [0,1]`.
/// * `cube`: the unit box in any dimension.
pub fn make_domain(shape: Shape, dim: usize) -> Result<ConvexDomain> {
    if let Some(native) = shape.native_dim() {
        if native != dim {
            return Err(Error::ShapeDimension {
                shape: shape.label().into(),
                dim,
            });
        }
    } else if dim == 0 {
        return Err(Error::ShapeDimension {
            shape: shape.label().into(),
            dim,
        });
    }

    let (halfspaces, interior_point) = match shape {
        Shape::Triangle => (
            polygon_halfspaces(&[[0.0, 0.0], [1.0, 0.0], [0.5, 1.0]], 2),
            vec![0.5, 1.0 / 3.0],
        ),
        Shape::Disk => (polygon_halfspaces(&disk_polygon(), 2), vec![0.5, 0.5]),
        Shape::Hexagon => (polygon_halfspaces(&HEXAGON, 2), vec![0.5, 0.5]),
        Shape::Pyramid => {
            let faces = [
                ([0.0, -2.0, 1.0], 0.0),
                ([-2.0, 0.0, 1.0], 0.0),
                ([2.0, 0.0, 1.0], 2.0),
                ([0.0, 2.0, 1.0], 2.0),
            ];
            let hs = faces
                .iter()
                .map(|(n, c)| Halfspace::new(n.to_vec(), *c).expect("nonzero normal"))
                .collect();
            (hs, vec![0.5, 0.5, 0.25])
        }
        Shape::Cylinder => (polygon_halfspaces(&disk_polygon(), 3), vec![0.5; 3]),
        Shape::HexPrism => (polygon_halfspaces(&HEXAGON, 3), vec![0.5; 3]),
        Shape::Cube => (Vec::new(), vec![0.5; dim]),
    };

    Ok(ConvexDomain {
        dim,
        halfspaces,
        label: shape.label().to_string(),
        interior_point,
    })
}

const HEXAGON: [[f64; 2]; 6] = [
    [0.0, 0.5],
    [0.25, 0.0],
    [0.75, 0.0],
    [1.0, 0.5],
    [0.75, 1.0],
    [0.25, 1.0],
];

fn disk_polygon() -> Vec<[f64; 2]> {
    (0..DISK_POLYGON_SIDES)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / DISK_POLYGON_SIDES as f64;
            [0.5 + 0.5 * t.cos(), 0.5 + 0.5 * t.sin()]
        })
        .collect()
}

/// Edge halfspaces of a counter-clockwise polygon in the first two
/// coordinates, padded with zero normal components up to `dim`.
fn polygon_halfspaces(vertices: &[[f64; 2]], dim: usize) -> Vec<Halfspace> {
    let k = vertices.len();
    (0..k)
        .map(|i| {
            let a = vertices[i];
            let b = vertices[(i + 1) % k];
            let mut normal = vec![0.0; dim];
            normal[0] = b[1] - a[1];
            normal[1] = a[0] - b[0];
            let offset = normal[0] * a[0] + normal[1] * a[1];
            Halfspace::new(normal, offset).expect("polygon edges have nonzero length")
        })
        .collect()
}

/// Keeps the points inside `domain`, in input order, and reports the kept
/// fraction (0 for empty input).
pub fn filter_points(domain: &ConvexDomain, pts: &PointSet) -> Result<(PointSet, f64)> {
    if pts.dim() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            found: pts.dim(),
        });
    }
    let mut kept = PointSet::with_capacity(pts.dim(), pts.len());
    for p in pts.iter() {
        if domain.contains_unchecked(p) {
            kept.coords.extend_from_slice(p);
        }
    }
    let fraction = if pts.is_empty() {
        0.0
    } else {
        kept.len() as f64 / pts.len() as f64
    };
    Ok((kept, fraction))
}

/// Placement of the per-axis grid coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GridLayout {
    /// `(2i - 1) / 2m` for `i = 1..m`; never touches the box boundary.
    CellCentered,
    /// `i / (m - 1)` for `i = 0..m-1`, endpoints included. A single point per
    /// axis sits at 0.5.
    #[default]
    Inclusive,
}

impl GridLayout {
    pub fn axis_values(self, m: usize) -> Vec<f64> {
        match self {
            GridLayout::CellCentered => (1..=m).map(|i| (2 * i - 1) as f64 / (2 * m) as f64).collect(),
            GridLayout::Inclusive if m == 1 => vec![0.5],
            GridLayout::Inclusive => (0..m).map(|i| i as f64 / (m - 1) as f64).collect(),
        }
    }
}

impl FromStr for GridLayout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cell" | "cell-centered" => Ok(GridLayout::CellCentered),
            "inclusive" => Ok(GridLayout::Inclusive),
            other => Err(Error::Config(format!(
                "unknown grid layout `{other}` (expected `cell` or `inclusive`)"
            ))),
        }
    }
}

/// The `m^dim` tensor grid in lexicographic order (first axis slowest).
pub fn grid_points(dim: usize, per_axis: usize, layout: GridLayout) -> Result<PointSet> {
    if per_axis == 0 {
        return Err(Error::Config("grid needs at least one point per axis".into()));
    }
    if dim == 0 {
        return Err(Error::UnsupportedDimension {
            dim,
            reason: "grids need at least one axis",
        });
    }
    let total = (per_axis as u128)
        .checked_pow(dim as u32)
        .filter(|&t| t <= MAX_GRID_POINTS)
        .ok_or(Error::GridTooLarge { dim, per_axis })? as usize;

    let axis = layout.axis_values(per_axis);
    let mut coords = Vec::with_capacity(total * dim);
    let mut digits = vec![0usize; dim];
    for _ in 0..total {
        coords.extend(digits.iter().map(|&d| axis[d]));
        for slot in digits.iter_mut().rev() {
            *slot += 1;
            if *slot < per_axis {
                break;
            }
            *slot = 0;
        }
    }
    Ok(PointSet { dim, coords })
}
