//! Halton low-discrepancy points on `[0,1)^N`.

use crate::error::{Error, Result};
use crate::geometry::PointSet;

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 6;

const PRIMES: [u64; MAX_DIM] = [2, 3, 5, 7, 11, 13];

/// Van der Corput radical inverse of `index` in `base`.
///
/// Digits are reversed in integer arithmetic and divided once at the end, so
/// the result is the correctly rounded value of the exact fraction whenever
/// numerator and denominator fit in 53 bits.
pub fn radical_inverse(index: u64, base: u64) -> f64 {
    assert!(base >= 2, "radical inverse base must be at least 2");
    let base = base as u128;
    let mut rest = index as u128;
    let mut numerator: u128 = 0;
    let mut denominator: u128 = 1;
    while rest > 0 {
        numerator = numerator * base + rest % base;
        denominator *= base;
        rest /= base;
    }
    numerator as f64 / denominator as f64
}

/// Dimension and first index of a Halton sequence. Coordinate `j` uses the
/// `j`-th prime as its base.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HaltonConfig {
    dim: usize,
    start_index: u64,
}

impl HaltonConfig {
    /// Sequence starting at index 1, skipping the all-zero point.
    pub fn new(dim: usize) -> Result<Self> {
        Self::with_start(dim, 1)
    }

    pub fn with_start(dim: usize, start_index: u64) -> Result<Self> {
        if !(MIN_DIM..=MAX_DIM).contains(&dim) {
            return Err(Error::UnsupportedDimension {
                dim,
                reason: "Halton generation supports dimensions 2 through 6",
            });
        }
        if start_index == 0 {
            return Err(Error::Config("Halton start index must be at least 1".into()));
        }
        Ok(Self { dim, start_index })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn start_index(&self) -> u64 {
        self.start_index
    }

    pub fn bases(&self) -> &'static [u64] {
        &PRIMES[..self.dim]
    }

    /// Writes the `offset`-th point of the sequence (0-based) into `out`.
    pub fn point_into(&self, offset: u64, out: &mut [f64]) {
        let index = self.start_index + offset;
        for (slot, &base) in out.iter_mut().zip(self.bases()) {
            *slot = radical_inverse(index, base);
        }
    }

    pub fn points(&self, count: usize) -> PointSet {
        let mut coords = vec![0.0; count * self.dim];
        for (i, chunk) in coords.chunks_exact_mut(self.dim).enumerate() {
            self.point_into(i as u64, chunk);
        }
        PointSet::new(self.dim, coords).expect("radical inverses are finite")
    }

    /// Endless iterator over the points of the sequence.
    pub fn iter(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0u64..).map(move |i| {
            let mut p = vec![0.0; self.dim];
            self.point_into(i, &mut p);
            p
        })
    }
}

/// The first `count` Halton points of dimension `dim`, starting at index 1.
pub fn halton_points(count: usize, dim: usize) -> Result<PointSet> {
    Ok(HaltonConfig::new(dim)?.points(count))
}
