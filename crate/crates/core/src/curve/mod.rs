//! Vanilla Hilbert curves: L-system guides, transform construction, mapping
//! tables and their exports.
//!
//! Lattice convention: coordinate axis 0 is `i` ("up"), axis 1 is `j`
//! ("right") and axis 2 is `k`. Walks start at the origin heading right.

mod export;
pub(crate) mod lsystem;
mod mapping;
mod svg;
pub(crate) mod transform;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use export::{read_hdmt, read_json, write_hdmt, write_json, MappingFile};
pub use lsystem::{expand_guides, Heading, Token, WalkGuide};
pub use mapping::{build_mapping, Layout, MappingTable};
pub use svg::render_svg;
pub use transform::{cell_at_index, transform_index};

/// Largest supported order; coordinates must fit the `u16` fields of the binary export.
pub const MAX_ORDER: u32 = 16;

/// Dimension and recursion order of a Hilbert curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CurveSpec {
    n: usize,
    p: u32,
}

impl CurveSpec {
    pub fn new(n: usize, p: u32) -> Result<Self> {
        if n != 2 && n != 3 {
            return Err(Error::InvalidDimension(n));
        }
        if p == 0 || p > MAX_ORDER || n as u32 * p > 30 {
            return Err(Error::InvalidOrder(p));
        }
        Ok(Self { n, p })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Side length of the enclosing hypercube, `2^p`.
    pub fn side(&self) -> usize {
        1 << self.p
    }

    /// Number of cells visited by the full curve, `2^(n·p)`.
    pub fn length(&self) -> usize {
        1usize << (self.n as u32 * self.p)
    }

    pub fn full_region(&self) -> Region {
        Region {
            extents: vec![self.side(); self.n],
        }
    }
}

/// Per-axis lattice extents of a feature region anchored at the origin.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Region {
    extents: Vec<usize>,
}

impl Region {
    pub fn new(extents: &[usize]) -> Result<Self> {
        if extents.len() != 2 && extents.len() != 3 {
            return Err(Error::InvalidRegion(format!(
                "expected 2 or 3 extents, got {}",
                extents.len()
            )));
        }
        if extents.iter().any(|&e| e == 0) {
            return Err(Error::InvalidRegion(format!(
                "zero extent in {extents:?}"
            )));
        }
        Ok(Self {
            extents: extents.to_vec(),
        })
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn ndim(&self) -> usize {
        self.extents.len()
    }

    pub fn cell_count(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn contains(&self, cell: &LatticePoint) -> bool {
        cell.ndim() == self.ndim()
            && cell
                .coords()
                .iter()
                .zip(&self.extents)
                .all(|(&c, &e)| (c as usize) < e)
    }

    /// Row-major offset of a cell inside the region.
    pub fn offset(&self, cell: &LatticePoint) -> Option<usize> {
        if !self.contains(cell) {
            return None;
        }
        Some(
            cell.coords()
                .iter()
                .zip(&self.extents)
                .fold(0, |acc, (&c, &e)| acc * e + c as usize),
        )
    }

    pub fn cell_at_offset(&self, mut offset: usize) -> LatticePoint {
        let mut c = [0u32; 3];
        for axis in (0..self.ndim()).rev() {
            c[axis] = (offset % self.extents[axis]) as u32;
            offset /= self.extents[axis];
        }
        LatticePoint::from_array(self.ndim(), c)
    }

    pub(crate) fn check_fits(&self, spec: &CurveSpec) -> Result<()> {
        if self.ndim() != spec.n() {
            return Err(Error::UnsupportedDimension {
                required: spec.n(),
                found: self.ndim(),
            });
        }
        if self.extents.iter().any(|&e| e > spec.side()) {
            return Err(Error::InvalidRegion(format!(
                "extents {:?} exceed curve side {}",
                self.extents,
                spec.side()
            )));
        }
        Ok(())
    }
}

/// Lattice cell `(i, j)` or `(i, j, k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint {
    n: u8,
    c: [u32; 3],
}

impl LatticePoint {
    pub fn new(coords: &[u32]) -> Result<Self> {
        if coords.len() != 2 && coords.len() != 3 {
            return Err(Error::InvalidDimension(coords.len()));
        }
        let mut c = [0; 3];
        c[..coords.len()].copy_from_slice(coords);
        Ok(Self {
            n: coords.len() as u8,
            c,
        })
    }

    pub fn from_array(n: usize, c: [u32; 3]) -> Self {
        debug_assert!(n == 2 || n == 3);
        let mut c = c;
        if n == 2 {
            c[2] = 0;
        }
        Self { n: n as u8, c }
    }

    pub fn ndim(&self) -> usize {
        self.n as usize
    }

    pub fn coords(&self) -> &[u32] {
        &self.c[..self.n as usize]
    }

    pub fn l1_distance(&self, other: &Self) -> u64 {
        self.coords()
            .iter()
            .zip(other.coords())
            .map(|(&a, &b)| (a as i64 - b as i64).unsigned_abs())
            .sum()
    }

    pub fn squared_distance(&self, other: &Self) -> u64 {
        self.coords()
            .iter()
            .zip(other.coords())
            .map(|(&a, &b)| {
                let d = a as i64 - b as i64;
                (d * d) as u64
            })
            .sum()
    }
}

/// Smallest order whose hypercube holds the region: `⌈log2(max extent)⌉`, at least 1.
pub fn select_order(region: &Region, n: usize) -> Result<u32> {
    if n != 2 && n != 3 {
        return Err(Error::InvalidDimension(n));
    }
    if region.ndim() != n {
        return Err(Error::UnsupportedDimension {
            required: n,
            found: region.ndim(),
        });
    }
    let max = region.extents().iter().copied().max().unwrap_or(1);
    let mut p = 0u32;
    while (1usize << p) < max {
        p += 1;
    }
    Ok(p.max(1))
}
