//! Variable-length Hilbert curves: dense over active cells, striding across
//! blocks that hold none.

mod expand;
mod summed;
mod walk;

use crate::curve::{CurveSpec, Layout, LatticePoint, MappingTable, Region};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

pub use expand::vh_expand;
pub use summed::{subtree_activity, SummedArea};

const NONE: u32 = u32::MAX;

/// Boolean activity lattice over a feature region, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActivationMask {
    region: Region,
    active: Vec<bool>,
}

impl ActivationMask {
    pub fn new(region: Region, active: Vec<bool>) -> Result<Self> {
        if active.len() != region.cell_count() {
            return Err(Error::LengthMismatch {
                expected: region.cell_count(),
                found: active.len(),
            });
        }
        Ok(Self { region, active })
    }

    pub fn filled(region: Region, value: bool) -> Self {
        let active = vec![value; region.cell_count()];
        Self { region, active }
    }

    /// Evaluates `f` on the coordinates of every cell in row-major order.
    pub fn from_fn(region: Region, mut f: impl FnMut(&[usize]) -> bool) -> Self {
        let ext = region.extents().to_vec();
        let mut idx = vec![0usize; ext.len()];
        let mut active = Vec::with_capacity(region.cell_count());
        for _ in 0..region.cell_count() {
            active.push(f(&idx));
            for a in (0..ext.len()).rev() {
                idx[a] += 1;
                if idx[a] < ext[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        Self { region, active }
    }

    /// Reads a 0/1 tensor; any other value is rejected.
    pub fn from_tensor<T: Scalar>(t: &Tensor<T>) -> Result<Self> {
        let region = Region::new(t.shape())?;
        let active = t
            .data()
            .iter()
            .map(|&v| {
                if v == T::zero() {
                    Ok(false)
                } else if v == T::one() {
                    Ok(true)
                } else {
                    Err(Error::Format {
                        format: "activation mask",
                        reason: format!("non-boolean value {v}"),
                    })
                }
            })
            .collect::<Result<_>>()?;
        Ok(Self { region, active })
    }

    pub fn to_tensor<T: Scalar>(&self) -> Tensor<T> {
        let data = self
            .active
            .iter()
            .map(|&a| if a { T::one() } else { T::zero() })
            .collect();
        Tensor::from_vec(self.region.extents(), data).expect("mask length matches region")
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.active
    }

    /// False for cells outside the region.
    pub fn is_active(&self, cell: &LatticePoint) -> bool {
        self.region.offset(cell).is_some_and(|o| self.active[o])
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    pub fn active_fraction(&self) -> f64 {
        self.active_count() as f64 / self.active.len() as f64
    }
}

/// On-curve cells in visit order plus a representative for every skipped cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VhMappingTable {
    base: MappingTable,
    /// Skipped cells with the index of their representative, in row-major order.
    representatives: Vec<(LatticePoint, u32)>,
    /// Region offset to its own index (on-curve) or its representative's.
    resolved: Vec<u32>,
}

impl VhMappingTable {
    pub(crate) fn from_parts(base: MappingTable, mut representatives: Vec<(LatticePoint, u32)>) -> Result<Self> {
        let region = base.region().clone();
        let mut resolved = vec![NONE; region.cell_count()];
        for (slot, r) in (0..base.code_length()).filter_map(|s| base.region_offset_at(s).map(|o| (s, o))) {
            resolved[r] = slot as u32;
        }
        let bad = |reason: String| Error::Format {
            format: "variable-length table",
            reason,
        };
        for &(cell, idx) in &representatives {
            let off = region
                .offset(&cell)
                .ok_or_else(|| bad(format!("cell {:?} outside region", cell.coords())))?;
            if resolved[off] != NONE {
                return Err(bad(format!("cell {:?} is both on-curve and skipped", cell.coords())));
            }
            if idx as usize >= base.code_length() {
                return Err(bad(format!("representative index {idx} out of range")));
            }
            resolved[off] = idx;
        }
        if let Some(off) = resolved.iter().position(|&r| r == NONE) {
            return Err(bad(format!(
                "cell {:?} neither on-curve nor represented",
                region.cell_at_offset(off).coords()
            )));
        }
        representatives.sort_by_key(|(c, _)| region.offset(c));
        Ok(Self {
            base,
            representatives,
            resolved,
        })
    }

    /// Compacted table of the on-curve cells, indexed in visit order.
    pub fn base(&self) -> &MappingTable {
        &self.base
    }

    pub fn representatives(&self) -> &[(LatticePoint, u32)] {
        &self.representatives
    }

    pub fn on_curve_count(&self) -> usize {
        self.base.code_length()
    }

    pub fn skipped_count(&self) -> usize {
        self.representatives.len()
    }

    /// Index of the cell itself if on-curve, otherwise of its representative.
    pub fn representative_of(&self, cell: &LatticePoint) -> Option<u32> {
        self.base.region().offset(cell).map(|o| self.resolved[o])
    }

    /// Per region offset (row-major): own index or representative index.
    pub fn resolved_indices(&self) -> &[u32] {
        &self.resolved
    }
}

/// Walks the variable-length curve, numbering visited region cells in order and
/// assigning each skipped region cell its nearest on-curve cell (Euclidean
/// distance, ties to the smaller index).
pub fn vh_mapping(spec: CurveSpec, region: &Region, mask: &ActivationMask) -> Result<VhMappingTable> {
    region.check_fits(&spec)?;
    if mask.region() != region {
        return Err(Error::ExtentMismatch {
            expected: region.extents().to_vec(),
            found: mask.region().extents().to_vec(),
        });
    }
    let sat = SummedArea::new(mask);
    let ext = region.extents();
    let mut slots = Vec::new();
    let mut on_curve = vec![NONE; region.cell_count()];
    for c in walk::vh_points(spec, &sat) {
        if (0..ext.len()).all(|a| (c[a] as usize) < ext[a]) {
            let off = region
                .offset(&LatticePoint::from_array(spec.n(), c))
                .expect("inside region");
            debug_assert_eq!(on_curve[off], NONE, "cell visited twice");
            on_curve[off] = slots.len() as u32;
            slots.push(off as u32);
        }
    }
    let reps = nearest_representatives(region, &on_curve);
    let base = MappingTable::from_slots(spec, region.clone(), Layout::Compacted, slots)?;
    VhMappingTable::from_parts(base, reps)
}

/// Chebyshev-shell search outward from each skipped cell. A shell at radius r
/// holds no cell closer than r, so the search stops once r² exceeds the best
/// squared distance found.
fn nearest_representatives(region: &Region, on_curve: &[u32]) -> Vec<(LatticePoint, u32)> {
    let ext = region.extents();
    let n = ext.len();
    let e = [ext[0] as i64, ext[1] as i64, if n == 3 { ext[2] as i64 } else { 1 }];
    let max_r = *e.iter().max().expect("non-empty");
    let at = |c: [i64; 3]| ((c[0] * e[1] + c[1]) * e[2] + c[2]) as usize;
    let mut out = Vec::new();
    for (off, &idx) in on_curve.iter().enumerate() {
        if idx != NONE {
            continue;
        }
        let cell = region.cell_at_offset(off);
        let mut c0 = [0i64; 3];
        for (a, &v) in cell.coords().iter().enumerate() {
            c0[a] = v as i64;
        }
        let mut best: Option<(i64, u32)> = None;
        for r in 1..max_r {
            if best.is_some_and(|(d, _)| r * r > d) {
                break;
            }
            let rk = if n == 3 { r } else { 0 };
            for di in -r..=r {
                for dj in -r..=r {
                    for dk in -rk..=rk {
                        if di.abs().max(dj.abs()).max(dk.abs()) != r {
                            continue;
                        }
                        let c = [c0[0] + di, c0[1] + dj, c0[2] + dk];
                        if (0..3).any(|a| c[a] < 0 || c[a] >= e[a]) {
                            continue;
                        }
                        let cand = on_curve[at(c)];
                        if cand == NONE {
                            continue;
                        }
                        let d = di * di + dj * dj + dk * dk;
                        if best.map_or(true, |(bd, bi)| (d, cand) < (bd, bi)) {
                            best = Some((d, cand));
                        }
                    }
                }
            }
        }
        let (_, idx) = best.expect("the origin is always on-curve");
        out.push((cell, idx));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{build_mapping, transform_index};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_nearest(t: &VhMappingTable, cell: &LatticePoint) -> u32 {
        t.base()
            .entries()
            .map(|(c, v)| (c.squared_distance(cell), v))
            .min()
            .unwrap()
            .1
    }

    #[test]
    fn all_active_is_vanilla_compacted() {
        for (n, p, ext) in [(2, 3, vec![8, 8]), (2, 3, vec![5, 7]), (3, 2, vec![4, 3, 2])] {
            let s = CurveSpec::new(n, p).unwrap();
            let r = Region::new(&ext).unwrap();
            let t = vh_mapping(s, &r, &ActivationMask::filled(r.clone(), true)).unwrap();
            assert_eq!(t.base(), &build_mapping(s, &r, Layout::Compacted).unwrap());
            assert!(t.representatives().is_empty());
        }
    }

    #[test]
    fn two_quadrant_counts() {
        let s = CurveSpec::new(2, 2).unwrap();
        let r = s.full_region();
        let m = ActivationMask::from_fn(r.clone(), |c| {
            let v = transform_index(s, &LatticePoint::new(&[c[0] as u32, c[1] as u32]).unwrap()).unwrap();
            (4..12).contains(&v)
        });
        let t = vh_mapping(s, &r, &m).unwrap();
        // Eight cells in the active quadrants plus the two stride endpoints
        // (2,0) and (0,3); the stride-interior cells (1,0), (2,1) and their
        // mirror images are skipped.
        assert_eq!(t.on_curve_count(), 10);
        assert_eq!(t.skipped_count(), 6);
    }

    #[test]
    fn all_inactive_order_two() {
        let s = CurveSpec::new(2, 2).unwrap();
        let r = s.full_region();
        let t = vh_mapping(s, &r, &ActivationMask::filled(r.clone(), false)).unwrap();
        let cells: Vec<Vec<u32>> = t.base().entries().map(|(c, _)| c.coords().to_vec()).collect();
        assert_eq!(cells, vec![vec![0, 0], vec![2, 0], vec![2, 2], vec![2, 3], vec![0, 3]]);
        assert_eq!(t.skipped_count(), 11);
    }

    #[test]
    fn tie_goes_to_smaller_index() {
        // (1,0) is skipped and equidistant from (0,0) and (2,0).
        let s = CurveSpec::new(2, 2).unwrap();
        let r = s.full_region();
        let t = vh_mapping(s, &r, &ActivationMask::filled(r.clone(), false)).unwrap();
        let cell = LatticePoint::new(&[1, 0]).unwrap();
        assert_eq!(t.representative_of(&cell), Some(0));
    }

    #[test]
    fn random_masks_cover_and_connect() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..60 {
            let n = rng.gen_range(2..=3);
            let p = rng.gen_range(1..=if n == 2 { 5 } else { 3 });
            let s = CurveSpec::new(n, p).unwrap();
            let ext: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=s.side())).collect();
            let r = Region::new(&ext).unwrap();
            let frac = rng.gen_range(0.0..0.5);
            let m = ActivationMask::from_fn(r.clone(), |_| rng.gen_bool(frac));
            let t = vh_mapping(s, &r, &m).unwrap();
            assert_eq!(t.on_curve_count() + t.skipped_count(), r.cell_count());
            for o in 0..r.cell_count() {
                let c = r.cell_at_offset(o);
                if m.is_active(&c) {
                    assert!(t.base().index_of(&c).is_some());
                }
            }
            for (c, v) in t.representatives() {
                assert_eq!(*v, brute_nearest(&t, c));
            }
            let pts = walk::vh_points(s, &SummedArea::new(&m));
            for w in pts.windows(2) {
                let diffs: Vec<u32> = (0..3).map(|a| w[0][a].abs_diff(w[1][a])).filter(|&d| d > 0).collect();
                assert_eq!(diffs.len(), 1);
                assert!(diffs[0].is_power_of_two());
            }
        }
    }

    #[test]
    fn mask_extent_mismatch() {
        let s = CurveSpec::new(2, 3).unwrap();
        let r = Region::new(&[8, 8]).unwrap();
        let m = ActivationMask::filled(Region::new(&[4, 8]).unwrap(), true);
        assert!(matches!(vh_mapping(s, &r, &m), Err(Error::ExtentMismatch { .. })));
    }

    #[test]
    fn mask_tensor_round_trip() {
        let r = Region::new(&[3, 2]).unwrap();
        let m = ActivationMask::from_fn(r, |c| c[0] == c[1]);
        let t: Tensor<f32> = m.to_tensor();
        assert_eq!(ActivationMask::from_tensor(&t).unwrap(), m);
        let bad = Tensor::from_vec(&[2], vec![0.0f32, 0.5]).unwrap();
        assert!(ActivationMask::from_tensor(&bad).is_err());
    }
}
