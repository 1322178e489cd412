use crate::vh::ActivationMask;

/// Summed-volume table of active cells; answers "any active cell in this box" in O(1).
#[derive(Clone, Debug)]
pub struct SummedArea {
    ext: [usize; 3],
    /// `(e0+1)·(e1+1)·(e2+1)` inclusive prefix counts, zero-padded on the low faces.
    prefix: Vec<u32>,
}

impl SummedArea {
    pub fn new(mask: &ActivationMask) -> Self {
        let e = mask.region().extents();
        let ext = [e[0], e[1], if e.len() == 3 { e[2] } else { 1 }];
        let (s1, s2) = ((ext[1] + 1) * (ext[2] + 1), ext[2] + 1);
        let mut prefix = vec![0u32; (ext[0] + 1) * s1];
        let active = mask.as_slice();
        for i in 0..ext[0] {
            for j in 0..ext[1] {
                for k in 0..ext[2] {
                    let v = active[(i * ext[1] + j) * ext[2] + k] as u32;
                    let at = |a: usize, b: usize, c: usize| a * s1 + b * s2 + c;
                    prefix[at(i + 1, j + 1, k + 1)] = v
                        + prefix[at(i, j + 1, k + 1)]
                        + prefix[at(i + 1, j, k + 1)]
                        + prefix[at(i + 1, j + 1, k)]
                        - prefix[at(i, j, k + 1)]
                        - prefix[at(i, j + 1, k)]
                        - prefix[at(i + 1, j, k)]
                        + prefix[at(i, j, k)];
                }
            }
        }
        Self { ext, prefix }
    }

    /// Active cells in the half-open box `[lo, hi)`, clipped to the mask extents.
    pub fn count(&self, lo: &[usize], hi: &[usize]) -> u32 {
        let mut l = [0usize; 3];
        let mut h = [1usize; 3];
        for a in 0..lo.len().min(3) {
            l[a] = lo[a].min(self.ext[a]);
            h[a] = hi[a].min(self.ext[a]);
            if h[a] <= l[a] {
                return 0;
            }
        }
        let (s1, s2) = ((self.ext[1] + 1) * (self.ext[2] + 1), self.ext[2] + 1);
        let p = |a: usize, b: usize, c: usize| self.prefix[a * s1 + b * s2 + c] as i64;
        let total = p(h[0], h[1], h[2]) - p(l[0], h[1], h[2]) - p(h[0], l[1], h[2]) - p(h[0], h[1], l[2])
            + p(l[0], l[1], h[2])
            + p(l[0], h[1], l[2])
            + p(h[0], l[1], l[2])
            - p(l[0], l[1], l[2]);
        total as u32
    }
}

/// True iff any active cell lies in the half-open box `[lo, hi)`. Cells outside
/// the mask extents count as inactive.
pub fn subtree_activity(table: &SummedArea, lo: &[usize], hi: &[usize]) -> bool {
    table.count(lo, hi) > 0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::Region;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_mask_has_no_activity() {
        let m = ActivationMask::filled(Region::new(&[4, 4]).unwrap(), false);
        let t = SummedArea::new(&m);
        assert!(!subtree_activity(&t, &[0, 0], &[4, 4]));
        assert!(!subtree_activity(&t, &[2, 2], &[4, 4]));
    }

    #[test]
    fn single_origin_cell() {
        let r = Region::new(&[4, 4]).unwrap();
        let m = ActivationMask::from_fn(r, |c| c == [0, 0]);
        let t = SummedArea::new(&m);
        assert!(subtree_activity(&t, &[0, 0], &[2, 2]));
        assert!(!subtree_activity(&t, &[0, 2], &[2, 4]));
    }

    #[test]
    fn random_quadrants_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let r = Region::new(&[8, 8]).unwrap();
        for _ in 0..20 {
            let m = ActivationMask::from_fn(r.clone(), |_| rng.gen_bool(0.1));
            let t = SummedArea::new(&m);
            for side in [4usize, 2] {
                for qi in (0..8).step_by(side) {
                    for qj in (0..8).step_by(side) {
                        let brute = (qi..qi + side)
                            .flat_map(|i| (qj..qj + side).map(move |j| (i, j)))
                            .any(|(i, j)| m.as_slice()[i * 8 + j]);
                        assert_eq!(subtree_activity(&t, &[qi, qj], &[qi + side, qj + side]), brute);
                    }
                }
            }
        }
    }

    #[test]
    fn boxes_past_the_region_are_clipped() {
        let r = Region::new(&[3, 3, 3]).unwrap();
        let m = ActivationMask::from_fn(r, |c| c == [2, 2, 2]);
        let t = SummedArea::new(&m);
        assert_eq!(t.count(&[2, 2, 2], &[4, 4, 4]), 1);
        assert!(!subtree_activity(&t, &[3, 0, 0], &[4, 4, 4]));
    }
}
