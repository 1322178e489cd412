//! Hilbert indexing by per-level coordinate transforms.
//!
//! A curve of order `p` is the concatenation of `2^n` transformed copies of the
//! order `p-1` curve, one per sub-cube, visited in reflected Gray-code order.
//! Each copy is placed by a signed axis permutation (an [`Orientation`]). The
//! per-child orientations are derived once per dimension from the entry/exit
//! corner constraints, so the same machinery serves 2D and 3D; in 2D the
//! solution is unique and coincides with the L-system curve.

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::curve::{CurveSpec, LatticePoint};
use crate::error::{Error, Result};

/// Signed axis permutation acting on corner bit-sets: canonical axis `a` maps to
/// actual axis `perm[a]`, then the bits in `flip` are complemented.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Orientation {
    perm: [u8; 3],
    flip: u8,
}

impl Orientation {
    fn identity() -> Self {
        Self {
            perm: [0, 1, 2],
            flip: 0,
        }
    }

    fn apply(&self, n: usize, corner: u8) -> u8 {
        let mut out = 0u8;
        for a in 0..n {
            if corner >> a & 1 == 1 {
                out |= 1 << self.perm[a];
            }
        }
        out ^ self.flip
    }

    /// `self ∘ other`
    fn compose(&self, n: usize, other: &Self) -> Self {
        let mut perm = [0, 1, 2];
        for (a, slot) in perm.iter_mut().enumerate().take(n) {
            *slot = self.perm[other.perm[a] as usize];
        }
        Self {
            perm,
            flip: self.apply(n, other.flip),
        }
    }
}

fn gray(k: usize) -> u8 {
    (k ^ (k >> 1)) as u8
}

/// Precomputed state machine for one dimension.
pub(crate) struct CurveTables {
    pub n: usize,
    pub identity: u16,
    /// `child_state[s][k]` = state of child `k` inside a block in state `s`.
    pub child_state: Vec<[u16; 8]>,
    /// Actual corner bits of child `k` within a block in state `s`.
    pub child_corner: Vec<[u8; 8]>,
    /// Inverse of `child_corner`: actual corner bits to child ordinal.
    pub digit: Vec<[u8; 8]>,
    /// Entry and exit corners of a block in state `s`.
    pub entry_corner: Vec<u8>,
    pub exit_corner: Vec<u8>,
}

impl CurveTables {
    fn build(n: usize) -> Self {
        let base = derive_child_orientations(n);
        let count = 1usize << n;

        let mut perms: Vec<[u8; 3]> = Vec::new();
        let axes: Vec<u8> = (0..n as u8).collect();
        permutations(&axes, &mut Vec::new(), &mut perms);
        let mut states = Vec::new();
        for p in &perms {
            for flip in 0..(1u8 << n) {
                states.push(Orientation { perm: *p, flip });
            }
        }
        let index: HashMap<Orientation, u16> = states
            .iter()
            .enumerate()
            .map(|(i, s)| (*s, i as u16))
            .collect();

        let mut child_state = vec![[0u16; 8]; states.len()];
        let mut child_corner = vec![[0u8; 8]; states.len()];
        let mut digit = vec![[0u8; 8]; states.len()];
        let mut entry_corner = vec![0u8; states.len()];
        let mut exit_corner = vec![0u8; states.len()];
        for (si, s) in states.iter().enumerate() {
            for k in 0..count {
                let composed = s.compose(n, &base[k]);
                child_state[si][k] = index[&composed];
                let c = s.apply(n, gray(k));
                child_corner[si][k] = c;
                digit[si][c as usize] = k as u8;
            }
            entry_corner[si] = s.apply(n, 0);
            exit_corner[si] = s.apply(n, gray(count - 1));
        }
        Self {
            n,
            identity: index[&Orientation::identity()],
            child_state,
            child_corner,
            digit,
            entry_corner,
            exit_corner,
        }
    }

    pub fn children(&self) -> usize {
        1 << self.n
    }
}

fn permutations(rest: &[u8], prefix: &mut Vec<u8>, out: &mut Vec<[u8; 3]>) {
    if rest.is_empty() {
        let mut p = [0, 1, 2];
        p[..prefix.len()].copy_from_slice(prefix);
        out.push(p);
        return;
    }
    for i in 0..rest.len() {
        prefix.push(rest[i]);
        let remaining: Vec<u8> = rest
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &v)| v)
            .collect();
        permutations(&remaining, prefix, out);
        prefix.pop();
    }
}

/// Child orientations of the canonical curve (entry at corner 0, exit at the
/// last Gray code). Child `k` must enter where child `k-1` left, one step
/// across their shared face; the exit axis of each child is searched, the
/// remaining axes follow by cyclic rotation.
fn derive_child_orientations(n: usize) -> Vec<Orientation> {
    let count = 1usize << n;
    let last = count - 1;

    fn rotation(n: usize, exit_axis: usize, entry: u8) -> Orientation {
        let shift = (exit_axis + n - (n - 1)) % n;
        let mut perm = [0, 1, 2];
        for (a, slot) in perm.iter_mut().enumerate().take(n) {
            *slot = ((a + shift) % n) as u8;
        }
        Orientation { perm, flip: entry }
    }

    fn search(n: usize, k: usize, entry: u8, out: &mut Vec<Orientation>) -> bool {
        let last = (1usize << n) - 1;
        for d in 0..n {
            let exit = entry ^ (1 << d);
            if k == last {
                if exit == gray(last) {
                    out.push(rotation(n, d, entry));
                    return true;
                }
                continue;
            }
            let axis = (gray(k) ^ gray(k + 1)).trailing_zeros();
            if (exit >> axis & 1) != (gray(k + 1) >> axis & 1) {
                continue;
            }
            out.push(rotation(n, d, entry));
            if search(n, k + 1, exit ^ (1 << axis), out) {
                return true;
            }
            out.pop();
        }
        false
    }

    let mut out = Vec::with_capacity(count);
    let found = search(n, 0, 0, &mut out);
    assert!(found && out.len() == last + 1, "no Hilbert orientation for n={n}");
    out
}

pub(crate) fn tables(n: usize) -> &'static CurveTables {
    static T2: OnceLock<CurveTables> = OnceLock::new();
    static T3: OnceLock<CurveTables> = OnceLock::new();
    match n {
        2 => T2.get_or_init(|| CurveTables::build(2)),
        3 => T3.get_or_init(|| CurveTables::build(3)),
        _ => panic!("unsupported dimension {n}"),
    }
}

#[inline]
pub(crate) fn corner_offset(n: usize, corner: u8, scale: u32) -> [u32; 3] {
    let mut o = [0u32; 3];
    for (a, slot) in o.iter_mut().enumerate().take(n) {
        *slot = (corner >> a & 1) as u32 * scale;
    }
    o
}

/// Curve index of `cell` within the full `2^p` hypercube.
pub fn transform_index(spec: CurveSpec, cell: &LatticePoint) -> Result<u64> {
    let n = spec.n();
    if cell.ndim() != n {
        return Err(Error::UnsupportedDimension {
            required: n,
            found: cell.ndim(),
        });
    }
    let side = spec.side() as u64;
    if cell.coords().iter().any(|&c| c as u64 >= side) {
        return Err(Error::OutOfBounds {
            cell: cell.coords().iter().map(|&c| c as usize).collect(),
            extents: vec![spec.side(); n],
        });
    }
    let t = tables(n);
    let mut state = t.identity as usize;
    let mut index = 0u64;
    for level in (0..spec.p()).rev() {
        let mut corner = 0u8;
        for (a, &c) in cell.coords().iter().enumerate() {
            corner |= ((c >> level & 1) as u8) << a;
        }
        let k = t.digit[state][corner as usize];
        index = index << n | k as u64;
        state = t.child_state[state][k as usize] as usize;
    }
    Ok(index)
}

/// Inverse of [`transform_index`].
pub fn cell_at_index(spec: CurveSpec, index: u64) -> Result<LatticePoint> {
    if index >= spec.length() as u64 {
        return Err(Error::OutOfBounds {
            cell: vec![index as usize],
            extents: vec![spec.length()],
        });
    }
    let n = spec.n();
    let t = tables(n);
    let mask = (1u64 << n) - 1;
    let mut state = t.identity as usize;
    let mut c = [0u32; 3];
    for level in (0..spec.p()).rev() {
        let k = (index >> (level * n as u32) & mask) as usize;
        let corner = t.child_corner[state][k];
        for (a, slot) in c.iter_mut().enumerate().take(n) {
            *slot |= ((corner >> a & 1) as u32) << level;
        }
        state = t.child_state[state][k] as usize;
    }
    Ok(LatticePoint::from_array(n, c))
}

/// Visits every cell of the full hypercube in curve order.
pub(crate) fn traverse(spec: CurveSpec, mut visit: impl FnMut([u32; 3])) {
    let t = tables(spec.n());
    // Leaf-level offsets per state, so the innermost level is a table lookup.
    let leaves: Vec<[[u32; 3]; 8]> = (0..t.child_corner.len())
        .map(|s| {
            let mut cells = [[0u32; 3]; 8];
            for (k, cell) in cells.iter_mut().enumerate().take(t.children()) {
                *cell = corner_offset(t.n, t.child_corner[s][k], 1);
            }
            cells
        })
        .collect();

    fn rec<F: FnMut([u32; 3])>(
        t: &CurveTables,
        leaves: &[[[u32; 3]; 8]],
        level: u32,
        state: usize,
        origin: [u32; 3],
        visit: &mut F,
    ) {
        let count = t.children();
        if level == 1 {
            for off in &leaves[state][..count] {
                visit([origin[0] + off[0], origin[1] + off[1], origin[2] + off[2]]);
            }
            return;
        }
        let half = 1u32 << (level - 1);
        for k in 0..count {
            let o = corner_offset(t.n, t.child_corner[state][k], half);
            rec(
                t,
                leaves,
                level - 1,
                t.child_state[state][k] as usize,
                [origin[0] + o[0], origin[1] + o[1], origin[2] + o[2]],
                visit,
            );
        }
    }

    rec(t, &leaves, spec.p(), t.identity as usize, [0; 3], &mut visit);
}

/// Row-major offsets (with the given axis strides) of every cell of the full
/// hypercube, in curve order.
///
/// The lowest levels are emitted from per-state offset tables, one block at a
/// time; only the levels above them recurse.
pub(crate) fn full_offsets(spec: CurveSpec, strides: [u32; 3]) -> Vec<u32> {
    let t = tables(spec.n());
    let leaf = spec.p().min(3);
    let block = 1usize << (spec.n() as u32 * leaf);
    let blocks: Vec<Vec<u32>> = (0..t.child_corner.len())
        .map(|state| {
            let mut cells = Vec::with_capacity(block);
            walk_block(t, leaf, state, [0; 3], &mut |c| {
                cells.push(c[0] * strides[0] + c[1] * strides[1] + c[2] * strides[2])
            });
            cells
        })
        .collect();

    fn rec(
        t: &CurveTables,
        blocks: &[Vec<u32>],
        leaf: u32,
        strides: [u32; 3],
        level: u32,
        state: usize,
        origin: [u32; 3],
        out: &mut Vec<u32>,
    ) {
        if level == leaf {
            let base = origin[0] * strides[0] + origin[1] * strides[1] + origin[2] * strides[2];
            out.extend(blocks[state].iter().map(|&d| base + d));
            return;
        }
        let half = 1u32 << (level - 1);
        for k in 0..t.children() {
            let o = corner_offset(t.n, t.child_corner[state][k], half);
            let next = [origin[0] + o[0], origin[1] + o[1], origin[2] + o[2]];
            rec(t, blocks, leaf, strides, level - 1, t.child_state[state][k] as usize, next, out);
        }
    }

    let mut out = Vec::with_capacity(spec.length());
    rec(t, &blocks, leaf, strides, spec.p(), t.identity as usize, [0; 3], &mut out);
    out
}

fn walk_block(t: &CurveTables, level: u32, state: usize, origin: [u32; 3], visit: &mut impl FnMut([u32; 3])) {
    if level == 0 {
        visit(origin);
        return;
    }
    let half = 1u32 << (level - 1);
    for k in 0..t.children() {
        let o = corner_offset(t.n, t.child_corner[state][k], half);
        let next = [origin[0] + o[0], origin[1] + o[1], origin[2] + o[2]];
        walk_block(t, level - 1, t.child_state[state][k] as usize, next, visit);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(c: &[u32]) -> LatticePoint {
        LatticePoint::new(c).unwrap()
    }

    #[test]
    fn order_one_square() {
        let s = CurveSpec::new(2, 1).unwrap();
        assert_eq!(transform_index(s, &pt(&[0, 0])).unwrap(), 0);
        assert_eq!(transform_index(s, &pt(&[1, 0])).unwrap(), 1);
        assert_eq!(transform_index(s, &pt(&[1, 1])).unwrap(), 2);
        assert_eq!(transform_index(s, &pt(&[0, 1])).unwrap(), 3);
    }

    #[test]
    fn order_one_cube_is_a_gray_walk() {
        let s = CurveSpec::new(3, 1).unwrap();
        let cells: Vec<_> = (0..8).map(|v| cell_at_index(s, v).unwrap()).collect();
        for w in cells.windows(2) {
            assert_eq!(w[0].l1_distance(&w[1]), 1);
        }
        for (v, c) in cells.iter().enumerate() {
            assert_eq!(transform_index(s, c).unwrap(), v as u64);
        }
    }

    #[test]
    fn traversal_matches_index() {
        for (n, p) in [(2, 3), (3, 2)] {
            let s = CurveSpec::new(n, p).unwrap();
            let mut v = 0u64;
            traverse(s, |c| {
                let cell = LatticePoint::from_array(n, c);
                assert_eq!(transform_index(s, &cell).unwrap(), v);
                v += 1;
            });
            assert_eq!(v, s.length() as u64);
        }
    }

    #[test]
    fn start_cell_is_index_zero() {
        for (n, p) in [(2, 1), (2, 5), (3, 1), (3, 4)] {
            let s = CurveSpec::new(n, p).unwrap();
            let origin = LatticePoint::from_array(n, [0; 3]);
            assert_eq!(transform_index(s, &origin).unwrap(), 0);
        }
    }

    #[test]
    fn out_of_bounds_rejected() {
        let s = CurveSpec::new(2, 2).unwrap();
        assert!(transform_index(s, &pt(&[4, 0])).is_err());
        assert!(transform_index(s, &pt(&[0, 0, 0])).is_err());
    }
}
