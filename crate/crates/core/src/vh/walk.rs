//! Variable-length walk on the transform construction (2D and 3D).
//!
//! Sub-blocks with no active cell are not descended into; the walk crosses
//! them along their entry→exit diagonal, which is a single axis-aligned run of
//! `side - 1` cells. That run is folded into the neighbouring connector step
//! when collinear (following step first, then preceding), so the walk reaches
//! every active block at the same entry cell as the vanilla curve.

use crate::curve::transform::{corner_offset, tables, CurveTables};
use crate::curve::CurveSpec;
use crate::vh::SummedArea;

/// Axis-aligned move; only the endpoint is visited.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Move {
    pub axis: u8,
    pub positive: bool,
    pub len: u32,
}

impl Move {
    fn same_direction(&self, other: &Move) -> bool {
        self.axis == other.axis && self.positive == other.positive
    }
}

fn unit_between(a: [u32; 3], b: [u32; 3]) -> Move {
    for axis in 0..3 {
        if a[axis] != b[axis] {
            return Move {
                axis: axis as u8,
                positive: b[axis] > a[axis],
                len: b[axis].abs_diff(a[axis]),
            };
        }
    }
    unreachable!("coincident cells")
}

fn add(a: [u32; 3], b: [u32; 3]) -> [u32; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

struct Ctx<'a> {
    t: &'a CurveTables,
    sat: &'a SummedArea,
    moves: Vec<Move>,
}

impl Ctx<'_> {
    fn block(&mut self, level: u32, state: usize, origin: [u32; 3]) {
        let t = self.t;
        let n = t.n;
        let count = t.children();
        if level == 1 {
            let cell = |k: usize| add(origin, corner_offset(n, t.child_corner[state][k], 1));
            for k in 1..count {
                self.moves.push(unit_between(cell(k - 1), cell(k)));
            }
            return;
        }
        let half = 1u32 << (level - 1);
        let mut origins = [[0u32; 3]; 8];
        let mut states = [0usize; 8];
        let mut active = [true; 8];
        let mut skip = [None::<Move>; 8];
        let mut entry = [[0u32; 3]; 8];
        let mut exit = [[0u32; 3]; 8];
        for k in 0..count {
            origins[k] = add(origin, corner_offset(n, t.child_corner[state][k], half));
            states[k] = t.child_state[state][k] as usize;
            entry[k] = add(origins[k], corner_offset(n, t.entry_corner[states[k]], half - 1));
            exit[k] = add(origins[k], corner_offset(n, t.exit_corner[states[k]], half - 1));
            let lo: Vec<usize> = origins[k][..n].iter().map(|&c| c as usize).collect();
            let hi: Vec<usize> = lo.iter().map(|&c| c + half as usize).collect();
            active[k] = self.sat.count(&lo, &hi) > 0;
            if !active[k] {
                skip[k] = Some(unit_between(entry[k], exit[k]));
            }
        }
        let mut connectors: Vec<Move> = (0..count - 1)
            .map(|k| unit_between(exit[k], entry[k + 1]))
            .collect();
        let mut standalone = [false; 8];
        for k in 0..count {
            let Some(run) = skip[k] else { continue };
            if k + 1 < count && connectors[k].same_direction(&run) {
                connectors[k].len += run.len;
            } else if k > 0 && connectors[k - 1].same_direction(&run) {
                connectors[k - 1].len += run.len;
            } else {
                standalone[k] = true;
            }
        }
        for k in 0..count {
            if active[k] {
                self.block(level - 1, states[k], origins[k]);
            } else if standalone[k] {
                self.moves.push(skip[k].expect("inactive child"));
            }
            if k + 1 < count {
                self.moves.push(connectors[k]);
            }
        }
    }
}

/// Moves of the variable-length walk over the full hypercube, strides split
/// into powers of two (largest first).
pub(crate) fn vh_moves(spec: CurveSpec, sat: &SummedArea) -> Vec<Move> {
    let t = tables(spec.n());
    let mut ctx = Ctx {
        t,
        sat,
        moves: Vec::new(),
    };
    ctx.block(spec.p(), t.identity as usize, [0; 3]);
    let mut out = Vec::with_capacity(ctx.moves.len());
    for m in ctx.moves {
        for bit in (0..32).rev() {
            if m.len & (1 << bit) != 0 {
                out.push(Move { len: 1 << bit, ..m });
            }
        }
    }
    out
}

/// Visited cells: the origin followed by every move endpoint.
pub(crate) fn vh_points(spec: CurveSpec, sat: &SummedArea) -> Vec<[u32; 3]> {
    let moves = vh_moves(spec, sat);
    let mut out = Vec::with_capacity(moves.len() + 1);
    let mut pos = [0u32; 3];
    out.push(pos);
    for m in moves {
        let a = m.axis as usize;
        pos[a] = if m.positive { pos[a] + m.len } else { pos[a] - m.len };
        out.push(pos);
    }
    out
}
