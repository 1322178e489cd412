//! Turtle-driven L-system expansion with recursion pruning.
//!
//! Each `A`/`B` placeholder whose block holds no active cell is replaced by a
//! straight run across the block (`side - 1` cells along the current heading,
//! which is the block's entry→exit displacement). The run is folded into the
//! adjacent connector `▷` of the same production: the first two placeholders
//! of a rule are always followed directly by `▷`, the last two always preceded
//! by one, so the fold never crosses a turn.

use crate::curve::lsystem::{cancel_turns, rule, split_strides, Sym};
use crate::curve::{CurveSpec, Heading, Token, WalkGuide};
use crate::error::{Error, Result};
use crate::vh::{ActivationMask, SummedArea};

struct Turtle<'a> {
    sat: &'a SummedArea,
    tokens: Vec<Token>,
    pos: (i64, i64),
    heading: Heading,
    carry: u32,
}

impl Turtle<'_> {
    fn advance(&mut self, m: u32) {
        let (di, dj) = self.heading.delta();
        self.pos.0 += di * m as i64;
        self.pos.1 += dj * m as i64;
    }

    fn forward(&mut self) {
        let m = 1 + std::mem::take(&mut self.carry);
        self.tokens.push(Token::Forward(m));
        self.advance(m);
    }

    /// Whether the `side`-cell block a placeholder would fill holds any active cell.
    fn block_active(&self, sym: Sym, side: u32) -> bool {
        let across = match sym {
            Sym::A => self.heading.left(),
            _ => self.heading.right(),
        };
        let (hi, hj) = self.heading.delta();
        let (ai, aj) = across.delta();
        let far = side as i64 - 1;
        let corner = (
            self.pos.0 + (hi + ai) * far,
            self.pos.1 + (hj + aj) * far,
        );
        let lo = [self.pos.0.min(corner.0), self.pos.1.min(corner.1)];
        let hi = [self.pos.0.max(corner.0) + 1, self.pos.1.max(corner.1) + 1];
        debug_assert!(lo[0] >= 0 && lo[1] >= 0);
        self.sat.count(
            &[lo[0] as usize, lo[1] as usize],
            &[hi[0] as usize, hi[1] as usize],
        ) > 0
    }

    fn expand(&mut self, sym: Sym, level: u32) {
        let mut child = 0usize;
        for &s in rule(sym) {
            match s {
                Sym::L => {
                    self.tokens.push(Token::TurnLeft);
                    self.heading = self.heading.left();
                }
                Sym::R => {
                    self.tokens.push(Token::TurnRight);
                    self.heading = self.heading.right();
                }
                Sym::F => self.forward(),
                Sym::A | Sym::B => {
                    let k = child;
                    child += 1;
                    if level == 1 {
                        continue;
                    }
                    let side = 1u32 << (level - 1);
                    if self.block_active(s, side) {
                        self.expand(s, level - 1);
                    } else if k < 2 {
                        self.carry += side - 1;
                    } else {
                        match self.tokens.last_mut() {
                            Some(Token::Forward(m)) => *m += side - 1,
                            _ => unreachable!("late placeholders follow a forward"),
                        }
                        self.advance(side - 1);
                    }
                }
            }
        }
    }
}

/// Variable-length walking guide over the 2D hypercube of `spec`.
///
/// Strides are split into powers of two, so every `Forward(m)` in the result
/// has `m = 2^k`. With every block active this equals [`crate::expand_guides`].
pub fn vh_expand(spec: CurveSpec, mask: &ActivationMask) -> Result<WalkGuide> {
    if spec.n() != 2 {
        return Err(Error::UnsupportedDimension {
            required: 2,
            found: spec.n(),
        });
    }
    mask.region().check_fits(&spec)?;
    let sat = SummedArea::new(mask);
    let mut t = Turtle {
        sat: &sat,
        tokens: Vec::new(),
        pos: (0, 0),
        heading: Heading::Right,
        carry: 0,
    };
    t.expand(Sym::A, spec.p());
    debug_assert_eq!(t.carry, 0);
    Ok(WalkGuide::new(
        split_strides(cancel_turns(t.tokens)),
        Heading::Right,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{expand_guides, transform_index, LatticePoint, Region};
    use crate::vh::walk::vh_points;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn two_quadrant_mask() -> ActivationMask {
        // Second and third quadrants in curve order.
        let s = CurveSpec::new(2, 2).unwrap();
        ActivationMask::from_fn(s.full_region(), |c| {
            let v = transform_index(s, &LatticePoint::new(&[c[0] as u32, c[1] as u32]).unwrap()).unwrap();
            (4..12).contains(&v)
        })
    }

    #[test]
    fn two_active_quadrants_guide() {
        let s = CurveSpec::new(2, 2).unwrap();
        let g = vh_expand(s, &two_quadrant_mask()).unwrap();
        assert_eq!(g.glyphs(), "⊕▷▷▷⊖▷⊖▷⊕▷⊕▷⊖▷⊖▷▷▷⊕");
    }

    #[test]
    fn all_active_is_vanilla() {
        for p in 1..=5 {
            let s = CurveSpec::new(2, p).unwrap();
            let m = ActivationMask::filled(s.full_region(), true);
            assert_eq!(vh_expand(s, &m).unwrap(), expand_guides(s).unwrap());
        }
    }

    #[test]
    fn all_inactive_keeps_net_displacement() {
        for p in 2..=6 {
            let s = CurveSpec::new(2, p).unwrap();
            let m = ActivationMask::filled(s.full_region(), false);
            let vh = vh_expand(s, &m).unwrap();
            let vanilla = expand_guides(s).unwrap();
            assert_eq!(vh.displacement().0, vanilla.displacement().0);
        }
        let s = CurveSpec::new(2, 2).unwrap();
        let m = ActivationMask::filled(s.full_region(), false);
        let cells: Vec<Vec<u32>> = vh_expand(s, &m)
            .unwrap()
            .walk()
            .unwrap()
            .iter()
            .map(|c| c.coords().to_vec())
            .collect();
        assert_eq!(cells, vec![vec![0, 0], vec![2, 0], vec![2, 2], vec![2, 3], vec![0, 3]]);
    }

    #[test]
    fn turtle_matches_transform_walk() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let p = rng.gen_range(1..=5);
            let s = CurveSpec::new(2, p).unwrap();
            let side = s.side();
            let r = Region::new(&[rng.gen_range(1..=side), rng.gen_range(1..=side)]).unwrap();
            let frac = rng.gen_range(0.0..0.3);
            let m = ActivationMask::from_fn(r, |_| rng.gen_bool(frac));
            let turtle: Vec<[u32; 3]> = vh_expand(s, &m)
                .unwrap()
                .walk()
                .unwrap()
                .iter()
                .map(|c| [c.coords()[0], c.coords()[1], 0])
                .collect();
            assert_eq!(turtle, vh_points(s, &SummedArea::new(&m)));
        }
    }

    #[test]
    fn strides_are_powers_of_two() {
        let s = CurveSpec::new(2, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = ActivationMask::from_fn(s.full_region(), |_| rng.gen_bool(0.05));
        for t in vh_expand(s, &m).unwrap().tokens() {
            if let Token::Forward(k) = t {
                assert!(k.is_power_of_two());
            }
        }
    }

    #[test]
    fn three_dimensional_spec_rejected() {
        let s = CurveSpec::new(3, 2).unwrap();
        let m = ActivationMask::filled(s.full_region(), true);
        assert!(vh_expand(s, &m).is_err());
    }
}
