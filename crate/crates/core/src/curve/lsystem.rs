//! L-system expansion of the 2D Hilbert curve into walking guides.
//!
//! Variables `A`/`B`, constants `▷` (forward), `⊕` (turn left), `⊖` (turn right):
//!
//! ```text
//! A → ⊕ B ▷ ⊖ A ▷ A ⊖ ▷ B ⊕
//! B → ⊖ A ▷ ⊕ B ▷ B ⊕ ▷ A ⊖
//! ```

use std::fmt;

use crate::curve::{CurveSpec, LatticePoint};
use crate::error::{Error, Result};

pub const GLYPH_FORWARD: char = '▷';
pub const GLYPH_LEFT: char = '⊕';
pub const GLYPH_RIGHT: char = '⊖';

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Token {
    /// Move `stride` cells along the current heading; only the endpoint is visited.
    Forward(u32),
    TurnLeft,
    TurnRight,
}

/// 2D heading. `Up` increments `i`, `Right` increments `j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Heading {
    Right,
    Up,
    Left,
    Down,
}

impl Heading {
    pub fn left(self) -> Self {
        match self {
            Heading::Right => Heading::Up,
            Heading::Up => Heading::Left,
            Heading::Left => Heading::Down,
            Heading::Down => Heading::Right,
        }
    }

    pub fn right(self) -> Self {
        match self {
            Heading::Right => Heading::Down,
            Heading::Down => Heading::Left,
            Heading::Left => Heading::Up,
            Heading::Up => Heading::Right,
        }
    }

    /// Unit step as `(di, dj)`.
    pub fn delta(self) -> (i64, i64) {
        match self {
            Heading::Right => (0, 1),
            Heading::Up => (1, 0),
            Heading::Left => (0, -1),
            Heading::Down => (-1, 0),
        }
    }
}

/// Grammar symbols before variables are dropped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Sym {
    A,
    B,
    F,
    L,
    R,
}

pub(crate) const RULE_A: [Sym; 11] = [
    Sym::L,
    Sym::B,
    Sym::F,
    Sym::R,
    Sym::A,
    Sym::F,
    Sym::A,
    Sym::R,
    Sym::F,
    Sym::B,
    Sym::L,
];

pub(crate) const RULE_B: [Sym; 11] = [
    Sym::R,
    Sym::A,
    Sym::F,
    Sym::L,
    Sym::B,
    Sym::F,
    Sym::B,
    Sym::L,
    Sym::F,
    Sym::A,
    Sym::R,
];

pub(crate) fn rule(sym: Sym) -> &'static [Sym] {
    match sym {
        Sym::A => &RULE_A,
        Sym::B => &RULE_B,
        _ => unreachable!("constants have no production rule"),
    }
}

/// Token sequence that walks a curve from the origin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkGuide {
    tokens: Vec<Token>,
    initial_heading: Heading,
}

impl WalkGuide {
    pub fn new(tokens: Vec<Token>, initial_heading: Heading) -> Self {
        Self {
            tokens,
            initial_heading,
        }
    }

    /// Parses glyph notation; each `▷` is a unit forward. Whitespace is ignored.
    pub fn from_glyphs(s: &str) -> Result<Self> {
        let mut tokens = Vec::new();
        for ch in s.chars().filter(|c| !c.is_whitespace()) {
            tokens.push(match ch {
                GLYPH_FORWARD => Token::Forward(1),
                GLYPH_LEFT => Token::TurnLeft,
                GLYPH_RIGHT => Token::TurnRight,
                other => {
                    return Err(Error::Format {
                        format: "walking guide",
                        reason: format!("unexpected glyph {other:?}"),
                    })
                }
            });
        }
        Ok(Self::new(tokens, Heading::Right))
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn initial_heading(&self) -> Heading {
        self.initial_heading
    }

    /// Number of `Forward` tokens.
    pub fn forward_count(&self) -> usize {
        self.tokens
            .iter()
            .filter(|t| matches!(t, Token::Forward(_)))
            .count()
    }

    /// Total forward steps counting stride multiplicity.
    pub fn forward_steps(&self) -> u64 {
        self.tokens
            .iter()
            .map(|t| match t {
                Token::Forward(s) => *s as u64,
                _ => 0,
            })
            .sum()
    }

    /// Glyph string with a stride-`m` forward rendered as `m` copies of `▷`.
    pub fn glyphs(&self) -> String {
        let mut s = String::new();
        for t in &self.tokens {
            match t {
                Token::Forward(m) => (0..*m).for_each(|_| s.push(GLYPH_FORWARD)),
                Token::TurnLeft => s.push(GLYPH_LEFT),
                Token::TurnRight => s.push(GLYPH_RIGHT),
            }
        }
        s
    }

    /// True when no left turn is adjacent to a right turn.
    pub fn is_cancelled(&self) -> bool {
        self.tokens.windows(2).all(|w| {
            !matches!(
                (w[0], w[1]),
                (Token::TurnLeft, Token::TurnRight) | (Token::TurnRight, Token::TurnLeft)
            )
        })
    }

    /// Net `(di, dj)` displacement and final heading.
    pub fn displacement(&self) -> ((i64, i64), Heading) {
        let mut pos = (0i64, 0i64);
        let mut h = self.initial_heading;
        for t in &self.tokens {
            match *t {
                Token::Forward(m) => {
                    let (di, dj) = h.delta();
                    pos.0 += di * m as i64;
                    pos.1 += dj * m as i64;
                }
                Token::TurnLeft => h = h.left(),
                Token::TurnRight => h = h.right(),
            }
        }
        (pos, h)
    }

    /// Cells visited from the origin: the start cell plus each forward endpoint.
    pub fn walk(&self) -> Result<Vec<LatticePoint>> {
        let mut out = Vec::with_capacity(self.forward_count() + 1);
        let mut pos = (0i64, 0i64);
        let mut h = self.initial_heading;
        out.push(LatticePoint::from_array(2, [0, 0, 0]));
        for t in &self.tokens {
            match *t {
                Token::Forward(m) => {
                    let (di, dj) = h.delta();
                    pos.0 += di * m as i64;
                    pos.1 += dj * m as i64;
                    if pos.0 < 0 || pos.1 < 0 || pos.0 > u32::MAX as i64 || pos.1 > u32::MAX as i64 {
                        return Err(Error::OutOfBounds {
                            cell: vec![pos.0.max(0) as usize, pos.1.max(0) as usize],
                            extents: vec![],
                        });
                    }
                    out.push(LatticePoint::from_array(2, [pos.0 as u32, pos.1 as u32, 0]));
                }
                Token::TurnLeft => h = h.left(),
                Token::TurnRight => h = h.right(),
            }
        }
        Ok(out)
    }
}

impl fmt::Display for WalkGuide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.glyphs())
    }
}

/// Removes adjacent opposite turns, left to right, until none remain.
pub(crate) fn cancel_turns(tokens: impl IntoIterator<Item = Token>) -> Vec<Token> {
    let mut out: Vec<Token> = Vec::new();
    for t in tokens {
        match (out.last(), t) {
            (Some(Token::TurnLeft), Token::TurnRight) | (Some(Token::TurnRight), Token::TurnLeft) => {
                out.pop();
            }
            _ => out.push(t),
        }
    }
    out
}

/// Splits each forward into power-of-two strides, largest first.
pub(crate) fn split_strides(tokens: Vec<Token>) -> Vec<Token> {
    let mut out = Vec::with_capacity(tokens.len());
    for t in tokens {
        match t {
            Token::Forward(m) => {
                for bit in (0..32).rev() {
                    if m & (1 << bit) != 0 {
                        out.push(Token::Forward(1 << bit));
                    }
                }
            }
            other => out.push(other),
        }
    }
    out
}

/// Expands axiom `A` `p` times, drops the variables and cancels adjacent turns.
pub fn expand_guides(spec: CurveSpec) -> Result<WalkGuide> {
    if spec.n() != 2 {
        return Err(Error::UnsupportedDimension {
            required: 2,
            found: spec.n(),
        });
    }
    let mut word = vec![Sym::A];
    for _ in 0..spec.p() {
        let mut next = Vec::with_capacity(word.len() * 4);
        for &s in &word {
            match s {
                Sym::A | Sym::B => next.extend_from_slice(rule(s)),
                c => next.push(c),
            }
        }
        word = next;
    }
    let tokens = word.into_iter().filter_map(|s| match s {
        Sym::F => Some(Token::Forward(1)),
        Sym::L => Some(Token::TurnLeft),
        Sym::R => Some(Token::TurnRight),
        Sym::A | Sym::B => None,
    });
    Ok(WalkGuide::new(cancel_turns(tokens), Heading::Right))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strip(s: &str) -> String {
        s.chars().filter(|c| !c.is_whitespace()).collect()
    }

    #[test]
    fn order_one_guide() {
        let g = expand_guides(CurveSpec::new(2, 1).unwrap()).unwrap();
        assert_eq!(g.glyphs(), strip("⊕ ▷ ⊖ ▷ ⊖ ▷ ⊕"));
    }

    #[test]
    fn order_two_guide() {
        let g = expand_guides(CurveSpec::new(2, 2).unwrap()).unwrap();
        assert_eq!(g.glyphs(), "▷⊕▷⊕▷⊖▷▷⊖▷⊖▷⊕▷⊕▷⊖▷⊖▷▷⊖▷⊕▷⊕▷");
        assert_eq!(g.forward_count(), 15);
        assert!(g.is_cancelled());
    }

    #[test]
    fn order_three_counts() {
        let g = expand_guides(CurveSpec::new(2, 3).unwrap()).unwrap();
        assert_eq!(g.forward_steps(), 63);
    }

    #[test]
    fn walk_of_order_one() {
        let cells: Vec<Vec<u32>> = expand_guides(CurveSpec::new(2, 1).unwrap())
            .unwrap()
            .walk()
            .unwrap()
            .iter()
            .map(|c| c.coords().to_vec())
            .collect();
        assert_eq!(cells, vec![vec![0, 0], vec![1, 0], vec![1, 1], vec![0, 1]]);
    }

    #[test]
    fn net_displacement_ends_on_the_exit_corner() {
        for p in 1..=6 {
            let g = expand_guides(CurveSpec::new(2, p).unwrap()).unwrap();
            let ((di, dj), h) = g.displacement();
            assert_eq!((di, dj), (0, (1i64 << p) - 1), "p={p}");
            assert_eq!(h, Heading::Right);
        }
    }

    #[test]
    fn three_dimensional_guides_rejected() {
        assert!(expand_guides(CurveSpec::new(3, 1).unwrap()).is_err());
    }

    #[test]
    fn cancellation_reaches_fixpoint() {
        use Token::*;
        let out = cancel_turns([TurnLeft, TurnLeft, TurnRight, TurnRight, Forward(1)]);
        assert_eq!(out, vec![Forward(1)]);
        assert_eq!(split_strides(vec![Forward(7)]), vec![Forward(4), Forward(2), Forward(1)]);
    }

    #[test]
    fn glyph_round_trip() {
        let g = expand_guides(CurveSpec::new(2, 3).unwrap()).unwrap();
        assert_eq!(WalkGuide::from_glyphs(&g.glyphs()).unwrap(), g);
    }
}
