//! Letters, words and index windows.
//!
//! A letter is either a plain generator (`a`) or a member of an integer-indexed
//! family (`x[3]`). Words are finite letter sequences; the empty word is the
//! monoid identity `e`. All session-level truncations bound letter indices by a
//! [`Window`].

use serde::Serialize;
use smallvec::SmallVec;
use std::cmp::Ordering;
use std::fmt;

/// Position of a symbol in the presentation's alphabet declaration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SymbolId(pub u8);

/// One alphabet letter; `index` is present exactly for indexed-family symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub symbol: SymbolId,
    pub index: Option<i16>,
}

impl Letter {
    pub fn plain(symbol: SymbolId) -> Self {
        Letter { symbol, index: None }
    }

    pub fn indexed(symbol: SymbolId, index: i16) -> Self {
        Letter { symbol, index: Some(index) }
    }

    pub fn shifted(self, delta: i16) -> Self {
        Letter { symbol: self.symbol, index: self.index.map(|n| n + delta) }
    }
}

/// A finite word over the alphabet. Inline storage covers the ball sizes the
/// tool works at; longer words spill to the heap.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Word(pub SmallVec<[Letter; 8]>);

impl Word {
    pub fn empty() -> Self {
        Word(SmallVec::new())
    }

    pub fn single(letter: Letter) -> Self {
        let mut v = SmallVec::new();
        v.push(letter);
        Word(v)
    }

    pub fn from_letters(letters: &[Letter]) -> Self {
        Word(SmallVec::from_slice(letters))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn push(&mut self, letter: Letter) {
        self.0.push(letter);
    }

    /// `self · other` as a plain concatenation (no rewriting).
    pub fn concat(&self, other: &Word) -> Word {
        let mut out = self.clone();
        out.0.extend_from_slice(&other.0);
        out
    }

    pub fn prepend(&self, letter: Letter) -> Word {
        let mut out = Word(SmallVec::with_capacity(self.len() + 1));
        out.0.push(letter);
        out.0.extend_from_slice(&self.0);
        out
    }

    pub fn appended(&self, letter: Letter) -> Word {
        let mut out = self.clone();
        out.0.push(letter);
        out
    }

    pub fn reversed(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    /// Apply the alphabet automorphism shifting every family index by `delta`.
    pub fn shifted(&self, delta: i16) -> Word {
        Word(self.0.iter().map(|l| l.shifted(delta)).collect())
    }

    /// Shortlex order: by length first, then lexicographically.
    pub fn shortlex_cmp(&self, other: &Word) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }

    /// True when every family index lies in `window`.
    pub fn indices_in(&self, window: Window) -> bool {
        self.0.iter().all(|l| l.index.map_or(true, |n| window.contains(n)))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.shortlex_cmp(other)
    }
}

/// Closed integer interval bounding the family indices of a session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Window {
    pub lo: i16,
    pub hi: i16,
}

impl Window {
    pub fn new(lo: i16, hi: i16) -> Self {
        assert!(lo <= hi, "window lower bound must not exceed upper bound");
        Window { lo, hi }
    }

    pub fn symmetric(w: i16) -> Self {
        Window::new(-w, w)
    }

    pub fn contains(&self, n: i16) -> bool {
        self.lo <= n && n <= self.hi
    }

    pub fn indices(&self) -> impl Iterator<Item = i16> {
        self.lo..=self.hi
    }

    pub fn width(&self) -> usize {
        (self.hi - self.lo) as usize + 1
    }

    /// Shrink both ends by `d`, clamping to a point when `d` is large.
    pub fn shrunk(&self, d: i16) -> Option<Window> {
        if self.lo + d <= self.hi - d {
            Some(Window::new(self.lo + d, self.hi - d))
        } else {
            None
        }
    }

    /// Parse `a..b` (both ends inclusive), e.g. `-2..2`.
    pub fn parse(text: &str) -> Result<Window, String> {
        let (lo, hi) = text
            .split_once("..")
            .ok_or_else(|| format!("window `{text}` must have the form a..b"))?;
        let lo: i16 = lo.trim().parse().map_err(|_| format!("bad window bound `{lo}`"))?;
        let hi: i16 = hi.trim().parse().map_err(|_| format!("bad window bound `{hi}`"))?;
        if lo > hi {
            return Err(format!("empty window {lo}..{hi}"));
        }
        Ok(Window::new(lo, hi))
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}
