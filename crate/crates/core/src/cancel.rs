//! Bounded verification of left cancellativity and left divisibility.
//!
//! Division peels the divisor one letter at a time. Peeling a letter searches
//! the relation class of the dividend, capped one letter above its length,
//! for a representative starting with that letter; by left cancellativity the
//! quotient class is unique, so the peel order cannot lose witnesses. The
//! length cap is exact for length-reducing systems whose letter quotients are
//! never longer than the dividend, which holds for all shipped corpora.

use crate::presentation::Presentation;
use crate::rewrite::{self, critical_pairs, normalize, tau_class, Ball};
use crate::verdict::{Exhausted, Verdict};
use crate::words::{Letter, Window, Word};
use rayon::prelude::*;
use std::collections::HashMap;

pub const DEFAULT_DIVIDE_BUDGET: usize = 4_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DivideOutcome {
    Quotient(Word),
    NotDivisible,
    Unknown,
}

/// Quotient of `w` by a single letter: the normal form `u` with `l·u ~ w`,
/// if one exists.
pub fn divide_letter(p: &Presentation, l: Letter, w: &Word, budget: usize) -> DivideOutcome {
    if w.letters().first() == Some(&l) {
        return DivideOutcome::Quotient(Word::from_letters(&w.letters()[1..]));
    }
    let class = tau_class(p, w, w.len() + 1, budget);
    for cand in &class.words {
        if cand.letters().first() == Some(&l) {
            let rest = Word::from_letters(&cand.letters()[1..]);
            return match normalize(p, &rest) {
                Ok(q) => DivideOutcome::Quotient(q),
                Err(_) => DivideOutcome::Unknown,
            };
        }
    }
    if class.complete {
        DivideOutcome::NotDivisible
    } else {
        DivideOutcome::Unknown
    }
}

/// Quotient of `w` by the word `s` (`s·u ~ w`), peeling letters left to right.
pub fn divide(p: &Presentation, s: &Word, w: &Word, budget: usize) -> DivideOutcome {
    let mut cur = w.clone();
    for &l in s.letters() {
        match divide_letter(p, l, &cur, budget) {
            DivideOutcome::Quotient(q) => cur = q,
            other => return other,
        }
    }
    DivideOutcome::Quotient(cur)
}

/// First letters of the relation class of `w`, with the corresponding
/// quotients. The flag reports whether the class search was exhaustive.
pub fn leading_letters(p: &Presentation, w: &Word, budget: usize) -> (Vec<(Letter, Word)>, bool) {
    let class = tau_class(p, w, w.len() + 1, budget);
    let mut out: Vec<(Letter, Word)> = Vec::new();
    for cand in &class.words {
        if let Some(&l) = cand.letters().first() {
            if out.iter().all(|(seen, _)| *seen != l) {
                if let Ok(q) = normalize(p, &Word::from_letters(&cand.letters()[1..])) {
                    out.push((l, q));
                }
            }
        }
    }
    (out, class.complete)
}

pub type DividesVerdict = Verdict<Word, ()>;

/// Does `s` left-divide `w`? `holds` carries the cofactor `u`.
pub fn left_divides(p: &Presentation, s: &Word, w: &Word, bound: usize) -> DividesVerdict {
    let budget = bound.max(DEFAULT_DIVIDE_BUDGET);
    match divide(p, s, w, budget) {
        DivideOutcome::Quotient(u) => Verdict::Holds(u),
        DivideOutcome::NotDivisible => Verdict::Fails(()),
        DivideOutcome::Unknown => Verdict::Unknown(Exhausted::new(
            budget as u64,
            "class search exhausted while peeling the divisor",
        )),
    }
}

/// Counterexample to left cancellativity: `x·w ~ x·w'` with `w`, `w'`
/// inequivalent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CancelCounterexample {
    pub letter: Letter,
    pub w1: Word,
    pub w2: Word,
}

#[derive(Debug, Clone)]
pub struct CancelReport {
    pub radius: usize,
    pub window: Window,
    pub ball_size: usize,
    pub pairs_grouped: usize,
}

pub type CancelVerdict = Verdict<CancelReport, CancelCounterexample>;

/// Verify left cancellativity on the ball: for every letter `x` and ball
/// words `w`, `w'` with `x·w`, `x·w'` normalizing into the ball, a collision
/// of normal forms must come from equivalent words.
///
/// On a window passing local confluence the normal-form grouping is
/// exhaustive; otherwise collisions are re-checked by bounded search and a
/// clean sweep is reported as `unknown`.
pub fn check_left_cancellative(
    p: &Presentation,
    radius: usize,
    window: Window,
    bound: usize,
) -> CancelVerdict {
    let ball = Ball::enumerate(p, radius, window);
    check_left_cancellative_on(p, &ball, bound)
}

pub fn check_left_cancellative_on(p: &Presentation, ball: &Ball, bound: usize) -> CancelVerdict {
    let window = ball.window;
    let margin = Window::new(window.lo - 2, window.hi + 2);
    let pairs = critical_pairs(p, margin);
    let joinable = pairs
        .iter()
        .all(|(u, v)| matches!((normalize(p, u), normalize(p, v)), (Ok(a), Ok(b)) if a == b));

    let letters = p.letters_in(window);
    #[derive(Default)]
    struct LetterScan {
        counterexample: Option<CancelCounterexample>,
        unknowns: usize,
        grouped: usize,
    }

    let scans: Vec<LetterScan> = letters
        .par_iter()
        .map(|&l| {
            let mut seen: HashMap<Word, u32> = HashMap::new();
            let mut scan = LetterScan::default();
            for (i, w) in ball.words.iter().enumerate() {
                let Ok(nf) = rewrite::normalized_product(p, &Word::single(l), w) else {
                    scan.unknowns += 1;
                    continue;
                };
                if !ball.contains(&nf) {
                    continue;
                }
                scan.grouped += 1;
                match seen.get(&nf) {
                    None => {
                        seen.insert(nf, i as u32);
                    }
                    Some(&prev) => {
                        let w1 = ball.word(prev).clone();
                        let w2 = w.clone();
                        if joinable {
                            if scan.counterexample.is_none() {
                                scan.counterexample =
                                    Some(CancelCounterexample { letter: l, w1, w2 });
                            }
                        } else {
                            match rewrite::equivalent(p, &w1, &w2, bound) {
                                Verdict::Holds(_) => {}
                                Verdict::Fails(_) => {
                                    if scan.counterexample.is_none() {
                                        scan.counterexample =
                                            Some(CancelCounterexample { letter: l, w1, w2 });
                                    }
                                }
                                Verdict::Unknown(_) => scan.unknowns += 1,
                            }
                        }
                    }
                }
            }
            scan
        })
        .collect();

    let best = scans
        .iter()
        .filter_map(|s| s.counterexample.as_ref())
        .min_by(|a, b| {
            a.w2.len()
                .cmp(&b.w2.len())
                .then_with(|| a.w2.cmp(&b.w2))
                .then_with(|| a.letter.cmp(&b.letter))
        });
    if let Some(cx) = best {
        return Verdict::Fails(cx.clone());
    }
    let unknowns: usize = scans.iter().map(|s| s.unknowns).sum();
    let grouped: usize = scans.iter().map(|s| s.grouped).sum();
    if unknowns > 0 {
        return Verdict::Unknown(Exhausted::new(
            bound as u64,
            format!("{unknowns} products could not be resolved"),
        ));
    }
    if !joinable {
        return Verdict::Unknown(Exhausted::new(
            bound as u64,
            "no collision found, but the window is not locally confluent, so \
             normal-form grouping is not exhaustive",
        ));
    }
    Verdict::Holds(CancelReport {
        radius: ball.radius,
        window,
        ball_size: ball.len(),
        pairs_grouped: grouped,
    })
}
