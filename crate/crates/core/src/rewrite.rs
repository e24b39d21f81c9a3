//! The rewriting engine: normalization, bounded word equivalence, critical
//! pairs and ball enumeration.
//!
//! Rules are oriented left-to-right. Normalization repeatedly contracts the
//! leftmost redex, ties broken by rule number, so normal forms are
//! reproducible. Word equivalence is the symmetric closure of the rules; the
//! bounded search here is a semi-decision, upgraded to a definite `fails` only
//! when the instantiated system passes local confluence on the relevant index
//! window.

use crate::presentation::{IndexPattern, PatternLetter, Presentation};
use crate::verdict::{Exhausted, Verdict};
use crate::words::{Letter, Window, Word};
use serde::Serialize;
use std::collections::{HashMap, HashSet, VecDeque};
use thiserror::Error;

const NORMALIZE_STEP_BUDGET: u64 = 100_000;
const MAX_BINDS: usize = 8;

#[derive(Debug, Error)]
pub enum RewriteError {
    #[error("rule {rule} is length-increasing; orient rules so |lhs| >= |rhs|")]
    NotOriented { rule: usize },
    #[error("normalization exceeded {steps} steps (length-preserving cycle?)")]
    StepBudget { steps: u64 },
}

type Binds = [Option<i16>; MAX_BINDS];

fn match_pattern(pats: &[PatternLetter], letters: &[Letter], binds: &mut Binds) -> bool {
    for (pl, l) in pats.iter().zip(letters) {
        if pl.symbol != l.symbol {
            return false;
        }
        match (pl.index, l.index) {
            (None, None) => {}
            (Some(IndexPattern::Const(c)), Some(n)) => {
                if c != n {
                    return false;
                }
            }
            (Some(IndexPattern::Var { var, offset }), Some(n)) => {
                let want = n - offset;
                match binds[var as usize] {
                    Some(v) if v != want => return false,
                    Some(_) => {}
                    None => binds[var as usize] = Some(want),
                }
            }
            _ => return false,
        }
    }
    true
}

fn instantiate(pats: &[PatternLetter], binds: &Binds) -> Word {
    let mut out = Word::empty();
    for pl in pats {
        let letter = match pl.index {
            None => Letter::plain(pl.symbol),
            Some(IndexPattern::Const(c)) => Letter::indexed(pl.symbol, c),
            Some(IndexPattern::Var { var, offset }) => {
                let base = binds[var as usize].expect("unbound variable at instantiation");
                Letter::indexed(pl.symbol, base + offset)
            }
        };
        out.push(letter);
    }
    out
}

fn splice(w: &Word, pos: usize, cut: usize, replacement: &Word) -> Word {
    let mut out = Word::empty();
    out.0.extend_from_slice(&w.letters()[..pos]);
    out.0.extend_from_slice(replacement.letters());
    out.0.extend_from_slice(&w.letters()[pos + cut..]);
    out
}

/// Leftmost redex, ties broken by rule order.
fn find_redex(p: &Presentation, w: &Word, from: usize) -> Option<(usize, usize, Binds)> {
    let letters = w.letters();
    for pos in from..letters.len() {
        for (ri, rule) in p.rules.iter().enumerate() {
            if pos + rule.lhs.len() > letters.len() {
                continue;
            }
            let mut binds: Binds = Default::default();
            if match_pattern(&rule.lhs, &letters[pos..pos + rule.lhs.len()], &mut binds) {
                return Some((pos, ri, binds));
            }
        }
    }
    None
}

fn check_oriented(p: &Presentation) -> Result<(), RewriteError> {
    for (i, rule) in p.rules.iter().enumerate() {
        if rule.lhs.len() < rule.rhs.len() {
            return Err(RewriteError::NotOriented { rule: i });
        }
    }
    Ok(())
}

/// Normal form of `w` under the deterministic strategy.
pub fn normalize(p: &Presentation, w: &Word) -> Result<Word, RewriteError> {
    check_oriented(p)?;
    let mut cur = w.clone();
    let mut from = 0usize;
    let mut steps = 0u64;
    let max_lhs = p.rules.iter().map(|r| r.lhs.len()).max().unwrap_or(1);
    while let Some((pos, ri, binds)) = find_redex(p, &cur, from) {
        steps += 1;
        if steps > NORMALIZE_STEP_BUDGET {
            return Err(RewriteError::StepBudget { steps });
        }
        let rule = &p.rules[ri];
        let rhs = instantiate(&rule.rhs, &binds);
        cur = splice(&cur, pos, rule.lhs.len(), &rhs);
        // letters left of pos are untouched, so no redex can start more than
        // max_lhs-1 positions before it
        from = pos.saturating_sub(max_lhs - 1);
    }
    Ok(cur)
}

/// Normal form together with the full rewrite path (`w` first, normal form last).
pub fn normalize_path(p: &Presentation, w: &Word) -> Result<Vec<Word>, RewriteError> {
    check_oriented(p)?;
    let mut path = vec![w.clone()];
    let mut steps = 0u64;
    loop {
        let cur = path.last().unwrap();
        match find_redex(p, cur, 0) {
            None => return Ok(path),
            Some((pos, ri, binds)) => {
                steps += 1;
                if steps > NORMALIZE_STEP_BUDGET {
                    return Err(RewriteError::StepBudget { steps });
                }
                let rule = &p.rules[ri];
                let rhs = instantiate(&rule.rhs, &binds);
                let next = splice(cur, pos, rule.lhs.len(), &rhs);
                path.push(next);
            }
        }
    }
}

pub fn is_normal_form(p: &Presentation, w: &Word) -> bool {
    find_redex(p, w, 0).is_none()
}

/// Candidate indices for instantiating a variable that occurs only on the lhs
/// of a rule during a backward step: indices present in the word, 0, and their
/// unit shifts.
fn free_index_candidates(w: &Word) -> Vec<i16> {
    let mut set: HashSet<i16> = HashSet::new();
    set.insert(0);
    for l in w.letters() {
        if let Some(n) = l.index {
            set.insert(n);
            set.insert(n + 1);
            set.insert(n - 1);
        }
    }
    let mut out: Vec<i16> = set.into_iter().collect();
    out.sort_unstable();
    out
}

/// All words reachable from `w` by one relation step, in either direction,
/// subject to a length cap.
pub fn tau_neighbors(p: &Presentation, w: &Word, len_cap: usize) -> Vec<Word> {
    let mut out = Vec::new();
    let letters = w.letters();
    for rule in &p.rules {
        // forward: lhs -> rhs
        if rule.lhs.len() <= letters.len() {
            for pos in 0..=letters.len() - rule.lhs.len() {
                let mut binds: Binds = Default::default();
                if match_pattern(&rule.lhs, &letters[pos..pos + rule.lhs.len()], &mut binds) {
                    let nxt = splice(w, pos, rule.lhs.len(), &instantiate(&rule.rhs, &binds));
                    if nxt.len() <= len_cap {
                        out.push(nxt);
                    }
                }
            }
        }
        // backward: rhs -> lhs
        if letters.len() >= rule.rhs.len()
            && letters.len() - rule.rhs.len() + rule.lhs.len() <= len_cap
        {
            let free_vars: Vec<u8> = (0..rule.n_vars() as u8)
                .filter(|v| {
                    !rule.rhs.iter().any(|pl| {
                        matches!(pl.index, Some(IndexPattern::Var { var, .. }) if var == *v)
                    })
                })
                .collect();
            let candidates = if free_vars.is_empty() { Vec::new() } else { free_index_candidates(w) };
            for pos in 0..=letters.len() - rule.rhs.len() {
                let mut binds: Binds = Default::default();
                if !match_pattern(&rule.rhs, &letters[pos..pos + rule.rhs.len()], &mut binds) {
                    continue;
                }
                expand_free_vars(&free_vars, &candidates, binds, &mut |binds| {
                    out.push(splice(w, pos, rule.rhs.len(), &instantiate(&rule.lhs, binds)));
                });
            }
        }
    }
    out
}

fn expand_free_vars(
    free_vars: &[u8],
    candidates: &[i16],
    binds: Binds,
    emit: &mut dyn FnMut(&Binds),
) {
    match free_vars.split_first() {
        None => emit(&binds),
        Some((&v, rest)) => {
            for &c in candidates {
                let mut b = binds;
                b[v as usize] = Some(c);
                expand_free_vars(rest, candidates, b, emit);
            }
        }
    }
}

/// The set of words related to `w`, explored up to `len_cap`.
pub struct TauClass {
    pub words: Vec<Word>,
    pub complete: bool,
}

pub fn tau_class(p: &Presentation, w: &Word, len_cap: usize, node_budget: usize) -> TauClass {
    let mut seen: HashSet<Word> = HashSet::new();
    let mut queue: VecDeque<Word> = VecDeque::new();
    seen.insert(w.clone());
    queue.push_back(w.clone());
    let mut complete = true;
    let mut expanded = 0usize;
    while let Some(cur) = queue.pop_front() {
        expanded += 1;
        if expanded > node_budget {
            complete = false;
            break;
        }
        for nxt in tau_neighbors(p, &cur, len_cap) {
            if seen.insert(nxt.clone()) {
                queue.push_back(nxt);
            }
        }
    }
    let mut words: Vec<Word> = seen.into_iter().collect();
    words.sort();
    TauClass { words, complete }
}

/// Evidence backing a `fails` answer from [`equivalent`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InequivalenceEvidence {
    pub nf1: Word,
    pub nf2: Word,
    pub confluence_window: Window,
    pub critical_pairs_checked: usize,
}

pub type EquivVerdict = Verdict<Vec<Word>, InequivalenceEvidence>;

/// Bounded word-problem query. `holds` carries a relation chain from `w1` to
/// `w2`; `fails` is issued only after the instantiated system passed local
/// confluence on the index window spanned by the query.
pub fn equivalent(p: &Presentation, w1: &Word, w2: &Word, bound: usize) -> EquivVerdict {
    if w1 == w2 {
        return Verdict::Holds(vec![w1.clone()]);
    }
    let len_cap = bound.max(w1.len()).max(w2.len());
    let node_budget = 20_000 + 4_000 * bound;

    // breadth-first over single relation steps
    let mut parents: HashMap<Word, Word> = HashMap::new();
    let mut depth: HashMap<Word, usize> = HashMap::new();
    let mut queue: VecDeque<Word> = VecDeque::new();
    depth.insert(w1.clone(), 0);
    queue.push_back(w1.clone());
    let mut expanded = 0usize;
    let mut exhausted_budget = false;
    while let Some(cur) = queue.pop_front() {
        let d = depth[&cur];
        if d >= bound {
            continue;
        }
        expanded += 1;
        if expanded > node_budget {
            exhausted_budget = true;
            break;
        }
        for nxt in tau_neighbors(p, &cur, len_cap) {
            if depth.contains_key(&nxt) {
                continue;
            }
            depth.insert(nxt.clone(), d + 1);
            parents.insert(nxt.clone(), cur.clone());
            if &nxt == w2 {
                let mut chain = vec![nxt.clone()];
                let mut back = nxt;
                while let Some(prev) = parents.get(&back) {
                    chain.push(prev.clone());
                    back = prev.clone();
                }
                chain.reverse();
                return Verdict::Holds(chain);
            }
            queue.push_back(nxt);
        }
    }

    let (path1, path2) = match (normalize_path(p, w1), normalize_path(p, w2)) {
        (Ok(a), Ok(b)) => (a, b),
        _ => {
            return Verdict::Unknown(Exhausted::new(
                bound as u64,
                "normalization budget exceeded while reducing the query words",
            ))
        }
    };
    if path1.last() == path2.last() {
        let mut chain = path1;
        chain.extend(path2.into_iter().rev().skip(1));
        return Verdict::Holds(chain);
    }

    // distinct normal forms refute equivalence only on a locally confluent window
    let nf1 = path1.last().unwrap().clone();
    let nf2 = path2.last().unwrap().clone();
    let window = spanned_window(&[w1, w2, &nf1, &nf2]);
    let pairs = critical_pairs(p, window);
    let joinable = pairs
        .iter()
        .all(|(u, v)| matches!((normalize(p, u), normalize(p, v)), (Ok(a), Ok(b)) if a == b));
    let _ = exhausted_budget; // normal forms are canonical on a confluent window
    if joinable {
        Verdict::Fails(InequivalenceEvidence {
            nf1,
            nf2,
            confluence_window: window,
            critical_pairs_checked: pairs.len(),
        })
    } else {
        Verdict::Unknown(Exhausted::new(
            bound as u64,
            "normal forms differ but local confluence is unverified on the query window",
        ))
    }
}

/// Smallest window covering all indices of the given words, widened by the
/// per-step shift margin.
fn spanned_window(words: &[&Word]) -> Window {
    let mut lo = 0i16;
    let mut hi = 0i16;
    for w in words {
        for l in w.letters() {
            if let Some(n) = l.index {
                lo = lo.min(n);
                hi = hi.max(n);
            }
        }
    }
    Window::new(lo - 2, hi + 2)
}

/// Verify that `seq` is a valid relation chain: consecutive words differ by a
/// single rule application in either direction. Used as an independent
/// certificate checker.
pub fn check_tau_sequence(p: &Presentation, seq: &[Word]) -> bool {
    if seq.is_empty() {
        return false;
    }
    seq.windows(2).all(|pair| {
        let cap = pair[0].len().max(pair[1].len());
        tau_neighbors(p, &pair[0], cap).contains(&pair[1])
    })
}

fn assignments(n_vars: usize, window: Window) -> Vec<Binds> {
    let mut out: Vec<Binds> = vec![Default::default()];
    for v in 0..n_vars {
        let mut next = Vec::with_capacity(out.len() * window.width());
        for b in &out {
            for n in window.indices() {
                let mut nb = *b;
                nb[v] = Some(n);
                next.push(nb);
            }
        }
        out = next;
    }
    out
}

/// All overlap-induced peaks `(u, v)` with index variables instantiated in
/// `window`: one word rewrites in one step to both `u` and `v` via
/// overlapping redexes.
pub fn critical_pairs(p: &Presentation, window: Window) -> Vec<(Word, Word)> {
    let mut out: Vec<(Word, Word)> = Vec::new();
    let mut seen: HashSet<(Word, Word)> = HashSet::new();
    let mut push = |u: Word, v: Word| {
        if u == v {
            return;
        }
        let key = if u <= v { (u.clone(), v.clone()) } else { (v.clone(), u.clone()) };
        if seen.insert(key) {
            out.push((u, v));
        }
    };

    for (i1, r1) in p.rules.iter().enumerate() {
        for binds1 in assignments(r1.n_vars(), window) {
            let l1 = instantiate(&r1.lhs, &binds1);
            let rhs1 = instantiate(&r1.rhs, &binds1);
            for (i2, r2) in p.rules.iter().enumerate() {
                // proper overlap: a suffix of l1 is a prefix of an instance of r2.lhs
                for s in 1..l1.len() {
                    let k = l1.len() - s;
                    if k >= r2.lhs.len() {
                        continue;
                    }
                    let mut binds2: Binds = Default::default();
                    if !match_pattern(&r2.lhs[..k], &l1.letters()[s..], &mut binds2) {
                        continue;
                    }
                    let unbound: Vec<u8> = (0..r2.n_vars() as u8)
                        .filter(|&v| binds2[v as usize].is_none())
                        .collect();
                    let candidates: Vec<i16> = window.indices().collect();
                    expand_free_vars(&unbound, &candidates, binds2, &mut |b| {
                        let tail = instantiate(&r2.lhs[k..], b);
                        // u: rewrite superposition by r1 at 0; v: by r2 at s
                        let u = rhs1.concat(&tail);
                        let mut v = Word::from_letters(&l1.letters()[..s]);
                        v = v.concat(&instantiate(&r2.rhs, b));
                        push(u.clone(), v);
                    });
                }
                // containment: an instance of r2.lhs sits inside l1
                if r2.lhs.len() <= l1.len() {
                    for pos in 0..=l1.len() - r2.lhs.len() {
                        if i1 == i2 && pos == 0 {
                            continue; // same rule, same redex
                        }
                        let mut binds2: Binds = Default::default();
                        if !match_pattern(
                            &r2.lhs,
                            &l1.letters()[pos..pos + r2.lhs.len()],
                            &mut binds2,
                        ) {
                            continue;
                        }
                        let u = rhs1.clone();
                        let v = splice(&l1, pos, r2.lhs.len(), &instantiate(&r2.rhs, &binds2));
                        push(u, v);
                    }
                }
            }
        }
    }
    out
}

/// The finite truncation every bounded check works on: all normal forms of
/// length at most `radius` whose family indices lie in `window`, in shortlex
/// order.
#[derive(Debug, Clone, Serialize)]
pub struct Ball {
    pub radius_requested: usize,
    /// Largest length level that was enumerated completely.
    pub radius: usize,
    pub window: Window,
    pub truncated: bool,
    #[serde(skip)]
    pub words: Vec<Word>,
    /// `counts[k]` = number of ball words of length at most `k`.
    #[serde(skip)]
    counts: Vec<usize>,
}

pub const DEFAULT_BALL_CAP: usize = 2_000_000;

impl Ball {
    pub fn enumerate(p: &Presentation, radius: usize, window: Window) -> Ball {
        Ball::enumerate_capped(p, radius, window, DEFAULT_BALL_CAP)
    }

    /// Enumerate level by level, stopping before any level that would push the
    /// total beyond `cap`. The effective `radius` is always a complete ball.
    pub fn enumerate_capped(p: &Presentation, radius: usize, window: Window, cap: usize) -> Ball {
        let letters = p.letters_in(window);
        let mut words: Vec<Word> = vec![Word::empty()];
        let mut counts: Vec<usize> = vec![1];
        let mut level: Vec<Word> = vec![Word::empty()];
        let mut effective = 0usize;
        let mut truncated = false;
        for _r in 1..=radius {
            let mut next: Vec<Word> = Vec::new();
            let mut overflow = false;
            'level: for w in &level {
                for &l in &letters {
                    if extension_is_normal(p, w, l) {
                        if words.len() + next.len() >= cap {
                            overflow = true;
                            break 'level;
                        }
                        next.push(w.appended(l));
                    }
                }
            }
            if overflow {
                truncated = true;
                break;
            }
            words.extend(next.iter().cloned());
            counts.push(words.len());
            level = next;
            effective = _r;
        }
        Ball {
            radius_requested: radius,
            radius: effective,
            window,
            truncated,
            words,
            counts,
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn word(&self, i: u32) -> &Word {
        &self.words[i as usize]
    }

    pub fn index_of(&self, w: &Word) -> Option<u32> {
        self.words.binary_search_by(|probe| probe.cmp(w)).ok().map(|i| i as u32)
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.index_of(w).is_some()
    }

    /// Number of ball words of length at most `max_len`.
    pub fn prefix_len(&self, max_len: usize) -> usize {
        match self.counts.get(max_len) {
            Some(&c) => c,
            None => self.words.len(),
        }
    }

    /// Indices of words trusted for operator evaluation at zigzag depth `d`:
    /// short enough that products of `d` generators stay inside the ball, and
    /// far enough from the index boundary that unit shifts stay in the window.
    pub fn interior_indices(&self, depth: usize) -> Vec<u32> {
        let max_len = self.radius.saturating_sub(depth);
        let win = self.window.shrunk(depth as i16);
        let Some(win) = win else { return Vec::new() };
        (0..self.words.len() as u32)
            .filter(|&i| {
                let w = &self.words[i as usize];
                w.len() <= max_len && w.indices_in(win)
            })
            .collect()
    }
}

fn extension_is_normal(p: &Presentation, w: &Word, l: Letter) -> bool {
    // w is already a normal form, so a redex in w·l must cover the new letter
    let new_len = w.len() + 1;
    for rule in &p.rules {
        if rule.lhs.len() > new_len {
            continue;
        }
        let pos = new_len - rule.lhs.len();
        let mut binds: Binds = Default::default();
        let head = &w.letters()[pos..];
        if pos + rule.lhs.len() == new_len {
            // match against w[pos..] + l
            if head.len() + 1 != rule.lhs.len() {
                continue;
            }
            if match_pattern(&rule.lhs[..head.len()], head, &mut binds)
                && match_pattern(&rule.lhs[head.len()..], &[l], &mut binds)
            {
                return false;
            }
        }
    }
    true
}

/// Multiply on the right by a letter and normalize.
pub fn normalized_extension(p: &Presentation, w: &Word, l: Letter) -> Result<Word, RewriteError> {
    normalize(p, &w.appended(l))
}

/// Multiply two words and normalize.
pub fn normalized_product(p: &Presentation, u: &Word, v: &Word) -> Result<Word, RewriteError> {
    normalize(p, &u.concat(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::Presentation;

    pub const S_PRES: &str = "\
letters: a, b, x[n], y[n]
rules:
  a b x[n] -> b x[n]
  a b y[n] -> b y[n+1]
";

    pub const T_PRES: &str = "\
letters: a, b, c, x[n], y[n]
rules:
  a b x[n] -> b x[n]
  a b y[n] -> b y[n+1]
  c b x[n] -> b x[n+1]
  c b y[n] -> b y[n]
";

    fn s() -> Presentation {
        Presentation::parse(S_PRES).unwrap()
    }

    fn t() -> Presentation {
        Presentation::parse(T_PRES).unwrap()
    }

    fn w(p: &Presentation, text: &str) -> Word {
        p.parse_word(text).unwrap()
    }

    #[test]
    fn normalize_contracts_prefix_rules() {
        let p = s();
        assert_eq!(normalize(&p, &w(&p, "a b x[0]")).unwrap(), w(&p, "b x[0]"));
        assert_eq!(normalize(&p, &w(&p, "a a b y[0]")).unwrap(), w(&p, "b y[2]"));
        assert_eq!(normalize(&p, &w(&p, "e")).unwrap(), Word::empty());
        assert_eq!(normalize(&p, &w(&p, "b a")).unwrap(), w(&p, "b a"));
    }

    #[test]
    fn normalize_in_t_shifts_x() {
        let p = t();
        assert_eq!(normalize(&p, &w(&p, "c b x[0]")).unwrap(), w(&p, "b x[1]"));
        assert_eq!(normalize(&p, &w(&p, "c b y[5]")).unwrap(), w(&p, "b y[5]"));
        assert_eq!(normalize(&p, &w(&p, "a c b x[0]")).unwrap(), w(&p, "b x[1]"));
    }

    #[test]
    fn normalize_is_idempotent_on_samples() {
        let p = s();
        for text in ["a a b y[1]", "b x[0] a b y[0]", "y[2] a b x[1] b"] {
            let nf = normalize(&p, &w(&p, text)).unwrap();
            assert_eq!(normalize(&p, &nf).unwrap(), nf);
            assert!(is_normal_form(&p, &nf));
        }
    }

    #[test]
    fn equivalent_finds_chains() {
        let p = s();
        let v = equivalent(&p, &w(&p, "b x[5]"), &w(&p, "a b x[5]"), 6);
        let chain = v.holds().expect("equivalent").clone();
        assert!(check_tau_sequence(&p, &chain));
        assert_eq!(chain.first().unwrap(), &w(&p, "b x[5]"));
        assert_eq!(chain.last().unwrap(), &w(&p, "a b x[5]"));

        let refl = equivalent(&p, &w(&p, "a"), &w(&p, "a"), 0);
        assert!(refl.is_holds());
    }

    #[test]
    fn equivalent_refutes_on_confluent_window() {
        let p = s();
        let v = equivalent(&p, &w(&p, "x[0]"), &w(&p, "y[0]"), 6);
        assert!(v.is_fails(), "{v:?}");
    }

    #[test]
    fn critical_pairs_empty_for_shipped_presentations() {
        assert!(critical_pairs(&s(), Window::symmetric(2)).is_empty());
        assert!(critical_pairs(&t(), Window::symmetric(2)).is_empty());
    }

    #[test]
    fn critical_pairs_empty_for_single_nonoverlapping_rule() {
        let p = Presentation::parse("letters: a, b\nrules:\n  a b -> b\n").unwrap();
        assert!(critical_pairs(&p, Window::symmetric(1)).is_empty());
    }

    #[test]
    fn critical_pairs_detect_nonconfluent_overlap() {
        let p = Presentation::parse("letters: a, b\nrules:\n  a b a -> b\n").unwrap();
        let pairs = critical_pairs(&p, Window::symmetric(1));
        assert!(!pairs.is_empty());
        let joinable = pairs
            .iter()
            .all(|(u, v)| normalize(&p, u).unwrap() == normalize(&p, v).unwrap());
        assert!(!joinable, "aba -> b overlaps itself non-confluently");
    }

    #[test]
    fn ball_radius_one() {
        let p = s();
        let ball = Ball::enumerate(&p, 1, Window::new(0, 0));
        let words: Vec<String> = ball.words.iter().map(|w| p.display_word(w)).collect();
        assert_eq!(words, vec!["e", "a", "b", "x[0]", "y[0]"]);
        assert_eq!(ball.radius, 1);
        assert!(!ball.truncated);
    }

    #[test]
    fn ball_excludes_redexes() {
        let p = s();
        let ball = Ball::enumerate(&p, 3, Window::new(0, 0));
        assert!(ball.contains(&w(&p, "a b")));
        assert!(ball.contains(&w(&p, "b x[0]")));
        assert!(!ball.contains(&w(&p, "a b x[0]")));
        assert!(!ball.contains(&w(&p, "a b y[0]")));
        for word in &ball.words {
            assert!(is_normal_form(&p, word));
            assert!(word.indices_in(ball.window));
        }
    }

    #[test]
    fn ball_radius_zero() {
        let p = s();
        let ball = Ball::enumerate(&p, 0, Window::symmetric(1));
        assert_eq!(ball.words, vec![Word::empty()]);
    }

    #[test]
    fn ball_cap_reports_effective_radius() {
        let p = s();
        let full = Ball::enumerate(&p, 3, Window::new(0, 0));
        let capped = Ball::enumerate_capped(&p, 3, Window::new(0, 0), full.prefix_len(2) + 1);
        assert!(capped.truncated);
        assert_eq!(capped.radius, 2);
        assert!(capped.words.iter().all(|w| w.len() <= 2));
    }

    #[test]
    fn interior_shrinks_length_and_window() {
        let p = s();
        let ball = Ball::enumerate(&p, 3, Window::symmetric(2));
        let interior = ball.interior_indices(1);
        for i in interior {
            let word = ball.word(i);
            assert!(word.len() <= 2);
            assert!(word.indices_in(Window::symmetric(1)));
        }
    }

    #[test]
    fn shift_equivariance_on_samples() {
        let p = s();
        for text in ["a a b y[0]", "a b x[1] y[0]", "b a b y[-1]"] {
            let word = w(&p, text);
            let lhs = normalize(&p, &word.shifted(1)).unwrap();
            let rhs = normalize(&p, &word).unwrap().shifted(1);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn tau_class_of_family_words_is_small_and_complete() {
        let p = s();
        let c = tau_class(&p, &w(&p, "b y[3]"), 3, 10_000);
        assert!(c.complete);
        assert!(c.words.contains(&w(&p, "a b y[2]")));
        assert!(c.words.contains(&w(&p, "b y[3]")));
        assert_eq!(c.words.len(), 2);
    }
}
