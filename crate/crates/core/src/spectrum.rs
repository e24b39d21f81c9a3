//! Semi-characters on the tracked ideal semilattice: point characters,
//! membership in the closure of the point-character orbit, and limit
//! characters of indexed word sequences.
//!
//! A semi-character is a filter: multiplicative, upward closed, 1 on the full
//! ideal. Everything is relative to a closure's tracked list; reports carry
//! the tracked-list hash.

use crate::ideals::{
    global_cover_check, membership, Closure, CoverOutcome, IdealExpr,
};
use crate::presentation::Presentation;
use crate::rewrite::normalize;
use crate::verdict::{Exhausted, Verdict};
use crate::words::{Letter, SymbolId, Word};
use serde::Serialize;

/// Values over the tracked representatives; `None` is a flagged bit from an
/// unresolved membership.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemiCharacter {
    pub values: Vec<Option<bool>>,
    pub tracked_hash: u64,
}

impl SemiCharacter {
    pub fn ones(&self) -> Vec<u32> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v == Some(true))
            .map(|(i, _)| i as u32)
            .collect()
    }

    pub fn get(&self, i: u32) -> Option<bool> {
        self.values[i as usize]
    }
}

/// The point character of a ball normal form: bit per tracked ideal.
pub fn chi_of(closure: &Closure, s: &Word) -> Option<SemiCharacter> {
    let pos = closure.ball.index_of(s)? as usize;
    let values = closure
        .reps
        .iter()
        .map(|r| {
            if r.unknown.get(pos) {
                None
            } else {
                Some(r.fingerprint.get(pos))
            }
        })
        .collect();
    Some(SemiCharacter { values, tracked_hash: closure.tracked_hash() })
}

/// Filter laws over the tracked pairs: multiplicativity through the
/// intersection table and upward closure on fingerprints.
pub fn violates_filter_laws(closure: &Closure, chi: &SemiCharacter) -> Option<String> {
    let n = closure.reps.len();
    if let Some(full) = closure
        .reps
        .iter()
        .position(|r| matches!(r.expr, IdealExpr::Full))
    {
        if chi.values[full] == Some(false) {
            return Some("character vanishes on the full ideal".into());
        }
    }
    for i in 0..n {
        for j in 0..n {
            let (Some(a), Some(b)) = (chi.values[i], chi.values[j]) else { continue };
            if let Some(k) = closure.table[i][j] {
                if let Some(c) = chi.values[k as usize] {
                    if (a && b) != c {
                        return Some(format!(
                            "multiplicativity fails at pair ({i}, {j}) -> {k}"
                        ));
                    }
                }
            }
            if a
                && !b
                && closure.reps[i]
                    .fingerprint
                    .is_subset_of(&closure.reps[j].fingerprint)
            {
                return Some(format!("upward closure fails: {i} <= {j}"));
            }
        }
    }
    None
}

/// A verified cover relation among tracked ideals: `reps[target]` equals the
/// union of `reps[i]` for `i` in `parts`, globally.
#[derive(Debug, Clone, Serialize)]
pub struct CoverRelation {
    pub target: u32,
    pub parts: Vec<u32>,
}

/// Search the tracked list for global cover relations. For each target the
/// candidates are the strictly smaller tracked ideals; a greedy pass over the
/// ball trace proposes a finite union, which is then certified globally. The
/// result is a (possibly empty) sample of the cover relations that exist.
pub fn enumerate_covers(p: &Presentation, closure: &Closure, max_parts: usize) -> Vec<CoverRelation> {
    let mut out = Vec::new();
    for (t, target) in closure.reps.iter().enumerate() {
        if target.fingerprint.is_zero() || !target.unknown.is_zero() {
            continue;
        }
        let mut candidates: Vec<u32> = (0..closure.reps.len() as u32)
            .filter(|&j| {
                let r = &closure.reps[j as usize];
                j as usize != t
                    && !r.fingerprint.is_zero()
                    && r.fingerprint.is_subset_of(&target.fingerprint)
                    && r.fingerprint != target.fingerprint
            })
            .collect();
        candidates.sort_by_key(|&j| {
            std::cmp::Reverse(closure.reps[j as usize].fingerprint.count_ones())
        });
        let mut chosen: Vec<u32> = Vec::new();
        let mut covered = crate::ideals::Fingerprint::zeros(target.fingerprint.len());
        for &j in &candidates {
            if chosen.len() >= max_parts {
                break;
            }
            let fp = &closure.reps[j as usize].fingerprint;
            if fp.is_subset_of(&covered) {
                continue;
            }
            covered = covered.or(fp);
            chosen.push(j);
            if covered == target.fingerprint {
                break;
            }
        }
        if covered != target.fingerprint || chosen.is_empty() {
            continue;
        }
        let parts: Vec<IdealExpr> = chosen
            .iter()
            .map(|&j| closure.reps[j as usize].expr.clone())
            .collect();
        if let CoverOutcome::Covered { .. } = global_cover_check(
            p,
            closure.ball.window,
            &target.expr,
            &[],
            &parts,
            closure.div_budget,
        ) {
            let mut parts = chosen;
            parts.sort_unstable();
            out.push(CoverRelation { target: t as u32, parts });
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct OmegaFailure {
    pub reason: String,
    pub target: Option<u32>,
}

pub type OmegaVerdict = Verdict<usize, OmegaFailure>;

/// Conditions for lying in the closure of the point-character orbit, relative
/// to the supplied cover list: the character kills the empty ideal, and for
/// every cover it is 1 on some part whenever it is 1 on the target. `holds`
/// carries the number of cover relations checked.
pub fn is_in_omega(
    closure: &Closure,
    chi: &SemiCharacter,
    covers: &[CoverRelation],
) -> OmegaVerdict {
    if let Some(empty) = closure
        .reps
        .iter()
        .position(|r| r.fingerprint.is_zero() && r.unknown.is_zero())
    {
        match chi.values[empty] {
            Some(true) => {
                return Verdict::Fails(OmegaFailure {
                    reason: "character is 1 on the empty ideal".into(),
                    target: Some(empty as u32),
                })
            }
            Some(false) => {}
            None => {
                return Verdict::Unknown(Exhausted::new(0, "empty-ideal bit unresolved"))
            }
        }
    }
    for cover in covers {
        match chi.values[cover.target as usize] {
            Some(true) => {
                let mut any = false;
                let mut unknown = false;
                for &j in &cover.parts {
                    match chi.values[j as usize] {
                        Some(true) => {
                            any = true;
                            break;
                        }
                        Some(false) => {}
                        None => unknown = true,
                    }
                }
                if !any {
                    if unknown {
                        return Verdict::Unknown(Exhausted::new(0, "cover part bit unresolved"));
                    }
                    return Verdict::Fails(OmegaFailure {
                        reason: "cover condition violated: 1 on a union, 0 on every part"
                            .into(),
                        target: Some(cover.target),
                    });
                }
            }
            Some(false) => {}
            None => return Verdict::Unknown(Exhausted::new(0, "cover target bit unresolved")),
        }
    }
    Verdict::Holds(covers.len())
}

/// An indexed word family like `b x[n]`: at most one symbolic index slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeqSpec {
    items: Vec<SeqItem>,
    source: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum SeqItem {
    Concrete(Letter),
    Var { symbol: SymbolId, offset: i16 },
}

impl SeqSpec {
    pub fn parse(p: &Presentation, text: &str) -> Result<SeqSpec, String> {
        let mut items = Vec::new();
        let mut var_name: Option<String> = None;
        for token in text.split_whitespace() {
            let open = token.find('[');
            match open {
                None => items.push(SeqItem::Concrete(p.parse_letter(token)?)),
                Some(pos) => {
                    let name = &token[..pos];
                    let inner = token
                        .strip_suffix(']')
                        .map(|t| &t[pos + 1..])
                        .ok_or_else(|| format!("missing `]` in `{token}`"))?;
                    let id = p
                        .symbol(name)
                        .ok_or_else(|| format!("undeclared symbol `{name}`"))?;
                    if !p.is_indexed(id) {
                        return Err(format!("`{name}` is not an indexed family"));
                    }
                    if let Ok(c) = inner.parse::<i16>() {
                        items.push(SeqItem::Concrete(Letter::indexed(id, c)));
                        continue;
                    }
                    let (v, offset) = split_var_offset(inner)?;
                    match &var_name {
                        None => var_name = Some(v.to_string()),
                        Some(seen) if seen == v => {}
                        Some(seen) => {
                            return Err(format!(
                                "sequence uses two index variables `{seen}` and `{v}`"
                            ))
                        }
                    }
                    items.push(SeqItem::Var { symbol: id, offset });
                }
            }
        }
        if !items.iter().any(|i| matches!(i, SeqItem::Var { .. })) {
            return Err("sequence needs an indexed slot like x[n]".into());
        }
        Ok(SeqSpec { items, source: text.trim().to_string() })
    }

    /// Constant-family view of a word (used for constant-sequence queries).
    pub fn constant(p: &Presentation, w: &Word) -> SeqSpec {
        SeqSpec {
            items: w.letters().iter().map(|&l| SeqItem::Concrete(l)).collect(),
            source: p.display_word(w),
        }
    }

    pub fn instantiate(&self, p: &Presentation, n: i16) -> Result<Word, String> {
        let mut w = Word::empty();
        for item in &self.items {
            match item {
                SeqItem::Concrete(l) => w.push(*l),
                SeqItem::Var { symbol, offset } => {
                    w.push(Letter::indexed(*symbol, n + offset))
                }
            }
        }
        normalize(p, &w).map_err(|e| e.to_string())
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

fn split_var_offset(expr: &str) -> Result<(&str, i16), String> {
    if let Some(plus) = expr.find('+') {
        let off: i16 = expr[plus + 1..]
            .trim()
            .parse()
            .map_err(|_| format!("bad offset in `{expr}`"))?;
        Ok((expr[..plus].trim(), off))
    } else if let Some(minus) = expr.rfind('-') {
        if minus == 0 {
            return Err(format!("bad index expression `{expr}`"));
        }
        let off: i16 = expr[minus + 1..]
            .trim()
            .parse()
            .map_err(|_| format!("bad offset in `{expr}`"))?;
        Ok((expr[..minus].trim(), -off))
    } else {
        Ok((expr.trim(), 0))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DivergenceReport {
    /// Tracked indices whose bit does not stabilize on the tails.
    pub oscillating: Vec<u32>,
    /// Tail samples that could not be instantiated or resolved.
    pub escaped: Vec<String>,
}

/// Limit of the point characters of `seq(n)` as `n` runs to both ends.
///
/// A tracked ideal rooted at an in-window index spikes exactly there, so the
/// tails are sampled *beyond* the window, out of interaction range, where
/// membership is computed symbolically and is provably constant for
/// shift-invariant schemas. The observed constancy is still checked;
/// `tail_len` defaults to one third of the window width, rounded up.
pub fn limit_character(
    p: &Presentation,
    closure: &Closure,
    seq: &SeqSpec,
    tail_len: Option<usize>,
) -> Result<SemiCharacter, DivergenceReport> {
    let window = closure.ball.window;
    let tail = tail_len.unwrap_or_else(|| window.width().div_ceil(3)).max(2);
    let margin = 2 * (window.width() as i16) + 8;
    let left_ns: Vec<i16> = (0..tail as i16).map(|i| window.lo - margin - i).collect();
    let right_ns: Vec<i16> = (0..tail as i16).map(|i| window.hi + margin + i).collect();

    let mut escaped: Vec<String> = Vec::new();
    let mut sample = |n: i16| -> Option<Word> {
        match seq.instantiate(p, n) {
            Ok(w) => Some(w),
            Err(e) => {
                escaped.push(format!("n={n}: {e}"));
                None
            }
        }
    };
    let left_words: Vec<Option<Word>> = left_ns.iter().map(|&n| sample(n)).collect();
    let right_words: Vec<Option<Word>> = right_ns.iter().map(|&n| sample(n)).collect();

    let mut oscillating: Vec<u32> = Vec::new();
    let mut values: Vec<Option<bool>> = Vec::with_capacity(closure.reps.len());
    for (ri, rep) in closure.reps.iter().enumerate() {
        let side = |words: &[Option<Word>]| -> Option<bool> {
            let mut first: Option<bool> = None;
            for w in words {
                let w = w.as_ref()?;
                let bit = membership(p, &rep.expr, w, closure.div_budget)?;
                match first {
                    None => first = Some(bit),
                    Some(f) if f != bit => return None,
                    _ => {}
                }
            }
            first
        };
        match (side(&left_words), side(&right_words)) {
            (Some(a), Some(b)) if a == b => values.push(Some(a)),
            _ => {
                oscillating.push(ri as u32);
                values.push(None);
            }
        }
    }
    if oscillating.is_empty() {
        Ok(SemiCharacter { values, tracked_hash: closure.tracked_hash() })
    } else {
        Err(DivergenceReport { oscillating, escaped })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideals::semilattice_closure;
    use crate::presentation::Presentation;
    use crate::rewrite::Ball;
    use crate::words::Window;
    use std::sync::Arc;

    const S_PRES: &str = "\
letters: a, b, x[n], y[n]
rules:
  a b x[n] -> b x[n]
  a b y[n] -> b y[n+1]
";

    const T_PRES: &str = "\
letters: a, b, c, x[n], y[n]
rules:
  a b x[n] -> b x[n]
  a b y[n] -> b y[n+1]
  c b x[n] -> b x[n+1]
  c b y[n] -> b y[n]
";

    fn s_closure() -> (Presentation, Closure) {
        let p = Presentation::parse(S_PRES).unwrap();
        let ball = Arc::new(Ball::enumerate(&p, 2, Window::symmetric(2)));
        let closure = semilattice_closure(&p, ball, 500, 4_000);
        (p, closure)
    }

    fn find_rep(p: &Presentation, closure: &Closure, text: &str) -> u32 {
        let expr = crate::ideals::parse_ideal(p, text).unwrap();
        closure
            .reps
            .iter()
            .position(|r| r.expr == expr)
            .unwrap_or_else(|| panic!("rep `{text}` not tracked")) as u32
    }

    #[test]
    fn point_character_of_identity() {
        let (p, closure) = s_closure();
        let chi = chi_of(&closure, &Word::empty()).unwrap();
        let full = find_rep(&p, &closure, "S");
        for (i, v) in chi.values.iter().enumerate() {
            if i as u32 == full {
                assert_eq!(*v, Some(true));
            } else {
                assert_eq!(*v, Some(false), "chi_e must vanish off the full ideal (rep {i})");
            }
        }
        assert!(violates_filter_laws(&closure, &chi).is_none());
    }

    #[test]
    fn point_character_of_family_word() {
        let (p, closure) = s_closure();
        let w = p.parse_word("b x[2]").unwrap();
        let chi = chi_of(&closure, &w).unwrap();
        assert_eq!(chi.get(find_rep(&p, &closure, "S")), Some(true));
        assert_eq!(chi.get(find_rep(&p, &closure, "b S")), Some(true));
        assert_eq!(chi.get(find_rep(&p, &closure, "a S")), Some(true));
        assert_eq!(chi.get(find_rep(&p, &closure, "Family(b)")), Some(true));
        assert_eq!(chi.get(find_rep(&p, &closure, "Family(e)")), Some(false));
        assert_eq!(chi.get(find_rep(&p, &closure, "y[0] S")), Some(false));
        assert_eq!(chi.get(find_rep(&p, &closure, "Empty")), Some(false));
        assert!(violates_filter_laws(&closure, &chi).is_none());
    }

    #[test]
    fn omega_conditions() {
        let (p, closure) = s_closure();
        let covers = enumerate_covers(&p, &closure, 16);
        // point characters lie in the orbit closure
        for text in ["e", "b x[0]", "a b"] {
            let w = p.parse_word(text).unwrap();
            let chi = chi_of(&closure, &w).unwrap();
            assert!(is_in_omega(&closure, &chi, &covers).is_holds());
        }
        // the identically-1 character hits the empty ideal
        let all_ones = SemiCharacter {
            values: vec![Some(true); closure.reps.len()],
            tracked_hash: closure.tracked_hash(),
        };
        assert!(is_in_omega(&closure, &all_ones, &covers).is_fails());
    }

    #[test]
    fn limit_of_x_family_characters() {
        let (p, closure) = s_closure();
        let seq = SeqSpec::parse(&p, "b x[n]").unwrap();
        let chi = limit_character(&p, &closure, &seq, None).expect("limit must stabilize");
        // 1 exactly on a^k S, a^k bS and the b-rooted family
        let a = p.symbol("a").unwrap();
        let b = p.symbol("b").unwrap();
        for (i, rep) in closure.reps.iter().enumerate() {
            let expected = match &rep.expr {
                IdealExpr::Full => true,
                IdealExpr::Principal(s) => {
                    let ls = s.letters();
                    ls.iter().all(|l| l.symbol == a)
                        || (ls.last().map(|l| l.symbol) == Some(b)
                            && ls[..ls.len() - 1].iter().all(|l| l.symbol == a))
                }
                IdealExpr::Family(s) => s.letters() == [crate::words::Letter::plain(b)],
                _ => false,
            };
            assert_eq!(
                chi.values[i],
                Some(expected),
                "limit bit wrong on {}",
                crate::ideals::display_ideal(&p, &rep.expr)
            );
        }
        // the limit is a new point: it differs from every point character
        for w in &closure.ball.words {
            let point = chi_of(&closure, w).unwrap();
            assert_ne!(point.values, chi.values, "limit equals chi_{}", p.display_word(w));
        }
        assert!(violates_filter_laws(&closure, &chi).is_none());
        assert!(is_in_omega(&closure, &chi, &enumerate_covers(&p, &closure, 16)).is_holds());
    }

    #[test]
    fn constant_sequence_recovers_point_character() {
        let (p, closure) = s_closure();
        let w = p.parse_word("b x[0]").unwrap();
        let seq = SeqSpec::constant(&p, &w);
        let chi = limit_character(&p, &closure, &seq, None).unwrap();
        assert_eq!(chi.values, chi_of(&closure, &w).unwrap().values);
    }

    #[test]
    fn t_limits_of_x_and_y_sequences_coincide() {
        let p = Presentation::parse(T_PRES).unwrap();
        let ball = Arc::new(Ball::enumerate(&p, 2, Window::symmetric(2)));
        let closure = semilattice_closure(&p, ball, 500, 4_000);
        let cx = limit_character(&p, &closure, &SeqSpec::parse(&p, "b x[n]").unwrap(), None)
            .expect("x limit");
        let cy = limit_character(&p, &closure, &SeqSpec::parse(&p, "b y[n]").unwrap(), None)
            .expect("y limit");
        assert_eq!(cx.values, cy.values);
    }

    #[test]
    fn orbit_relation_on_characters() {
        let (p, closure) = s_closure();
        // for s = t·u: chi_s(t·X) = chi_u(X) on tracked translates
        let t = p.parse_word("b").unwrap();
        let u = p.parse_word("x[1]").unwrap();
        let s = crate::rewrite::normalized_product(&p, &t, &u).unwrap();
        let chi_s = chi_of(&closure, &s).unwrap();
        let chi_u = chi_of(&closure, &u).unwrap();
        for (i, rep) in closure.reps.iter().enumerate() {
            let translated = crate::ideals::translate(&p, &closure.ball, &t, rep, 4_000);
            if let Some(j) = closure.rep_of_fingerprint(&translated.fingerprint) {
                if let (Some(a), Some(b)) = (chi_s.get(j), chi_u.values[i]) {
                    assert_eq!(a, b, "orbit relation fails at rep {i}");
                }
            }
        }
    }

    #[test]
    fn seq_parsing_errors() {
        let p = Presentation::parse(S_PRES).unwrap();
        assert!(SeqSpec::parse(&p, "b x[n]").is_ok());
        assert!(SeqSpec::parse(&p, "b x[n+1]").is_ok());
        assert!(SeqSpec::parse(&p, "a b").is_err(), "no indexed slot");
        assert!(SeqSpec::parse(&p, "x[n] y[m]").is_err(), "two variables");
        assert!(SeqSpec::parse(&p, "q[n]").is_err());
    }
}
