//! Regularity diagnostics: fixed-point cover data, witness search for the
//! strong and restricted cover properties, the translation-groupoid equality
//! criterion, and Hausdorffness-failure witnesses.
//!
//! A witness consists of tracked ideals `Y_j` and indices `k_j` with each
//! `h_{k_j}` acting as the identity on `Y_j` and the `Y_j` covering the target
//! set. Both sides are certified globally: acting as the identity on an ideal
//! follows from fixing its generators (domains of hull elements are right
//! ideals and hull elements are right-equivariant), and covers are checked on
//! generator families probed beyond the window. Failure to find a witness is
//! reported as `unknown` plus the structural obstruction, never as a
//! refutation.

use crate::hull::{self, apply, ApplyResult, HullElement};
use crate::ideals::{
    self, global_cover_check, membership, Closure, ConstructibleIdeal, CoverOutcome,
    GeneralizedIdeal, IdealExpr,
};
use crate::presentation::Presentation;
use crate::rewrite::Ball;
use crate::spectrum::{limit_character, SemiCharacter, SeqSpec};
use crate::verdict::{Exhausted, Verdict};
use crate::words::{Letter, Window, Word};
use serde::Serialize;
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Condition1Failure {
    EmptyTrace,
    DomainViolation { h_index: usize, word: Word },
    Unfixed { word: Word },
}

pub type Condition1Verdict = Verdict<usize, Condition1Failure>;

/// Check the fixed-point cover data on the ball: the trace of
/// `base \ ∪removed` is nonempty, lies in every `dom h_k`, and every element
/// is fixed by some `h_k`. `holds` carries the trace size.
pub fn condition1_check(
    p: &Presentation,
    ball: &Ball,
    x: &GeneralizedIdeal,
    hs: &[HullElement],
    budget: usize,
) -> Condition1Verdict {
    let (base_fp, base_unknown) = ideals::fingerprint_of(p, ball, &x.base, budget);
    let mut trace = base_fp;
    for r in &x.removed {
        let (rfp, runknown) = ideals::fingerprint_of(p, ball, r, budget);
        trace = trace.and_not(&rfp);
        if !runknown.is_zero() {
            return Verdict::Unknown(Exhausted::new(budget as u64, "removed-set membership"));
        }
    }
    if !base_unknown.is_zero() {
        return Verdict::Unknown(Exhausted::new(budget as u64, "base membership"));
    }
    if trace.is_zero() {
        return Verdict::Fails(Condition1Failure::EmptyTrace);
    }
    let mut unknowns = 0usize;
    for i in trace.iter_ones() {
        let w = ball.word(i as u32);
        let mut fixed = false;
        for (k, h) in hs.iter().enumerate() {
            match apply(p, h, w, budget) {
                ApplyResult::Image(img) => {
                    if &img == w {
                        fixed = true;
                    }
                }
                ApplyResult::Undefined => {
                    return Verdict::Fails(Condition1Failure::DomainViolation {
                        h_index: k,
                        word: w.clone(),
                    })
                }
                ApplyResult::Unknown => unknowns += 1,
            }
        }
        if !fixed {
            if unknowns > 0 {
                return Verdict::Unknown(Exhausted::new(budget as u64, "apply budget"));
            }
            return Verdict::Fails(Condition1Failure::Unfixed { word: w.clone() });
        }
    }
    Verdict::Holds(trace.count_ones())
}

/// A certified witness: part `j` is covered by `h_{ks[j]}` acting as the
/// identity on it.
#[derive(Debug, Clone)]
pub struct RegularityWitness {
    pub parts: Vec<WitnessPart>,
}

#[derive(Debug, Clone)]
pub struct WitnessPart {
    pub ideal: GeneralizedIdeal,
    pub h_index: usize,
    pub rep_index: Option<u32>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Obstruction {
    /// A generator of the base (possibly at an out-of-window index) contained
    /// in no tracked ideal on which some `h` acts as the identity.
    pub uncovered_generator: Option<String>,
    /// Tracked indices admissible for each `h`.
    pub admissible_per_h: Vec<Vec<u32>>,
    pub note: String,
}

#[derive(Debug, Clone)]
pub enum WitnessOutcome {
    Found(RegularityWitness),
    /// Search exhausted over the tracked list: not a refutation.
    NoWitness(Obstruction),
    BudgetExhausted(Exhausted),
    PreconditionFailed(Condition1Failure),
}

impl WitnessOutcome {
    pub fn is_found(&self) -> bool {
        matches!(self, WitnessOutcome::Found(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessKind {
    /// Parts are tracked constructible ideals.
    Strong,
    /// Parts may also be single differences of tracked ideals.
    CStar,
}

struct Search<'a> {
    p: &'a Presentation,
    closure: &'a Closure,
    hs: &'a [HullElement],
    kind: WitnessKind,
    budget: usize,
    evals: usize,
    admissible_cache: HashMap<(u32, usize), bool>,
}

impl<'a> Search<'a> {
    fn window(&self) -> Window {
        self.closure.ball.window
    }

    fn margin(&self) -> i16 {
        2 * (self.window().width() as i16) + 8
    }

    fn spend(&mut self) -> Result<(), Exhausted> {
        self.evals += 1;
        if self.evals > self.budget {
            Err(Exhausted::new(self.budget as u64, "witness-search budget exhausted"))
        } else {
            Ok(())
        }
    }

    /// Does `h` fix every generic generator of the ideal (skipping those
    /// absorbed by `skip`)? Fixing a generator fixes its whole principal
    /// ideal, so this certifies the identity action globally.
    fn fixes_generators(
        &mut self,
        expr: &IdealExpr,
        skip: &[IdealExpr],
        k: usize,
    ) -> Result<bool, Exhausted> {
        let Some(gens) = ideals::generic_generators(self.p, expr, self.window(), self.margin())
        else {
            return Ok(false);
        };
        let h = &self.hs[k];
        for g in &gens {
            let mut skipped = false;
            for z in skip {
                match membership(self.p, z, g, self.closure.div_budget) {
                    Some(true) => {
                        skipped = true;
                        break;
                    }
                    Some(false) => {}
                    None => return Ok(false),
                }
            }
            if skipped {
                continue;
            }
            match apply(self.p, h, g, self.closure.div_budget) {
                ApplyResult::Image(img) if &img == g => {}
                _ => return Ok(false),
            }
        }
        Ok(true)
    }

    /// One budget unit per (tracked ideal, h) candidate evaluation.
    fn rep_admissible(&mut self, rep: u32, k: usize) -> Result<bool, Exhausted> {
        if let Some(&cached) = self.admissible_cache.get(&(rep, k)) {
            return Ok(cached);
        }
        self.spend()?;
        let expr = self.closure.reps[rep as usize].expr.clone();
        let ok = !self.closure.reps[rep as usize].fingerprint.is_zero()
            && expr.is_closed_shape()
            && self.fixes_generators(&expr, &[], k)?;
        self.admissible_cache.insert((rep, k), ok);
        Ok(ok)
    }

    /// First (rep-or-difference, k) covering the generator `g`, in
    /// deterministic order.
    fn cover_generator(&mut self, g: &Word) -> Result<Option<WitnessPart>, Exhausted> {
        let reps = &self.closure.reps;
        for ri in 0..reps.len() as u32 {
            if membership(self.p, &reps[ri as usize].expr, g, self.closure.div_budget)
                != Some(true)
            {
                continue;
            }
            for k in 0..self.hs.len() {
                if self.rep_admissible(ri, k)? {
                    return Ok(Some(WitnessPart {
                        ideal: GeneralizedIdeal::ideal(reps[ri as usize].expr.clone()),
                        h_index: k,
                        rep_index: Some(ri),
                    }));
                }
            }
        }
        if self.kind == WitnessKind::CStar {
            // single differences of tracked ideals: removing rj can only help
            // when every generator that h moves lies inside rj while g stays
            // outside, so those cheap membership filters run before any
            // budget is spent
            for ri in 0..reps.len() as u32 {
                let base = reps[ri as usize].expr.clone();
                if !base.is_closed_shape()
                    || membership(self.p, &base, g, self.closure.div_budget) != Some(true)
                {
                    continue;
                }
                for k in 0..self.hs.len() {
                    let Some(bad) = self.moved_generators(&base, k) else { continue };
                    if bad.is_empty() {
                        continue; // plain rep scan already covered this
                    }
                    for rj in 0..reps.len() as u32 {
                        if ri == rj {
                            continue;
                        }
                        let removed = reps[rj as usize].expr.clone();
                        if membership(self.p, &removed, g, self.closure.div_budget)
                            != Some(false)
                        {
                            continue;
                        }
                        let absorbs_bad = bad.iter().all(|b| {
                            membership(self.p, &removed, b, self.closure.div_budget)
                                == Some(true)
                        });
                        if !absorbs_bad {
                            continue;
                        }
                        self.spend()?;
                        if self.fixes_generators(&base, std::slice::from_ref(&removed), k)? {
                            return Ok(Some(WitnessPart {
                                ideal: GeneralizedIdeal {
                                    base: base.clone(),
                                    removed: vec![removed.clone()],
                                },
                                h_index: k,
                                rep_index: Some(ri),
                            }));
                        }
                    }
                }
            }
        }
        Ok(None)
    }

    /// Generic generators of `expr` that `h_k` does not fix.
    fn moved_generators(&mut self, expr: &IdealExpr, k: usize) -> Option<Vec<Word>> {
        let gens = ideals::generic_generators(self.p, expr, self.window(), self.margin())?;
        let h = &self.hs[k];
        let mut out = Vec::new();
        for g in gens {
            match apply(self.p, h, &g, self.closure.div_budget) {
                ApplyResult::Image(img) if img == g => {}
                _ => out.push(g),
            }
        }
        Some(out)
    }

    fn admissible_lists(&mut self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.hs.len()];
        for ri in 0..self.closure.reps.len() as u32 {
            for k in 0..self.hs.len() {
                if let Ok(true) = self.rep_admissible(ri, k) {
                    out[k].push(ri);
                }
            }
        }
        out
    }
}

/// Search tracked ideals (`Strong`) or tracked ideals and their single
/// differences (`CStar`) for a witness covering `x`. Driven by the generator
/// family of the base: each generator not absorbed by the removed sets must
/// land in a part on which some `h` acts as the identity.
pub fn regularity_witness(
    p: &Presentation,
    closure: &Closure,
    x: &GeneralizedIdeal,
    hs: &[HullElement],
    kind: WitnessKind,
    budget: usize,
) -> WitnessOutcome {
    match condition1_check(p, &closure.ball, x, hs, closure.div_budget) {
        Verdict::Holds(_) => {}
        Verdict::Fails(f) => return WitnessOutcome::PreconditionFailed(f),
        Verdict::Unknown(e) => return WitnessOutcome::BudgetExhausted(e),
    }
    let mut search = Search {
        p,
        closure,
        hs,
        kind,
        budget,
        evals: 0,
        admissible_cache: HashMap::new(),
    };
    let window = closure.ball.window;
    let margin = search.margin();
    let Some(gens) = ideals::generic_generators(p, &x.base, window, margin) else {
        return WitnessOutcome::BudgetExhausted(Exhausted::new(
            budget as u64,
            "base ideal has no closed generator family",
        ));
    };

    let mut parts: Vec<WitnessPart> = Vec::new();
    for g in &gens {
        let mut absorbed = false;
        for r in &x.removed {
            match membership(p, r, g, closure.div_budget) {
                Some(true) => {
                    absorbed = true;
                    break;
                }
                Some(false) => {}
                None => {
                    return WitnessOutcome::BudgetExhausted(Exhausted::new(
                        budget as u64,
                        "removed-set membership budget",
                    ))
                }
            }
        }
        if absorbed {
            continue;
        }
        let covered = parts.iter().any(|part| {
            membership_part(p, &part.ideal, g, closure.div_budget) == Some(true)
        });
        if covered {
            continue;
        }
        match search.cover_generator(g) {
            Ok(Some(part)) => parts.push(part),
            Ok(None) => {
                let admissible_per_h = search.admissible_lists();
                let note = format!(
                    "no tracked ideal on which some h acts as the identity contains the \
                     generator {}; the fixed-set families never cover the base",
                    p.display_word(g)
                );
                return WitnessOutcome::NoWitness(Obstruction {
                    uncovered_generator: Some(p.display_word(g)),
                    admissible_per_h,
                    note,
                });
            }
            Err(e) => return WitnessOutcome::BudgetExhausted(e),
        }
    }
    let witness = RegularityWitness { parts };
    match verify_witness(p, closure, x, hs, &witness) {
        Ok(()) => WitnessOutcome::Found(witness),
        Err(note) => WitnessOutcome::BudgetExhausted(Exhausted::new(budget as u64, note)),
    }
}

fn membership_part(
    p: &Presentation,
    part: &GeneralizedIdeal,
    w: &Word,
    budget: usize,
) -> Option<bool> {
    ideals::membership_generalized(p, part, w, budget)
}

/// Independent replay of a witness: global cover, identity action on each
/// part across the ball trace, and pointwise cover of the target trace.
fn verify_witness(
    p: &Presentation,
    closure: &Closure,
    x: &GeneralizedIdeal,
    hs: &[HullElement],
    witness: &RegularityWitness,
) -> Result<(), String> {
    let ball = &closure.ball;
    let budget = closure.div_budget;
    // plain-ideal parts admit the global cover certificate
    if witness.parts.iter().all(|part| part.ideal.removed.is_empty()) {
        let part_exprs: Vec<IdealExpr> =
            witness.parts.iter().map(|part| part.ideal.base.clone()).collect();
        match global_cover_check(p, ball.window, &x.base, &x.removed, &part_exprs, budget) {
            CoverOutcome::Covered { .. } => {}
            CoverOutcome::Uncovered { witness: w } => {
                return Err(format!("cover replay failed at {}", p.display_word(&w)))
            }
            CoverOutcome::Unverifiable { note } => return Err(note),
        }
    }
    // ball-trace replay through independent membership and apply queries
    let (base_fp, _) = ideals::fingerprint_of(p, ball, &x.base, budget);
    let mut trace = base_fp;
    for r in &x.removed {
        let (rfp, _) = ideals::fingerprint_of(p, ball, r, budget);
        trace = trace.and_not(&rfp);
    }
    for i in trace.iter_ones() {
        let w = ball.word(i as u32);
        let mut ok = false;
        for part in &witness.parts {
            if membership_part(p, &part.ideal, w, budget) == Some(true) {
                match apply(p, &hs[part.h_index], w, budget) {
                    ApplyResult::Image(img) if &img == w => {
                        ok = true;
                        break;
                    }
                    _ => {
                        return Err(format!(
                            "part {} does not fix {}",
                            part.h_index,
                            p.display_word(w)
                        ))
                    }
                }
            }
        }
        if !ok {
            return Err(format!("trace word {} not covered", p.display_word(w)));
        }
    }
    Ok(())
}

/// The monoid-level criterion for the two groupoid models to agree on `x`:
/// tracked ideals covering the target on which `g` acts as the identity.
pub fn gp_eq_g_check(
    p: &Presentation,
    closure: &Closure,
    g: &HullElement,
    x: &GeneralizedIdeal,
    budget: usize,
) -> WitnessOutcome {
    regularity_witness(p, closure, x, std::slice::from_ref(g), WitnessKind::Strong, budget)
}

#[derive(Debug, Clone, Serialize)]
pub struct RegularityWitnessReport {
    #[serde(rename = "Y")]
    pub ys: Vec<String>,
    #[serde(rename = "k")]
    pub ks: Vec<usize>,
    pub radius: usize,
    pub window: String,
    pub budget: usize,
}

pub fn witness_report(
    p: &Presentation,
    closure: &Closure,
    witness: &RegularityWitness,
    budget: usize,
) -> RegularityWitnessReport {
    RegularityWitnessReport {
        ys: witness
            .parts
            .iter()
            .map(|part| {
                if part.ideal.removed.is_empty() {
                    ideals::display_ideal(p, &part.ideal.base)
                } else {
                    let removed: Vec<String> = part
                        .ideal
                        .removed
                        .iter()
                        .map(|r| ideals::display_ideal(p, r))
                        .collect();
                    format!(
                        "{} \\ ({})",
                        ideals::display_ideal(p, &part.ideal.base),
                        removed.join(" u ")
                    )
                }
            })
            .collect(),
        ks: witness.parts.iter().map(|part| part.h_index).collect(),
        radius: closure.ball.radius,
        window: closure.ball.window.to_string(),
        budget,
    }
}

/// A Hausdorffness-failure certificate at the truncation: the letter fixes
/// the whole sequence, while every tracked ideal charged by the limit
/// character contains an element the letter moves.
#[derive(Debug, Clone)]
pub struct HausdorffWitness {
    pub g: Letter,
    pub seq: SeqSpec,
    pub limit: SemiCharacter,
    /// Per charged tracked ideal, an element not fixed by `g`.
    pub moved_elements: Vec<(u32, Word)>,
}

/// Scan plain letters against canonical indexed sequences `s·f[n]` with `s`
/// ranging over short ball words. Emitted sequences are shift-normalized so
/// that equivalent families (e.g. the image of one under a letter that only
/// shifts it) appear once.
pub fn hausdorff_witness_search(
    p: &Presentation,
    closure: &Closure,
    prefix_len: usize,
    budget: usize,
) -> Vec<HausdorffWitness> {
    let ball = &closure.ball;
    let window = ball.window;
    let margin = 2 * (window.width() as i16) + 8;
    let mut out: Vec<HausdorffWitness> = Vec::new();
    let mut seen: Vec<(Letter, Vec<SeqItemKey>)> = Vec::new();

    let plain_letters: Vec<Letter> = p
        .symbols
        .iter()
        .enumerate()
        .filter(|(_, d)| !d.indexed)
        .map(|(i, _)| Letter::plain(crate::words::SymbolId(i as u8)))
        .collect();

    let prefixes: Vec<&Word> = ball
        .words
        .iter()
        .filter(|w| w.len() <= prefix_len)
        .collect();

    for &g in &plain_letters {
        let h = hull::from_letter(p, g);
        for prefix in &prefixes {
            for f in p.indexed_symbols() {
                let Some((key, seq)) = canonical_sequence(p, prefix, f, window, margin) else {
                    continue;
                };
                if seen.iter().any(|(sg, sk)| *sg == g && sk == &key) {
                    continue;
                }
                // (a) g fixes the sequence, inside the window and generically
                let mut ns: Vec<i16> = window.indices().collect();
                ns.push(window.hi + margin);
                ns.push(window.lo - margin);
                let fixes_all = ns.iter().all(|&n| match seq.instantiate(p, n) {
                    Ok(w) => apply(p, &h, &w, budget) == ApplyResult::Image(w),
                    Err(_) => false,
                });
                if !fixes_all {
                    continue;
                }
                // (b) the sequence has a limit character
                let Ok(limit) = limit_character(p, closure, &seq, None) else { continue };
                // (c) every charged tracked ideal has an element g moves
                let mut moved: Vec<(u32, Word)> = Vec::new();
                let mut all_moved = true;
                for ri in limit.ones() {
                    let rep: &ConstructibleIdeal = &closure.reps[ri as usize];
                    let mut found: Option<Word> = None;
                    for i in rep.fingerprint.iter_ones() {
                        let w = ball.word(i as u32);
                        match apply(p, &h, w, budget) {
                            ApplyResult::Image(img) if &img == w => {}
                            ApplyResult::Unknown => {}
                            _ => {
                                found = Some(w.clone());
                                break;
                            }
                        }
                    }
                    match found {
                        Some(w) => moved.push((ri, w)),
                        None => {
                            all_moved = false;
                            break;
                        }
                    }
                }
                if !all_moved {
                    continue;
                }
                seen.push((g, key));
                out.push(HausdorffWitness { g, seq, limit, moved_elements: moved });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum SeqItemKey {
    Concrete(Letter),
    Var { symbol: crate::words::SymbolId, offset: i16 },
}

/// Normalize `prefix · f[n]` to a canonical indexed pattern by instantiating
/// at two generic indices and aligning the first variable slot to offset 0.
fn canonical_sequence(
    p: &Presentation,
    prefix: &Word,
    f: crate::words::SymbolId,
    window: Window,
    margin: i16,
) -> Option<(Vec<SeqItemKey>, SeqSpec)> {
    let big = window.hi + margin;
    let w1 = crate::rewrite::normalize(p, &prefix.appended(Letter::indexed(f, big))).ok()?;
    let w2 = crate::rewrite::normalize(p, &prefix.appended(Letter::indexed(f, big + 1))).ok()?;
    if w1.len() != w2.len() {
        return None;
    }
    let mut key: Vec<SeqItemKey> = Vec::with_capacity(w1.len());
    let mut base: Option<i16> = None;
    for (l1, l2) in w1.letters().iter().zip(w2.letters()) {
        if l1.symbol != l2.symbol {
            return None;
        }
        match (l1.index, l2.index) {
            (Some(i1), Some(i2)) if i2 == i1 + 1 => {
                let b = *base.get_or_insert(i1);
                key.push(SeqItemKey::Var { symbol: l1.symbol, offset: i1 - b });
            }
            (a, b) if a == b => key.push(SeqItemKey::Concrete(*l1)),
            _ => return None,
        }
    }
    base?;
    // rebuild a parseable sequence spec from the canonical pattern
    let text: Vec<String> = key
        .iter()
        .map(|item| match item {
            SeqItemKey::Concrete(l) => p.display_letter(*l),
            SeqItemKey::Var { symbol, offset } => {
                let name = p.symbol_name(*symbol);
                match offset {
                    0 => format!("{name}[n]"),
                    o if *o > 0 => format!("{name}[n+{o}]"),
                    o => format!("{name}[n{o}]"),
                }
            }
        })
        .collect();
    let seq = SeqSpec::parse(p, &text.join(" ")).ok()?;
    Some((key, seq))
}

/// Sweep report for the hull-element enumeration: every element of bounded
/// zigzag length that fixes `fixed_word` and whose ball domain contains the
/// trace of `domain` must be the identity or the restriction to `domain`.
#[derive(Debug, Clone)]
pub struct SweepReport {
    pub strings_scanned: usize,
    pub candidates: usize,
    pub survivors: Vec<(HullElement, SurvivorClass)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurvivorClass {
    Identity,
    Restriction,
    Other,
}

impl SweepReport {
    pub fn all_trivial(&self) -> bool {
        self.survivors.iter().all(|(_, c)| *c != SurvivorClass::Other)
    }
}

pub fn fixed_element_sweep(
    p: &Presentation,
    ball: &Ball,
    enum_window: Window,
    max_len: usize,
    fixed_word: &Word,
    domain: &IdealExpr,
    budget: usize,
) -> SweepReport {
    let elements = hull::enumerate_hull_elements(p, enum_window, max_len);
    let strings_scanned = elements.len();
    let probe = Ball::enumerate(p, 3.min(ball.radius), enum_window);
    let (probe_fp, _) = ideals::fingerprint_of(p, &probe, domain, budget);

    let mut candidates: Vec<HullElement> = Vec::new();
    let mut signatures: Vec<u64> = Vec::new();
    'next: for h in elements {
        match apply(p, &h, fixed_word, budget) {
            ApplyResult::Image(img) if &img == fixed_word => {}
            _ => continue,
        }
        for i in probe_fp.iter_ones() {
            let w = probe.word(i as u32);
            if !matches!(apply(p, &h, w, budget), ApplyResult::Image(_)) {
                continue 'next;
            }
        }
        let sig = hull::action_signature(p, &probe, &h, budget);
        if signatures.contains(&sig) {
            // extensional duplicate on the probe; keep the first form
            continue;
        }
        signatures.push(sig);
        candidates.push(h);
    }

    let (domain_fp, _) = ideals::fingerprint_of(p, ball, domain, budget);
    let mut survivors = Vec::new();
    let n_candidates = candidates.len();
    for h in candidates {
        let mut identity = true;
        let mut restriction = true;
        let mut other = false;
        for (i, w) in ball.words.iter().enumerate() {
            match apply(p, &h, w, budget) {
                ApplyResult::Image(img) => {
                    if img != *w {
                        other = true;
                        break;
                    }
                    if !domain_fp.get(i) {
                        restriction = false;
                    }
                }
                ApplyResult::Undefined => {
                    identity = false;
                    if domain_fp.get(i) {
                        other = true;
                        break;
                    }
                }
                ApplyResult::Unknown => {
                    other = true;
                    break;
                }
            }
        }
        let class = if other {
            SurvivorClass::Other
        } else if identity {
            SurvivorClass::Identity
        } else if restriction {
            SurvivorClass::Restriction
        } else {
            SurvivorClass::Other
        };
        survivors.push((h, class));
    }
    SweepReport { strings_scanned, candidates: n_candidates, survivors }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideals::semilattice_closure;
    use crate::presentation::Presentation;
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

    fn s_setup() -> (Presentation, Closure) {
        let p = Presentation::parse(S_PRES).unwrap();
        let ball = Arc::new(Ball::enumerate(&p, 3, Window::symmetric(1)));
        let closure = semilattice_closure(&p, ball, 300, 4_000);
        (p, closure)
    }

    fn t_setup() -> (Presentation, Closure) {
        let p = Presentation::parse(T_PRES).unwrap();
        let ball = Arc::new(Ball::enumerate(&p, 3, Window::symmetric(1)));
        let closure = semilattice_closure(&p, ball, 300, 4_000);
        (p, closure)
    }

    fn letter(p: &Presentation, name: &str) -> HullElement {
        hull::from_letter(p, p.parse_letter(name).unwrap())
    }

    #[test]
    fn condition1_family_with_a_alone_fails() {
        let (p, closure) = s_setup();
        let x = GeneralizedIdeal::ideal(IdealExpr::Family(p.parse_word("b").unwrap()));
        let v = condition1_check(&p, &closure.ball, &x, &[letter(&p, "a")], 4_000);
        match v {
            Verdict::Fails(Condition1Failure::Unfixed { word }) => {
                let shown = p.display_word(&word);
                assert!(shown.contains('y'), "unfixed witness should be a y-word: {shown}");
            }
            other => panic!("expected unfixed witness, got {other:?}"),
        }
    }

    #[test]
    fn condition1_t_family_with_a_and_c_holds() {
        let (p, closure) = t_setup();
        let x = GeneralizedIdeal::ideal(IdealExpr::Family(p.parse_word("b").unwrap()));
        let v = condition1_check(
            &p,
            &closure.ball,
            &x,
            &[letter(&p, "a"), letter(&p, "c")],
            4_000,
        );
        assert!(v.is_holds(), "{v:?}");
    }

    #[test]
    fn condition1_empty_trace_fails() {
        let (p, closure) = s_setup();
        let x = GeneralizedIdeal::ideal(IdealExpr::Empty);
        let v = condition1_check(&p, &closure.ball, &x, &[HullElement::identity()], 4_000);
        assert_eq!(v.fails(), Some(&Condition1Failure::EmptyTrace));
    }

    #[test]
    fn strong_witness_for_restriction_element() {
        let (p, closure) = s_setup();
        let fam = IdealExpr::Family(Word::empty());
        let x = GeneralizedIdeal::ideal(fam.clone());
        let h = hull::restriction(&p, fam);
        let out = regularity_witness(&p, &closure, &x, &[h], WitnessKind::Strong, 200);
        let WitnessOutcome::Found(w) = out else { panic!("expected witness, got {out:?}") };
        assert_eq!(w.parts.len(), 1);
        assert_eq!(w.parts[0].h_index, 0);
    }

    #[test]
    fn strong_witness_for_principal_fixed_by_a() {
        let (p, closure) = s_setup();
        let x = GeneralizedIdeal::ideal(IdealExpr::Principal(p.parse_word("b x[0]").unwrap()));
        let out =
            regularity_witness(&p, &closure, &x, &[letter(&p, "a")], WitnessKind::Strong, 200);
        assert!(out.is_found(), "{out:?}");
    }

    #[test]
    fn t_family_instance_has_no_witness_at_any_budget() {
        let (p, closure) = t_setup();
        let x = GeneralizedIdeal::ideal(IdealExpr::Family(p.parse_word("b").unwrap()));
        let hs = [letter(&p, "a"), letter(&p, "c")];
        for budget in [1_000usize, 10_000] {
            let out = regularity_witness(&p, &closure, &x, &hs, WitnessKind::Strong, budget);
            let WitnessOutcome::NoWitness(obstruction) = out else {
                panic!("expected obstruction at budget {budget}, got {out:?}")
            };
            let g = obstruction.uncovered_generator.expect("uncovered generator");
            assert!(g.contains('['), "generator should carry an index: {g}");
            assert!(obstruction.note.contains("no tracked ideal"));
            // the c*-variant with single differences is just as stuck
            let out = regularity_witness(&p, &closure, &x, &hs, WitnessKind::CStar, budget);
            assert!(!out.is_found(), "{out:?}");
        }
    }

    #[test]
    fn gp_eq_g_examples() {
        let (p, closure) = s_setup();
        // identity fixes everything: witness is the base itself
        let x = GeneralizedIdeal::ideal(IdealExpr::Family(p.parse_word("b").unwrap()));
        let out = gp_eq_g_check(&p, &closure, &HullElement::identity(), &x, 200);
        assert!(out.is_found(), "{out:?}");
        // a moves b y[n]: the precondition fails with that witness
        let out = gp_eq_g_check(&p, &closure, &letter(&p, "a"), &x, 200);
        assert!(
            matches!(out, WitnessOutcome::PreconditionFailed(Condition1Failure::Unfixed { .. })),
            "{out:?}"
        );
        // the restriction to Family(b) is certified by the base itself
        let h = hull::restriction(&p, IdealExpr::Family(p.parse_word("b").unwrap()));
        let out = gp_eq_g_check(&p, &closure, &h, &x, 200);
        assert!(out.is_found(), "{out:?}");
    }

    #[test]
    fn hausdorff_scan_s() {
        let (p, closure) = s_setup();
        let found = hausdorff_witness_search(&p, &closure, 2, 4_000);
        assert_eq!(found.len(), 1, "{:?}", found.iter().map(|w| (p.display_letter(w.g), w.seq.source().to_string())).collect::<Vec<_>>());
        assert_eq!(p.display_letter(found[0].g), "a");
        assert_eq!(found[0].seq.source(), "b x[n]");
        assert!(!found[0].moved_elements.is_empty());
    }

    #[test]
    fn hausdorff_scan_t() {
        let (p, closure) = t_setup();
        let found = hausdorff_witness_search(&p, &closure, 2, 4_000);
        let summary: Vec<(String, String)> = found
            .iter()
            .map(|w| (p.display_letter(w.g), w.seq.source().to_string()))
            .collect();
        assert_eq!(
            summary,
            vec![
                ("a".to_string(), "b x[n]".to_string()),
                ("c".to_string(), "b y[n]".to_string())
            ],
            "unexpected scan output"
        );
    }

    #[test]
    fn hausdorff_scan_free_monoid_is_empty() {
        let p = Presentation::parse("letters: a, b\n").unwrap();
        let ball = Arc::new(Ball::enumerate(&p, 3, Window::symmetric(1)));
        let closure = semilattice_closure(&p, ball, 200, 4_000);
        assert!(hausdorff_witness_search(&p, &closure, 2, 4_000).is_empty());
    }

    #[test]
    fn sweep_finds_only_identity_and_restriction() {
        let p = Presentation::parse(S_PRES).unwrap();
        let ball = Ball::enumerate(&p, 4, Window::symmetric(1));
        let report = fixed_element_sweep(
            &p,
            &ball,
            Window::symmetric(1),
            4,
            &p.parse_word("y[0]").unwrap(),
            &IdealExpr::Family(Word::empty()),
            4_000,
        );
        assert!(report.all_trivial(), "{:?}", report.survivors);
        assert!(report
            .survivors
            .iter()
            .any(|(_, c)| *c == SurvivorClass::Identity));
        assert!(report
            .survivors
            .iter()
            .any(|(_, c)| *c == SurvivorClass::Restriction));
    }
}
