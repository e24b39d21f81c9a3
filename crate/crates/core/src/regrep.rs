//! Finite compressions of the left regular representation on the span of a
//! ball: translation operators, indicator projections, operator-polynomial
//! evaluation with interior masking, and the small trace/epsilon numerics.
//!
//! Interior masking: an operator polynomial of depth `d` (its longest chain
//! of translation factors) is evaluated only on basis vectors of length at
//! most `radius - d` with indices at distance `d` from the window edge, so a
//! truncation can never manufacture a false zero. All generator entries are
//! 0 or ±1; the tolerance only absorbs the dense numerics below.

use crate::cancel::{divide, DivideOutcome};
use crate::ideals::{self, IdealExpr};
use crate::presentation::Presentation;
use crate::rewrite::{normalize, Ball};
use crate::words::Word;
use serde::Serialize;
use std::collections::HashMap;

pub const ZERO_TOLERANCE: f64 = 1e-12;

/// Sparse operator on the span of the ball word list. `cols[i]` is the image
/// of the `i`-th basis vector; `None` marks a boundary column that the
/// truncation cannot represent.
#[derive(Debug, Clone)]
pub struct BallOperator {
    pub dim: usize,
    pub cols: Vec<Option<Vec<(u32, f64)>>>,
    /// Zigzag depth: products accumulate it additively.
    pub depth: usize,
}

impl BallOperator {
    pub fn identity(dim: usize) -> Self {
        BallOperator {
            dim,
            cols: (0..dim).map(|i| Some(vec![(i as u32, 1.0)])).collect(),
            depth: 0,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        BallOperator {
            dim: self.dim,
            cols: self
                .cols
                .iter()
                .map(|col| {
                    col.as_ref()
                        .map(|entries| entries.iter().map(|&(r, v)| (r, c * v)).collect())
                })
                .collect(),
            depth: self.depth,
        }
    }

    pub fn add(&self, other: &BallOperator) -> Self {
        assert_eq!(self.dim, other.dim);
        let cols = self
            .cols
            .iter()
            .zip(&other.cols)
            .map(|(a, b)| match (a, b) {
                (Some(a), Some(b)) => {
                    let mut acc: HashMap<u32, f64> = HashMap::new();
                    for &(r, v) in a.iter().chain(b) {
                        *acc.entry(r).or_insert(0.0) += v;
                    }
                    Some(sorted_entries(acc))
                }
                _ => None,
            })
            .collect();
        BallOperator { dim: self.dim, cols, depth: self.depth.max(other.depth) }
    }

    pub fn sub(&self, other: &BallOperator) -> Self {
        self.add(&other.scaled(-1.0))
    }

    /// `self · other` (apply `other` first).
    pub fn mul(&self, other: &BallOperator) -> Self {
        assert_eq!(self.dim, other.dim);
        let cols = other
            .cols
            .iter()
            .map(|col| {
                let col = col.as_ref()?;
                let mut acc: HashMap<u32, f64> = HashMap::new();
                for &(mid, v) in col {
                    let through = self.cols[mid as usize].as_ref()?;
                    for &(r, w) in through {
                        *acc.entry(r).or_insert(0.0) += v * w;
                    }
                }
                Some(sorted_entries(acc))
            })
            .collect();
        BallOperator { dim: self.dim, cols, depth: self.depth + other.depth }
    }

    pub fn column(&self, i: u32) -> Option<&[(u32, f64)]> {
        self.cols[i as usize].as_deref()
    }

    /// Max Euclidean column norm of `self - other` over the given columns.
    pub fn max_column_distance(&self, other: &BallOperator, cols: &[u32]) -> Option<f64> {
        let mut max = 0.0f64;
        for &i in cols {
            let (Some(a), Some(b)) = (&self.cols[i as usize], &self.cols[i as usize + 0]) else {
                return None;
            };
            let _ = b;
            let Some(b) = &other.cols[i as usize] else { return None };
            let mut acc: HashMap<u32, f64> = HashMap::new();
            for &(r, v) in a {
                *acc.entry(r).or_insert(0.0) += v;
            }
            for &(r, v) in b {
                *acc.entry(r).or_insert(0.0) -= v;
            }
            let norm: f64 = acc.values().map(|v| v * v).sum::<f64>().sqrt();
            max = max.max(norm);
        }
        Some(max)
    }
}

fn sorted_entries(acc: HashMap<u32, f64>) -> Vec<(u32, f64)> {
    let mut out: Vec<(u32, f64)> = acc.into_iter().filter(|&(_, v)| v != 0.0).collect();
    out.sort_by_key(|&(r, _)| r);
    out
}

/// Left translation by `s`: `δ_w ↦ δ_{nf(s·w)}`, boundary columns marked.
pub fn lambda_matrix(p: &Presentation, ball: &Ball, s: &Word) -> BallOperator {
    let cols = ball
        .words
        .iter()
        .map(|w| {
            let img = normalize(p, &s.concat(w)).ok()?;
            let idx = ball.index_of(&img)?;
            Some(vec![(idx, 1.0)])
        })
        .collect();
    BallOperator { dim: ball.len(), cols, depth: s.len().max(1) }
}

/// Adjoint of the left translation: `δ_w ↦ δ_{s^{-1}w}` when `s` divides `w`,
/// zero otherwise.
pub fn lambda_star_matrix(p: &Presentation, ball: &Ball, s: &Word, budget: usize) -> BallOperator {
    let cols = ball
        .words
        .iter()
        .map(|w| match divide(p, s, w, budget) {
            DivideOutcome::Quotient(q) => {
                let idx = ball.index_of(&q)?;
                Some(vec![(idx, 1.0)])
            }
            DivideOutcome::NotDivisible => Some(Vec::new()),
            DivideOutcome::Unknown => None,
        })
        .collect();
    BallOperator { dim: ball.len(), cols, depth: s.len().max(1) }
}

/// Evaluate a hull element column-wise.
pub fn hull_matrix(
    p: &Presentation,
    ball: &Ball,
    h: &crate::hull::HullElement,
    budget: usize,
) -> BallOperator {
    let cols = ball
        .words
        .iter()
        .map(|w| match crate::hull::apply(p, h, w, budget) {
            crate::hull::ApplyResult::Image(img) => {
                let idx = ball.index_of(&img)?;
                Some(vec![(idx, 1.0)])
            }
            crate::hull::ApplyResult::Undefined => Some(Vec::new()),
            crate::hull::ApplyResult::Unknown => None,
        })
        .collect();
    BallOperator { dim: ball.len(), cols, depth: h.zigzag_len().max(1) }
}

/// Diagonal projection onto an ideal's trace.
pub fn indicator_matrix(p: &Presentation, ball: &Ball, expr: &IdealExpr, budget: usize) -> BallOperator {
    let (fp, unknown) = ideals::fingerprint_of(p, ball, expr, budget);
    let cols = (0..ball.len())
        .map(|i| {
            if unknown.get(i) {
                None
            } else if fp.get(i) {
                Some(vec![(i as u32, 1.0)])
            } else {
                Some(Vec::new())
            }
        })
        .collect();
    BallOperator { dim: ball.len(), cols, depth: 0 }
}

/// Operator polynomials over translations, their adjoints, indicator
/// projections and integer scalars.
#[derive(Debug, Clone, PartialEq)]
pub enum OpExpr {
    Scalar(f64),
    Lambda(Word),
    LambdaStar(Word),
    Indicator(IdealExpr),
    Neg(Box<OpExpr>),
    Add(Box<OpExpr>, Box<OpExpr>),
    Sub(Box<OpExpr>, Box<OpExpr>),
    Mul(Box<OpExpr>, Box<OpExpr>),
}

impl OpExpr {
    /// Longest chain of translation factors: the depth used for interior
    /// masking.
    pub fn depth(&self) -> usize {
        match self {
            OpExpr::Scalar(_) | OpExpr::Indicator(_) => 0,
            OpExpr::Lambda(s) | OpExpr::LambdaStar(s) => s.len().max(1),
            OpExpr::Neg(e) => e.depth(),
            OpExpr::Add(a, b) | OpExpr::Sub(a, b) => a.depth().max(b.depth()),
            OpExpr::Mul(a, b) => a.depth() + b.depth(),
        }
    }
}

/// Parse `(L[a]-1)*(L[c]-1)*P[Family(b)]`-style expressions: atoms `L[word]`,
/// `Lstar[word]`, `P[ideal]`, integer scalars; operators `+ - *`, parentheses.
pub fn parse_op_expr(p: &Presentation, text: &str) -> Result<OpExpr, String> {
    let tokens = tokenize(text)?;
    let mut parser = OpParser { p, tokens, pos: 0 };
    let expr = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(format!("trailing input at token {}", parser.pos));
    }
    Ok(expr)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(i64),
    Atom(String), // L[...], Lstar[...], P[...]
    Plus,
    Minus,
    Star,
    Open,
    Close,
}

fn tokenize(text: &str) -> Result<Vec<Tok>, String> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                out.push(Tok::Star);
                i += 1;
            }
            '(' => {
                out.push(Tok::Open);
                i += 1;
            }
            ')' => {
                out.push(Tok::Close);
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let n: i64 = chars[start..i]
                    .iter()
                    .collect::<String>()
                    .parse()
                    .map_err(|_| "bad integer")?;
                out.push(Tok::Int(n));
            }
            c if c.is_alphabetic() => {
                let start = i;
                while i < chars.len() && chars[i].is_alphanumeric() {
                    i += 1;
                }
                if i >= chars.len() || chars[i] != '[' {
                    return Err(format!(
                        "expected `[` after `{}`",
                        chars[start..i].iter().collect::<String>()
                    ));
                }
                let mut depth = 0usize;
                let atom_start = start;
                loop {
                    if i >= chars.len() {
                        return Err("unbalanced `[`".into());
                    }
                    match chars[i] {
                        '[' => depth += 1,
                        ']' => {
                            depth -= 1;
                            if depth == 0 {
                                i += 1;
                                break;
                            }
                        }
                        _ => {}
                    }
                    i += 1;
                }
                out.push(Tok::Atom(chars[atom_start..i].iter().collect()));
            }
            other => return Err(format!("unexpected character `{other}`")),
        }
    }
    Ok(out)
}

struct OpParser<'a> {
    p: &'a Presentation,
    tokens: Vec<Tok>,
    pos: usize,
}

impl<'a> OpParser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn expr(&mut self) -> Result<OpExpr, String> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = OpExpr::Add(Box::new(acc), Box::new(rhs));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = OpExpr::Sub(Box::new(acc), Box::new(rhs));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<OpExpr, String> {
        let mut acc = self.factor()?;
        while matches!(self.peek(), Some(Tok::Star)) {
            self.pos += 1;
            let rhs = self.factor()?;
            acc = OpExpr::Mul(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<OpExpr, String> {
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(OpExpr::Scalar(n as f64))
            }
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(OpExpr::Neg(Box::new(self.factor()?)))
            }
            Some(Tok::Open) => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(&Tok::Close) {
                    return Err("missing `)`".into());
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(Tok::Atom(text)) => {
                self.pos += 1;
                let open = text.find('[').expect("atom carries brackets");
                let head = &text[..open];
                let inner = &text[open + 1..text.len() - 1];
                match head {
                    "L" => Ok(OpExpr::Lambda(self.p.parse_word(inner)?)),
                    "Lstar" => Ok(OpExpr::LambdaStar(self.p.parse_word(inner)?)),
                    "P" => Ok(OpExpr::Indicator(ideals::parse_ideal(self.p, inner)?)),
                    other => Err(format!("unknown atom `{other}`")),
                }
            }
            other => Err(format!("unexpected token {other:?}")),
        }
    }
}

pub struct KernelReport {
    pub max_residual: f64,
    pub depth: usize,
    pub columns_evaluated: usize,
    pub columns_skipped: usize,
}

struct Evaluator<'a> {
    p: &'a Presentation,
    ball: &'a Ball,
    budget: usize,
    indicators: HashMap<String, (ideals::Fingerprint, ideals::Fingerprint)>,
}

type SparseVec = HashMap<u32, f64>;

impl<'a> Evaluator<'a> {
    fn new(p: &'a Presentation, ball: &'a Ball, budget: usize) -> Self {
        Evaluator { p, ball, budget, indicators: HashMap::new() }
    }

    fn indicator_fp(&mut self, expr: &IdealExpr) -> (ideals::Fingerprint, ideals::Fingerprint) {
        let key = ideals::display_ideal(self.p, expr);
        if let Some(cached) = self.indicators.get(&key) {
            return cached.clone();
        }
        let fps = ideals::fingerprint_of(self.p, self.ball, expr, self.budget);
        self.indicators.insert(key, fps.clone());
        fps
    }

    fn apply(&mut self, expr: &OpExpr, vec: &SparseVec) -> Option<SparseVec> {
        match expr {
            OpExpr::Scalar(c) => Some(vec.iter().map(|(&i, &v)| (i, c * v)).collect()),
            OpExpr::Neg(e) => {
                let inner = self.apply(e, vec)?;
                Some(inner.into_iter().map(|(i, v)| (i, -v)).collect())
            }
            OpExpr::Add(a, b) => {
                let mut left = self.apply(a, vec)?;
                let right = self.apply(b, vec)?;
                for (i, v) in right {
                    *left.entry(i).or_insert(0.0) += v;
                }
                Some(left)
            }
            OpExpr::Sub(a, b) => {
                let mut left = self.apply(a, vec)?;
                let right = self.apply(b, vec)?;
                for (i, v) in right {
                    *left.entry(i).or_insert(0.0) -= v;
                }
                Some(left)
            }
            OpExpr::Mul(a, b) => {
                let mid = self.apply(b, vec)?;
                self.apply(a, &mid)
            }
            OpExpr::Lambda(s) => {
                let mut out: SparseVec = HashMap::new();
                for (&i, &v) in vec {
                    let w = self.ball.word(i);
                    let img = normalize(self.p, &s.concat(w)).ok()?;
                    let idx = self.ball.index_of(&img)?;
                    *out.entry(idx).or_insert(0.0) += v;
                }
                Some(out)
            }
            OpExpr::LambdaStar(s) => {
                let mut out: SparseVec = HashMap::new();
                for (&i, &v) in vec {
                    let w = self.ball.word(i);
                    match divide(self.p, s, w, self.budget) {
                        DivideOutcome::Quotient(q) => {
                            let idx = self.ball.index_of(&q)?;
                            *out.entry(idx).or_insert(0.0) += v;
                        }
                        DivideOutcome::NotDivisible => {}
                        DivideOutcome::Unknown => return None,
                    }
                }
                Some(out)
            }
            OpExpr::Indicator(ideal) => {
                let (fp, unknown) = self.indicator_fp(ideal);
                let mut out: SparseVec = HashMap::new();
                for (&i, &v) in vec {
                    if unknown.get(i as usize) {
                        return None;
                    }
                    if fp.get(i as usize) {
                        out.insert(i, v);
                    }
                }
                Some(out)
            }
        }
    }
}

/// Evaluate the polynomial on every interior basis vector and return the
/// maximum Euclidean norm of the image. Zero certifies the identity at this
/// truncation.
pub fn kernel_witness_check(
    p: &Presentation,
    ball: &Ball,
    expr: &OpExpr,
    budget: usize,
) -> KernelReport {
    let depth = expr.depth();
    let interior = ball.interior_indices(depth);
    let mut eval = Evaluator::new(p, ball, budget);
    let mut max_residual = 0.0f64;
    let mut evaluated = 0usize;
    let mut skipped = 0usize;
    for i in interior {
        let mut start: SparseVec = HashMap::new();
        start.insert(i, 1.0);
        match eval.apply(expr, &start) {
            Some(v) => {
                evaluated += 1;
                let norm = v.values().map(|x| x * x).sum::<f64>().sqrt();
                max_residual = max_residual.max(norm);
            }
            None => skipped += 1,
        }
    }
    KernelReport { max_residual, depth, columns_evaluated: evaluated, columns_skipped: skipped }
}

#[derive(Debug, Clone, Serialize)]
pub struct R4Report {
    pub cover_holds_on_ball: bool,
    pub max_residual: f64,
    pub columns_evaluated: usize,
}

/// Evaluate `∏_i (1_X - 1_{X_i})` on interior vectors. The product of
/// commuting diagonal 0/1 projections is diagonal, so this is a pointwise
/// Boolean identity; the報 cover hypothesis is checked on the ball first.
pub fn r4_check(
    p: &Presentation,
    ball: &Ball,
    x: &IdealExpr,
    covers: &[IdealExpr],
    budget: usize,
) -> R4Report {
    let (x_fp, _) = ideals::fingerprint_of(p, ball, x, budget);
    let mut union = ideals::Fingerprint::zeros(ball.len());
    let cover_fps: Vec<ideals::Fingerprint> = covers
        .iter()
        .map(|c| {
            let (fp, _) = ideals::fingerprint_of(p, ball, c, budget);
            union = union.or(&fp);
            fp
        })
        .collect();
    let cover_holds_on_ball = union == x_fp;
    let interior = ball.interior_indices(0);
    let mut max_residual = 0.0f64;
    for &i in &interior {
        let mut val = 1.0f64;
        for fp in &cover_fps {
            let factor = (x_fp.get(i as usize) as i32 - fp.get(i as usize) as i32) as f64;
            val *= factor;
        }
        max_residual = max_residual.max(val.abs());
    }
    R4Report { cover_holds_on_ball, max_residual, columns_evaluated: interior.len() }
}

/// Normalized trace of `|(1/m) Σ_{k=1..m} u^k|²` for the m×m cyclic shift
/// `u`; equals `1/m`.
pub fn lemma16_b_trace(m: usize) -> f64 {
    assert!(m >= 2, "m must be at least 2");
    let mut shift = vec![vec![0.0f64; m]; m];
    for j in 0..m {
        shift[(j + 1) % m][j] = 1.0;
    }
    let mut acc = vec![vec![0.0f64; m]; m];
    let mut power = identity_dense(m);
    for _ in 1..=m {
        power = dense_mul(&shift, &power);
        for (arow, prow) in acc.iter_mut().zip(&power) {
            for (a, &v) in arow.iter_mut().zip(prow) {
                *a += v;
            }
        }
    }
    let avg: Vec<Vec<f64>> = acc
        .iter()
        .map(|row| row.iter().map(|v| v / m as f64).collect())
        .collect();
    let avg_t: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| avg[j][i]).collect())
        .collect();
    let b = dense_mul(&avg_t, &avg);
    let trace: f64 = (0..m).map(|i| b[i][i]).sum();
    trace / m as f64
}

fn identity_dense(m: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0f64; m]; m];
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    out
}

fn dense_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = a.len();
    let mut out = vec![vec![0.0f64; m]; m];
    for i in 0..m {
        for k in 0..m {
            let v = a[i][k];
            if v == 0.0 {
                continue;
            }
            for j in 0..m {
                out[i][j] += v * b[k][j];
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderBound {
    Finite(usize),
    Infinite,
}

#[derive(Debug, Clone, Serialize)]
pub struct EpsBound {
    /// Strictly admissible value: half of the supremum.
    pub eps: f64,
    pub supremum: f64,
    /// The order actually used (`m`, or the smallest `m'` with `1/m' < α`).
    pub m_used: usize,
}

/// The separation margin: the largest `ε` with `α(1-mε)² > 1/m` (finite
/// order), or `1-m'ε > 1/√(m'α)` with `m'` minimal such that `1/m' < α`
/// (infinite order). Returns half of the supremum together with the
/// supremum itself.
pub fn lemma16_eps(m: OrderBound, alpha: f64) -> Result<EpsBound, String> {
    let m_used = match m {
        OrderBound::Finite(m) => {
            if m < 2 {
                return Err("order must be at least 2".into());
            }
            if alpha <= 1.0 / m as f64 {
                return Err(format!("alpha must exceed 1/{m}"));
            }
            m
        }
        OrderBound::Infinite => {
            if alpha <= 0.0 {
                return Err("alpha must be positive".into());
            }
            let mut mp = (1.0 / alpha).floor() as usize + 1;
            while 1.0 / mp as f64 >= alpha {
                mp += 1;
            }
            mp
        }
    };
    // both branches solve 1 - m·ε = 1/sqrt(m·α)
    let supremum = (1.0 - 1.0 / (m_used as f64 * alpha).sqrt()) / m_used as f64;
    if supremum <= 0.0 {
        return Err("degenerate bound: supremum is not positive".into());
    }
    Ok(EpsBound { eps: supremum / 2.0, supremum, m_used })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hull;
    use crate::presentation::Presentation;
    use crate::words::Window;

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

    fn s() -> Presentation {
        Presentation::parse(S_PRES).unwrap()
    }

    fn w(p: &Presentation, text: &str) -> Word {
        p.parse_word(text).unwrap()
    }

    const B: usize = 4_000;

    #[test]
    fn lambda_moves_basis_vectors() {
        let p = s();
        let ball = Ball::enumerate(&p, 3, Window::symmetric(1));
        let la = lambda_matrix(&p, &ball, &w(&p, "a"));
        let by0 = ball.index_of(&w(&p, "b y[0]")).unwrap();
        let by1 = ball.index_of(&w(&p, "b y[1]")).unwrap();
        assert_eq!(la.column(by0), Some(&[(by1, 1.0)][..]));
        // identity on the ball
        let le = lambda_matrix(&p, &ball, &Word::empty());
        for i in 0..ball.len() as u32 {
            assert_eq!(le.column(i), Some(&[(i, 1.0)][..]));
        }
    }

    #[test]
    fn lambda_is_partial_permutation() {
        let p = s();
        let ball = Ball::enumerate(&p, 3, Window::symmetric(1));
        for text in ["a", "b", "a b"] {
            let m = lambda_matrix(&p, &ball, &w(&p, text));
            let mut seen = std::collections::HashSet::new();
            for col in m.cols.iter().flatten() {
                assert!(col.len() <= 1);
                for &(r, v) in col {
                    assert_eq!(v, 1.0);
                    assert!(seen.insert(r), "two columns hit row {r}");
                }
            }
        }
    }

    #[test]
    fn product_matches_product_word_on_interior() {
        let p = s();
        let ball = Ball::enumerate(&p, 4, Window::symmetric(2));
        let la = lambda_matrix(&p, &ball, &w(&p, "a"));
        let lb = lambda_matrix(&p, &ball, &w(&p, "b"));
        let lab = lambda_matrix(&p, &ball, &w(&p, "a b"));
        let product = la.mul(&lb);
        let interior = ball.interior_indices(2);
        assert!(!interior.is_empty());
        let dist = product.max_column_distance(&lab, &interior).unwrap();
        assert_eq!(dist, 0.0);
    }

    #[test]
    fn adjoint_is_left_inverse_on_interior() {
        let p = s();
        let ball = Ball::enumerate(&p, 4, Window::symmetric(2));
        for text in ["a", "b"] {
            let word = w(&p, text);
            let l = lambda_matrix(&p, &ball, &word);
            let lstar = lambda_star_matrix(&p, &ball, &word, B);
            let product = lstar.mul(&l);
            let interior = ball.interior_indices(2);
            let id = BallOperator::identity(ball.len());
            let dist = product.max_column_distance(&id, &interior).unwrap();
            assert_eq!(dist, 0.0, "λ* λ must be the identity for {text}");
        }
    }

    #[test]
    fn hull_matrix_respects_composition() {
        let p = s();
        let ball = Ball::enumerate(&p, 4, Window::symmetric(2));
        let h1 = hull::parse_zigzag(&p, "a^-1 b").unwrap();
        let h2 = hull::parse_zigzag(&p, "b^-1 a").unwrap();
        let m1 = hull_matrix(&p, &ball, &h1, B);
        let m2 = hull_matrix(&p, &ball, &h2, B);
        let composed = hull_matrix(&p, &ball, &hull::compose(&p, &h1, &h2), B);
        let product = m1.mul(&m2);
        let interior = ball.interior_indices(composed.depth.max(product.depth));
        let dist = product.max_column_distance(&composed, &interior).unwrap();
        assert_eq!(dist, 0.0);
    }

    #[test]
    fn indicators_commute_and_respect_intersection() {
        let p = s();
        let ball = Ball::enumerate(&p, 3, Window::symmetric(1));
        let ia = indicator_matrix(&p, &ball, &IdealExpr::Principal(w(&p, "a")), B);
        let ib = indicator_matrix(&p, &ball, &IdealExpr::Principal(w(&p, "b")), B);
        let meet = indicator_matrix(
            &p,
            &ball,
            &IdealExpr::Intersect(
                Box::new(IdealExpr::Principal(w(&p, "a"))),
                Box::new(IdealExpr::Principal(w(&p, "b"))),
            ),
            B,
        );
        let all: Vec<u32> = (0..ball.len() as u32).collect();
        assert_eq!(ia.mul(&ib).max_column_distance(&ib.mul(&ia), &all).unwrap(), 0.0);
        assert_eq!(ia.mul(&ib).max_column_distance(&meet, &all).unwrap(), 0.0);
        // family indicator fixes family members only
        let fam = indicator_matrix(&p, &ball, &IdealExpr::Family(w(&p, "b")), B);
        let bx0 = ball.index_of(&w(&p, "b x[0]")).unwrap();
        let a = ball.index_of(&w(&p, "a")).unwrap();
        assert_eq!(fam.column(bx0), Some(&[(bx0, 1.0)][..]));
        assert_eq!(fam.column(a), Some(&[][..]));
    }

    #[test]
    fn kernel_identity_for_t() {
        let p = Presentation::parse(T_PRES).unwrap();
        let ball = Ball::enumerate(&p, 5, Window::symmetric(2));
        let expr = parse_op_expr(&p, "(L[a]-1)*(L[c]-1)*P[Family(b)]").unwrap();
        assert_eq!(expr.depth(), 2);
        let report = kernel_witness_check(&p, &ball, &expr, B);
        assert!(report.columns_evaluated > 0);
        assert!(
            report.max_residual <= ZERO_TOLERANCE,
            "residual {} on {} columns",
            report.max_residual,
            report.columns_evaluated
        );
    }

    #[test]
    fn kernel_residual_positive_for_s() {
        let p = s();
        let ball = Ball::enumerate(&p, 5, Window::symmetric(2));
        let expr = parse_op_expr(&p, "(L[a]-1)*P[Family(b)]").unwrap();
        let report = kernel_witness_check(&p, &ball, &expr, B);
        assert!(report.max_residual >= 1.0, "a moves b y[n]: {}", report.max_residual);
    }

    #[test]
    fn kernel_zero_polynomial() {
        let p = s();
        let ball = Ball::enumerate(&p, 3, Window::symmetric(1));
        let report = kernel_witness_check(&p, &ball, &OpExpr::Scalar(0.0), B);
        assert_eq!(report.max_residual, 0.0);
    }

    #[test]
    fn r4_examples() {
        let p = s();
        let ball = Ball::enumerate(&p, 4, Window::symmetric(1));
        // single cover: the factor vanishes
        let x = IdealExpr::Principal(w(&p, "b"));
        let report = r4_check(&p, &ball, &x, std::slice::from_ref(&x), B);
        assert!(report.cover_holds_on_ball);
        assert_eq!(report.max_residual, 0.0);
        // the family as union of its windowed principal columns
        let fam = IdealExpr::Family(w(&p, "b"));
        let covers: Vec<IdealExpr> = Window::symmetric(1)
            .indices()
            .flat_map(|n| {
                [
                    IdealExpr::Principal(w(&p, &format!("b x[{n}]"))),
                    IdealExpr::Principal(w(&p, &format!("b y[{n}]"))),
                ]
            })
            .collect();
        let report = r4_check(&p, &ball, &fam, &covers, B);
        assert!(report.cover_holds_on_ball, "family trace must equal the union on the ball");
        assert_eq!(report.max_residual, 0.0);
        // cover hypothesis failure is reported
        let report = r4_check(&p, &ball, &IdealExpr::Full, &[IdealExpr::Principal(w(&p, "a"))], B);
        assert!(!report.cover_holds_on_ball);
    }

    #[test]
    fn trace_of_averaged_shift_powers() {
        for m in 2..=8 {
            let trace = lemma16_b_trace(m);
            assert!(
                (trace - 1.0 / m as f64).abs() <= ZERO_TOLERANCE,
                "m={m}: got {trace}"
            );
        }
    }

    #[test]
    fn eps_bound_examples() {
        let b = lemma16_eps(OrderBound::Finite(2), 0.6).unwrap();
        assert!((b.supremum - 0.04356).abs() < 5e-4, "{}", b.supremum);
        assert!((b.eps - 0.02178).abs() < 5e-4, "{}", b.eps);
        // substitution check: alpha (1 - m eps)^2 > 1/m strictly
        assert!(0.6 * (1.0 - 2.0 * b.eps).powi(2) > 0.5);

        assert!(lemma16_eps(OrderBound::Finite(2), 0.5).is_err());

        let inf = lemma16_eps(OrderBound::Infinite, 0.6).unwrap();
        assert_eq!(inf.m_used, 2);
        assert!((inf.supremum - b.supremum).abs() < 1e-15);
    }

    #[test]
    fn op_expr_parser_roundtrips() {
        let p = s();
        let e = parse_op_expr(&p, "(L[a] - 1) * P[Family(b)] + 2*Lstar[b]").unwrap();
        assert_eq!(e.depth(), 1);
        assert!(parse_op_expr(&p, "L[a] +").is_err());
        assert!(parse_op_expr(&p, "Q[a]").is_err());
        assert!(parse_op_expr(&p, "L[q]").is_err());
        let e = parse_op_expr(&p, "L[a b]*L[b]").unwrap();
        assert_eq!(e.depth(), 3);
    }
}
