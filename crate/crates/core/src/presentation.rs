//! Presentation files: an indexed alphabet plus oriented rewrite-rule schemas.
//!
//! The accepted grammar is line based:
//!
//! ```text
//! # comment
//! letters: a, b, x[n], y[n]
//! rules:
//!   a b x[n] -> b x[n]
//!   a b y[n] -> b y[n+1]
//! ```
//!
//! Rule schemas may use integer offsets (`y[n+1]`, `x[n-2]`) and concrete
//! indices (`x[0]`). Every index variable on the right side must occur on the
//! left side. Words on the command line use the same letter syntax, with `e`
//! (or the empty string) for the identity.

use crate::words::{Letter, SymbolId, Window, Word};
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolDecl {
    pub name: String,
    pub indexed: bool,
}

/// Index slot of a pattern letter inside a rule schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexPattern {
    Const(i16),
    Var { var: u8, offset: i16 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatternLetter {
    pub symbol: SymbolId,
    pub index: Option<IndexPattern>,
}

/// One oriented rewrite rule `lhs -> rhs`, with formal index variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSchema {
    pub lhs: Vec<PatternLetter>,
    pub rhs: Vec<PatternLetter>,
    pub var_names: Vec<String>,
}

impl RuleSchema {
    pub fn n_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn is_length_reducing(&self) -> bool {
        self.lhs.len() > self.rhs.len()
    }

    pub fn is_length_preserving(&self) -> bool {
        self.lhs.len() == self.rhs.len()
    }

    /// True when every index slot is a variable slot, so the schema commutes
    /// with the index-shift automorphism.
    pub fn is_shift_invariant(&self) -> bool {
        self.lhs
            .iter()
            .chain(self.rhs.iter())
            .all(|pl| !matches!(pl.index, Some(IndexPattern::Const(_))))
    }
}

#[derive(Debug, Error)]
#[error("line {line}, col {col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError { line, col, message: message.into() }
    }
}

/// A finitely presented monoid over an indexed alphabet.
#[derive(Debug, Clone)]
pub struct Presentation {
    pub symbols: Vec<SymbolDecl>,
    pub rules: Vec<RuleSchema>,
    by_name: HashMap<String, SymbolId>,
}

impl Presentation {
    pub fn parse(text: &str) -> Result<Presentation, ParseError> {
        Parser::new(text).run()
    }

    pub fn symbol(&self, name: &str) -> Option<SymbolId> {
        self.by_name.get(name).copied()
    }

    pub fn symbol_name(&self, id: SymbolId) -> &str {
        &self.symbols[id.0 as usize].name
    }

    pub fn is_indexed(&self, id: SymbolId) -> bool {
        self.symbols[id.0 as usize].indexed
    }

    pub fn indexed_symbols(&self) -> impl Iterator<Item = SymbolId> + '_ {
        self.symbols
            .iter()
            .enumerate()
            .filter(|(_, d)| d.indexed)
            .map(|(i, _)| SymbolId(i as u8))
    }

    /// All letters usable inside `window`, in declaration order.
    pub fn letters_in(&self, window: Window) -> Vec<Letter> {
        let mut out = Vec::new();
        for (i, decl) in self.symbols.iter().enumerate() {
            let id = SymbolId(i as u8);
            if decl.indexed {
                out.extend(window.indices().map(|n| Letter::indexed(id, n)));
            } else {
                out.push(Letter::plain(id));
            }
        }
        out
    }

    /// True when every rule is length-reducing.
    pub fn is_length_reducing(&self) -> bool {
        self.rules.iter().all(|r| r.is_length_reducing())
    }

    pub fn is_shift_invariant(&self) -> bool {
        self.rules.iter().all(|r| r.is_shift_invariant())
    }

    /// Parse a concrete word: whitespace-separated letters, `e` or an empty
    /// string for the identity.
    pub fn parse_word(&self, text: &str) -> Result<Word, String> {
        let text = text.trim();
        if text.is_empty() || text == "e" {
            return Ok(Word::empty());
        }
        let mut word = Word::empty();
        for token in text.split_whitespace() {
            word.push(self.parse_letter(token)?);
        }
        Ok(word)
    }

    pub fn parse_letter(&self, token: &str) -> Result<Letter, String> {
        let (name, index) = split_letter_token(token)?;
        let id = self
            .symbol(name)
            .ok_or_else(|| format!("undeclared symbol `{name}`"))?;
        match (self.is_indexed(id), index) {
            (true, Some(ix)) => {
                let n: i16 = ix
                    .parse()
                    .map_err(|_| format!("`{token}`: index must be an integer"))?;
                Ok(Letter::indexed(id, n))
            }
            (true, None) => Err(format!("`{name}` is an indexed family; write {name}[n]")),
            (false, Some(_)) => Err(format!("`{name}` is not an indexed family")),
            (false, None) => Ok(Letter::plain(id)),
        }
    }

    pub fn display_letter(&self, letter: Letter) -> String {
        match letter.index {
            Some(n) => format!("{}[{}]", self.symbol_name(letter.symbol), n),
            None => self.symbol_name(letter.symbol).to_string(),
        }
    }

    pub fn display_word(&self, word: &Word) -> String {
        if word.is_empty() {
            return "e".to_string();
        }
        word.letters()
            .iter()
            .map(|&l| self.display_letter(l))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let decls: Vec<String> = self
            .symbols
            .iter()
            .map(|d| if d.indexed { format!("{}[n]", d.name) } else { d.name.clone() })
            .collect();
        writeln!(f, "letters: {}", decls.join(", "))?;
        writeln!(f, "rules:")?;
        for rule in &self.rules {
            let side = |pats: &[PatternLetter]| -> String {
                if pats.is_empty() {
                    return "e".into();
                }
                pats.iter()
                    .map(|pl| {
                        let name = self.symbol_name(pl.symbol);
                        match pl.index {
                            None => name.to_string(),
                            Some(IndexPattern::Const(c)) => format!("{name}[{c}]"),
                            Some(IndexPattern::Var { var, offset }) => {
                                let v = &rule.var_names[var as usize];
                                match offset {
                                    0 => format!("{name}[{v}]"),
                                    o if o > 0 => format!("{name}[{v}+{o}]"),
                                    o => format!("{name}[{v}{o}]"),
                                }
                            }
                        }
                    })
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            writeln!(f, "  {} -> {}", side(&rule.lhs), side(&rule.rhs))?;
        }
        Ok(())
    }
}

fn split_letter_token(token: &str) -> Result<(&str, Option<&str>), String> {
    match token.find('[') {
        None => {
            if token.is_empty() || !token.chars().all(|c| c.is_alphanumeric() || c == '_') {
                return Err(format!("bad letter token `{token}`"));
            }
            Ok((token, None))
        }
        Some(open) => {
            if !token.ends_with(']') {
                return Err(format!("`{token}`: missing closing bracket"));
            }
            let name = &token[..open];
            let inner = &token[open + 1..token.len() - 1];
            if name.is_empty() || inner.is_empty() {
                return Err(format!("bad letter token `{token}`"));
            }
            Ok((name, Some(inner)))
        }
    }
}

struct Parser<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, raw)| {
                let body = match raw.find('#') {
                    Some(h) => &raw[..h],
                    None => raw,
                };
                (i + 1, body)
            })
            .filter(|(_, body)| !body.trim().is_empty())
            .collect();
        Parser { lines, pos: 0 }
    }

    fn run(mut self) -> Result<Presentation, ParseError> {
        let mut pres = self.parse_letters()?;
        self.parse_rules(&mut pres)?;
        Ok(pres)
    }

    fn parse_letters(&mut self) -> Result<Presentation, ParseError> {
        let (line_no, line) = *self
            .lines
            .get(self.pos)
            .ok_or_else(|| ParseError::new(1, 1, "empty presentation: expected `letters:`"))?;
        self.pos += 1;
        let rest = line
            .trim()
            .strip_prefix("letters:")
            .ok_or_else(|| ParseError::new(line_no, 1, "expected `letters:` header"))?;
        let mut symbols = Vec::new();
        let mut by_name = HashMap::new();
        for raw in rest.split(',') {
            let token = raw.trim();
            if token.is_empty() {
                continue;
            }
            let col = line.find(token).map(|c| c + 1).unwrap_or(1);
            let (name, index) = split_letter_token(token)
                .map_err(|m| ParseError::new(line_no, col, m))?;
            let indexed = match index {
                None => false,
                Some(v) if is_ident(v) => true,
                Some(v) => {
                    return Err(ParseError::new(
                        line_no,
                        col,
                        format!("family declaration index `{v}` must be an identifier"),
                    ))
                }
            };
            if by_name.contains_key(name) {
                return Err(ParseError::new(line_no, col, format!("duplicate symbol `{name}`")));
            }
            if symbols.len() == u8::MAX as usize {
                return Err(ParseError::new(line_no, col, "too many symbols"));
            }
            by_name.insert(name.to_string(), SymbolId(symbols.len() as u8));
            symbols.push(SymbolDecl { name: name.to_string(), indexed });
        }
        if symbols.is_empty() {
            return Err(ParseError::new(line_no, 1, "alphabet must declare at least one symbol"));
        }
        Ok(Presentation { symbols, rules: Vec::new(), by_name })
    }

    fn parse_rules(&mut self, pres: &mut Presentation) -> Result<(), ParseError> {
        let Some(&(line_no, line)) = self.lines.get(self.pos) else {
            return Ok(()); // rule-free presentation (free monoid)
        };
        if line.trim() != "rules:" {
            return Err(ParseError::new(line_no, 1, "expected `rules:` header"));
        }
        self.pos += 1;
        while let Some(&(line_no, line)) = self.lines.get(self.pos) {
            self.pos += 1;
            let rule = parse_rule_line(pres, line_no, line)?;
            pres.rules.push(rule);
        }
        Ok(())
    }
}

fn is_ident(s: &str) -> bool {
    !s.is_empty()
        && s.chars().next().unwrap().is_alphabetic()
        && s.chars().all(|c| c.is_alphanumeric() || c == '_')
}

fn parse_rule_line(pres: &Presentation, line_no: usize, line: &str) -> Result<RuleSchema, ParseError> {
    let col_of = |tok: &str| line.find(tok).map(|c| c + 1).unwrap_or(1);
    let (lhs_text, rhs_text) = line
        .split_once("->")
        .ok_or_else(|| ParseError::new(line_no, 1, "rule must have the form lhs -> rhs"))?;

    let mut var_names: Vec<String> = Vec::new();
    let mut parse_side = |text: &str, binding: bool| -> Result<Vec<PatternLetter>, ParseError> {
        let text = text.trim();
        if text == "e" {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        for token in text.split_whitespace() {
            let col = col_of(token);
            let (name, index) =
                split_letter_token(token).map_err(|m| ParseError::new(line_no, col, m))?;
            let id = pres
                .symbol(name)
                .ok_or_else(|| ParseError::new(line_no, col, format!("undeclared symbol `{name}`")))?;
            let index = match (pres.is_indexed(id), index) {
                (false, None) => None,
                (false, Some(_)) => {
                    return Err(ParseError::new(
                        line_no,
                        col,
                        format!("`{name}` is not an indexed family"),
                    ))
                }
                (true, None) => {
                    return Err(ParseError::new(
                        line_no,
                        col,
                        format!("indexed family `{name}` needs an index expression"),
                    ))
                }
                (true, Some(expr)) => Some(parse_index_expr(expr, &mut var_names, binding).map_err(
                    |m| ParseError::new(line_no, col, m),
                )?),
            };
            out.push(PatternLetter { symbol: id, index });
        }
        Ok(out)
    };

    let lhs = parse_side(lhs_text, true)?;
    let rhs = parse_side(rhs_text, false)?;
    if lhs.is_empty() {
        return Err(ParseError::new(line_no, 1, "rule left side must be nonempty"));
    }
    Ok(RuleSchema { lhs, rhs, var_names })
}

/// Index expressions: `3`, `-1`, `n`, `n+1`, `n-2`.
fn parse_index_expr(expr: &str, vars: &mut Vec<String>, binding: bool) -> Result<IndexPattern, String> {
    let expr = expr.trim();
    if let Ok(c) = expr.parse::<i16>() {
        return Ok(IndexPattern::Const(c));
    }
    let (var, offset) = if let Some(plus) = expr.find('+') {
        let off: i16 = expr[plus + 1..]
            .trim()
            .parse()
            .map_err(|_| format!("bad index offset in `{expr}`"))?;
        (expr[..plus].trim(), off)
    } else if let Some(minus) = expr.rfind('-') {
        if minus == 0 {
            return Err(format!("bad index expression `{expr}`"));
        }
        let off: i16 = expr[minus + 1..]
            .trim()
            .parse()
            .map_err(|_| format!("bad index offset in `{expr}`"))?;
        (expr[..minus].trim(), -off)
    } else {
        (expr, 0)
    };
    if !is_ident(var) {
        return Err(format!("bad index variable `{var}`"));
    }
    let slot = match vars.iter().position(|v| v == var) {
        Some(i) => i,
        None if binding => {
            vars.push(var.to_string());
            vars.len() - 1
        }
        None => return Err(format!("index variable `{var}` is not bound on the left side")),
    };
    Ok(IndexPattern::Var { var: slot as u8, offset })
}
