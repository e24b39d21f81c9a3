//! Desk-scale computation for finitely presented left cancellative monoids
//! over integer-indexed alphabets: word normal forms, the left inverse hull,
//! the semilattice of constructible right ideals, semi-character spectra, and
//! regularity / Hausdorffness diagnostics on finite truncations.
//!
//! Everything is computed on a *ball*: the normal forms of bounded length
//! whose family indices stay in a bounded window. Checks report `holds`,
//! `fails` or `unknown` with certificates, never more than the truncation
//! supports.

pub mod cancel;
pub mod hull;
pub mod ideals;
pub mod presentation;
pub mod regrep;
pub mod regularity;
pub mod rewrite;
pub mod spectrum;
pub mod verdict;
pub mod words;

pub use presentation::{ParseError, Presentation, RuleSchema};
pub use rewrite::{equivalent, normalize, Ball, RewriteError};
pub use verdict::{Exhausted, Status, Verdict};
pub use words::{Letter, SymbolId, Window, Word};
