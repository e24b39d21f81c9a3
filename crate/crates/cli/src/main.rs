//! Command-line front end: loads a presentation, dispatches to the library,
//! and emits deterministic text or JSON reports.
//!
//! Exit codes: 0 every requested check holds, 1 some check fails (the report
//! carries the counterexample), 2 unknown (budget or truncation), 3 usage
//! error.

use clap::{Parser, Subcommand, ValueEnum};
use hull_lab_core::cancel;
use hull_lab_core::hull;
use hull_lab_core::ideals::{self, GeneralizedIdeal, IdealExpr};
use hull_lab_core::regrep::{self, OrderBound};
use hull_lab_core::regularity::{self, WitnessKind, WitnessOutcome};
use hull_lab_core::rewrite::{self, Ball};
use hull_lab_core::spectrum::{self, SeqSpec};
use hull_lab_core::verdict::Verdict;
use hull_lab_core::{Presentation, Window};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use std::process::ExitCode;
use std::sync::Arc;

const BUILTIN_CORPORA: &[(&str, &str)] = &[
    ("S", include_str!("../corpora/S.pres")),
    ("T", include_str!("../corpora/T.pres")),
    ("free2", include_str!("../corpora/free2.pres")),
];

#[derive(Parser)]
#[command(
    name = "hull-lab",
    version,
    about = "Rewriting, inverse hulls, right-ideal lattices and regularity diagnostics \
             for finitely presented left cancellative monoids"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format; JSON is the machine contract, text is derived from it.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, clap::Args)]
struct BallArgs {
    /// Maximum word length of the truncation.
    #[arg(long, default_value_t = 4)]
    radius: usize,
    /// Index window `a..b` for family letters.
    #[arg(long, default_value = "-2..2", allow_hyphen_values = true)]
    window: String,
    /// Cap on enumerated ball words; the effective radius is reported.
    #[arg(long, default_value_t = rewrite::DEFAULT_BALL_CAP)]
    ball_cap: usize,
}

impl BallArgs {
    fn window(&self) -> Result<Window, String> {
        Window::parse(&self.window)
    }

    fn ball(&self, p: &Presentation) -> Result<Ball, String> {
        Ok(Ball::enumerate_capped(p, self.radius, self.window()?, self.ball_cap))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the normal form of a word.
    Normalize { file: String, word: String },
    /// Bounded word-equivalence check with a relation-chain certificate.
    Equiv {
        file: String,
        w1: String,
        w2: String,
        #[arg(long, default_value_t = 12)]
        bound: usize,
    },
    /// Verify left cancellativity on the ball.
    CancelCheck {
        file: String,
        #[command(flatten)]
        ball: BallArgs,
        #[arg(long, default_value_t = 12)]
        bound: usize,
    },
    /// Does the first word left-divide the second?
    Divides {
        file: String,
        s: String,
        w: String,
        #[arg(long, default_value_t = 64)]
        bound: usize,
    },
    /// Constructible-ideal computations.
    Ideals {
        #[command(subcommand)]
        cmd: IdealsCmd,
    },
    /// Generator counts of pairwise intersections across widening windows.
    AlignCheck {
        file: String,
        #[arg(long, default_value_t = 3)]
        radius: usize,
        /// Widest window to test; every symmetric window up to it is reported.
        #[arg(long, default_value = "-3..3", allow_hyphen_values = true)]
        window: String,
        /// Pair of words "s,t"; defaults to all letter pairs.
        #[arg(long)]
        pair: Vec<String>,
        #[arg(long, default_value_t = 4_000)]
        bound: usize,
    },
    /// Semi-character computations on the tracked semilattice.
    Spectrum {
        #[command(subcommand)]
        cmd: SpectrumCmd,
    },
    /// Regularity witness search.
    Regularity {
        #[command(subcommand)]
        cmd: RegularityCmd,
    },
    /// Hausdorffness-failure witnesses.
    Hausdorff {
        #[command(subcommand)]
        cmd: HausdorffCmd,
    },
    /// Finite compressions of the left regular representation.
    Regrep {
        #[command(subcommand)]
        cmd: RegrepCmd,
    },
}

#[derive(Subcommand)]
enum IdealsCmd {
    /// Close {S} under letter preimages, translates and intersections.
    Closure {
        file: String,
        #[command(flatten)]
        ball: BallArgs,
        #[arg(long, default_value_t = 500)]
        budget: usize,
    },
    /// Intersect two ideals and classify the result.
    Intersect {
        file: String,
        ideal1: String,
        ideal2: String,
        #[command(flatten)]
        ball: BallArgs,
    },
    /// Tracked ideals containing every listed word.
    Containing {
        file: String,
        /// Word that must be contained (repeatable).
        #[arg(long = "word", required = true)]
        words: Vec<String>,
        #[command(flatten)]
        ball: BallArgs,
        #[arg(long, default_value_t = 500)]
        budget: usize,
    },
}

#[derive(Subcommand)]
enum SpectrumCmd {
    /// Point character of a word over the tracked list.
    Chi {
        file: String,
        word: String,
        #[command(flatten)]
        ball: BallArgs,
        #[arg(long, default_value_t = 500)]
        budget: usize,
    },
    /// Limit character of an indexed sequence such as "b x[n]".
    Limit {
        file: String,
        #[arg(long)]
        seq: String,
        #[command(flatten)]
        ball: BallArgs,
        #[arg(long, default_value_t = 500)]
        budget: usize,
        /// Tail samples per side; defaults to a third of the window.
        #[arg(long)]
        tail: Option<usize>,
    },
    /// Orbit-closure membership relative to the enumerated cover list.
    Omega {
        file: String,
        /// Point character of this word...
        #[arg(long, conflicts_with = "seq")]
        word: Option<String>,
        /// ...or limit character of this sequence.
        #[arg(long)]
        seq: Option<String>,
        #[command(flatten)]
        ball: BallArgs,
        #[arg(long, default_value_t = 500)]
        budget: usize,
        #[arg(long, default_value_t = 16)]
        max_parts: usize,
    },
}

#[derive(Subcommand)]
enum RegularityCmd {
    /// Search for a covering family of tracked ideals fixed by the listed
    /// hull elements.
    Check {
        file: String,
        #[arg(long, value_enum)]
        kind: RegKind,
        /// Base ideal, e.g. "Family(b)" or "b S".
        #[arg(long = "X")]
        x: String,
        /// Removed ideal (repeatable).
        #[arg(long = "minus")]
        minus: Vec<String>,
        /// Hull element in zigzag syntax (repeatable), e.g. "a", "b^-1 a b".
        #[arg(long = "h", required = true)]
        hs: Vec<String>,
        #[command(flatten)]
        ball: BallArgs,
        /// Witness-search budget: candidate (Y, k) evaluations.
        #[arg(long, default_value_t = 200)]
        budget: usize,
        #[arg(long, default_value_t = 300)]
        closure_budget: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RegKind {
    Strong,
    Cstar,
    GpEqG,
}

#[derive(Subcommand)]
enum HausdorffCmd {
    /// Scan letters against indexed sequences for distinct-limit witnesses.
    Scan {
        file: String,
        #[command(flatten)]
        ball: BallArgs,
        #[arg(long, default_value_t = 300)]
        closure_budget: usize,
        #[arg(long, default_value_t = 2)]
        prefix_len: usize,
    },
}

#[derive(Subcommand)]
enum RegrepCmd {
    /// Evaluate an operator polynomial on interior basis vectors.
    Eval {
        file: String,
        /// Expression over L[word], Lstar[word], P[ideal], integers, + - *.
        #[arg(long)]
        expr: String,
        #[command(flatten)]
        ball: BallArgs,
    },
    /// Check the union relation for indicator projections.
    R4 {
        file: String,
        #[arg(long = "X")]
        x: String,
        /// Cover member (repeatable).
        #[arg(long = "cover", required = true)]
        covers: Vec<String>,
        #[command(flatten)]
        ball: BallArgs,
    },
    /// Trace and separation-margin numerics for averaged shift powers.
    Lemma16 {
        /// Group order: an integer >= 2, or "inf".
        #[arg(long)]
        m: String,
        #[arg(long)]
        alpha: f64,
    },
}

struct Loaded {
    pres: Presentation,
    source: String,
    sha256: String,
}

fn load_presentation(path: &str) -> Result<Loaded, String> {
    let (name, text) = if let Ok(text) = std::fs::read_to_string(path) {
        (path.to_string(), text)
    } else {
        let stem = path
            .trim_start_matches('@')
            .rsplit('/')
            .next()
            .unwrap_or(path)
            .trim_end_matches(".pres");
        match BUILTIN_CORPORA.iter().find(|(n, _)| *n == stem) {
            Some((n, text)) => (format!("builtin:{n}"), text.to_string()),
            None => return Err(format!("cannot read `{path}` and no builtin matches it")),
        }
    };
    let pres = Presentation::parse(&text).map_err(|e| format!("{name}: {e}"))?;
    let sha256 = hex_digest(text.as_bytes());
    Ok(Loaded { pres, source: name, sha256 })
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Overall outcome of a command, mapped to the exit code.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Holds,
    Fails,
    Unknown,
    Info,
}

impl Outcome {
    fn as_str(self) -> &'static str {
        match self {
            Outcome::Holds => "holds",
            Outcome::Fails => "fails",
            Outcome::Unknown => "unknown",
            Outcome::Info => "info",
        }
    }

    fn exit(self) -> ExitCode {
        match self {
            Outcome::Holds | Outcome::Info => ExitCode::from(0),
            Outcome::Fails => ExitCode::from(1),
            Outcome::Unknown => ExitCode::from(2),
        }
    }
}

struct Report {
    command: String,
    presentation: Option<(String, String)>,
    params: Vec<(String, Value)>,
    outcome: Outcome,
    result: Value,
}

impl Report {
    fn to_json(&self) -> Value {
        let mut params = Map::new();
        for (k, v) in &self.params {
            params.insert(k.clone(), v.clone());
        }
        let mut root = Map::new();
        root.insert(
            "tool".into(),
            json!({"name": "hull-lab", "version": env!("CARGO_PKG_VERSION")}),
        );
        root.insert("command".into(), Value::String(self.command.clone()));
        if let Some((source, sha)) = &self.presentation {
            root.insert(
                "presentation".into(),
                json!({"source": source, "sha256": sha}),
            );
        }
        root.insert("params".into(), Value::Object(params));
        root.insert("status".into(), Value::String(self.outcome.as_str().into()));
        root.insert("result".into(), self.result.clone());
        Value::Object(root)
    }

    fn print(&self, format: Format) {
        let value = self.to_json();
        match format {
            Format::Json => println!("{}", serde_json::to_string_pretty(&value).unwrap()),
            Format::Text => {
                println!("{}: {}", self.command, self.outcome.as_str());
                render_text(&value["result"], 1);
            }
        }
    }
}

fn render_text(value: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                match v {
                    Value::Object(_) | Value::Array(_) => {
                        println!("{pad}{k}:");
                        render_text(v, indent + 1);
                    }
                    _ => println!("{pad}{k}: {}", plain(v)),
                }
            }
        }
        Value::Array(items) => {
            for v in items {
                match v {
                    Value::Object(_) | Value::Array(_) => {
                        println!("{pad}-");
                        render_text(v, indent + 1);
                    }
                    _ => println!("{pad}- {}", plain(v)),
                }
            }
        }
        other => println!("{pad}{}", plain(other)),
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(report) => {
            report.print(cli.format);
            report.outcome.exit()
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn ball_params(ball: &Ball, cap: usize) -> Vec<(String, Value)> {
    vec![
        ("radius".into(), json!(ball.radius_requested)),
        ("radius_effective".into(), json!(ball.radius)),
        ("window".into(), json!(ball.window.to_string())),
        ("ball_cap".into(), json!(cap)),
        ("ball_truncated".into(), json!(ball.truncated)),
        ("ball_size".into(), json!(ball.len())),
    ]
}

fn closure_for(
    loaded: &Loaded,
    args: &BallArgs,
    budget: usize,
) -> Result<(ideals::Closure, Vec<(String, Value)>), String> {
    let ball = Arc::new(args.ball(&loaded.pres)?);
    let mut params = ball_params(&ball, args.ball_cap);
    params.push(("closure_budget".into(), json!(budget)));
    let closure =
        ideals::semilattice_closure(&loaded.pres, ball, budget, ideals::DEFAULT_DIV_BUDGET);
    params.push(("tracked".into(), json!(closure.reps.len())));
    params.push(("saturated".into(), json!(closure.saturated)));
    Ok((closure, params))
}

fn character_value(
    p: &Presentation,
    closure: &ideals::Closure,
    chi: &spectrum::SemiCharacter,
) -> Value {
    let ones: Vec<String> = chi
        .ones()
        .iter()
        .map(|&i| ideals::display_ideal(p, &closure.reps[i as usize].expr))
        .collect();
    let flagged: Vec<String> = chi
        .values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_none())
        .map(|(i, _)| ideals::display_ideal(p, &closure.reps[i].expr))
        .collect();
    json!({
        "ones": ones,
        "flagged": flagged,
        "tracked_hash": format!("{:016x}", chi.tracked_hash),
    })
}

fn run(command: &Command) -> Result<Report, String> {
    match command {
        Command::Normalize { file, word } => {
            let loaded = load_presentation(file)?;
            let w = loaded.pres.parse_word(word)?;
            let nf = rewrite::normalize(&loaded.pres, &w).map_err(|e| e.to_string())?;
            Ok(Report {
                command: "normalize".into(),
                presentation: Some((loaded.source.clone(), loaded.sha256.clone())),
                params: vec![("word".into(), json!(word))],
                outcome: Outcome::Info,
                result: json!({"normal_form": loaded.pres.display_word(&nf)}),
            })
        }
        Command::Equiv { file, w1, w2, bound } => {
            let loaded = load_presentation(file)?;
            let a = loaded.pres.parse_word(w1)?;
            let b = loaded.pres.parse_word(w2)?;
            let verdict = rewrite::equivalent(&loaded.pres, &a, &b, *bound);
            let (outcome, result) = match &verdict {
                Verdict::Holds(chain) => (
                    Outcome::Holds,
                    json!({
                        "chain": chain.iter().map(|w| loaded.pres.display_word(w)).collect::<Vec<_>>(),
                        "chain_length": chain.len() - 1,
                    }),
                ),
                Verdict::Fails(ev) => (
                    Outcome::Fails,
                    json!({
                        "normal_form_1": loaded.pres.display_word(&ev.nf1),
                        "normal_form_2": loaded.pres.display_word(&ev.nf2),
                        "confluence_window": ev.confluence_window.to_string(),
                        "critical_pairs_checked": ev.critical_pairs_checked,
                    }),
                ),
                Verdict::Unknown(e) => {
                    (Outcome::Unknown, json!({"note": e.note, "budget": e.budget}))
                }
            };
            Ok(Report {
                command: "equiv".into(),
                presentation: Some((loaded.source, loaded.sha256)),
                params: vec![
                    ("w1".into(), json!(w1)),
                    ("w2".into(), json!(w2)),
                    ("bound".into(), json!(bound)),
                ],
                outcome,
                result,
            })
        }
        Command::CancelCheck { file, ball, bound } => {
            let loaded = load_presentation(file)?;
            let b = ball.ball(&loaded.pres)?;
            let mut params = ball_params(&b, ball.ball_cap);
            params.push(("bound".into(), json!(bound)));
            let verdict = cancel::check_left_cancellative_on(&loaded.pres, &b, *bound);
            let (outcome, result) = match &verdict {
                Verdict::Holds(report) => (
                    Outcome::Holds,
                    json!({
                        "verified_up_to_radius": report.radius,
                        "ball_size": report.ball_size,
                        "products_grouped": report.pairs_grouped,
                    }),
                ),
                Verdict::Fails(cx) => (
                    Outcome::Fails,
                    json!({
                        "letter": loaded.pres.display_letter(cx.letter),
                        "w1": loaded.pres.display_word(&cx.w1),
                        "w2": loaded.pres.display_word(&cx.w2),
                    }),
                ),
                Verdict::Unknown(e) => (Outcome::Unknown, json!({"note": e.note})),
            };
            Ok(Report {
                command: "cancel-check".into(),
                presentation: Some((loaded.source, loaded.sha256)),
                params,
                outcome,
                result,
            })
        }
        Command::Divides { file, s, w, bound } => {
            let loaded = load_presentation(file)?;
            let sw = loaded.pres.parse_word(s)?;
            let ww = loaded.pres.parse_word(w)?;
            let verdict = cancel::left_divides(&loaded.pres, &sw, &ww, *bound);
            let (outcome, result) = match &verdict {
                Verdict::Holds(u) => (
                    Outcome::Holds,
                    json!({"cofactor": loaded.pres.display_word(u)}),
                ),
                Verdict::Fails(()) => (Outcome::Fails, json!({})),
                Verdict::Unknown(e) => (Outcome::Unknown, json!({"note": e.note})),
            };
            Ok(Report {
                command: "divides".into(),
                presentation: Some((loaded.source, loaded.sha256)),
                params: vec![
                    ("s".into(), json!(s)),
                    ("w".into(), json!(w)),
                    ("bound".into(), json!(bound)),
                ],
                outcome,
                result,
            })
        }
        Command::Ideals { cmd } => run_ideals(cmd),
        Command::AlignCheck { file, radius, window, pair, bound } => {
            let loaded = load_presentation(file)?;
            let max_window = Window::parse(window)?;
            let width = max_window.hi.max(-max_window.lo).max(1);
            let windows: Vec<Window> = (1..=width).map(Window::symmetric).collect();
            let pairs: Vec<(hull_lab_core::Word, hull_lab_core::Word)> = if pair.is_empty() {
                let letters = loaded.pres.letters_in(Window::symmetric(0));
                let mut out = Vec::new();
                for (i, &a) in letters.iter().enumerate() {
                    for &b in letters.iter().skip(i + 1) {
                        out.push((
                            hull_lab_core::Word::single(a),
                            hull_lab_core::Word::single(b),
                        ));
                    }
                }
                out
            } else {
                pair.iter()
                    .map(|p| {
                        let (a, b) = p
                            .split_once(',')
                            .ok_or_else(|| format!("pair `{p}` must be `s,t`"))?;
                        Ok((loaded.pres.parse_word(a)?, loaded.pres.parse_word(b)?))
                    })
                    .collect::<Result<_, String>>()?
            };
            let entries =
                ideals::alignment_report(&loaded.pres, *radius, &windows, &pairs, *bound);
            Ok(Report {
                command: "align-check".into(),
                presentation: Some((loaded.source, loaded.sha256)),
                params: vec![
                    ("radius".into(), json!(radius)),
                    ("window".into(), json!(window)),
                ],
                outcome: Outcome::Info,
                result: serde_json::to_value(&entries).unwrap(),
            })
        }
        Command::Spectrum { cmd } => run_spectrum(cmd),
        Command::Regularity { cmd } => run_regularity(cmd),
        Command::Hausdorff { cmd } => run_hausdorff(cmd),
        Command::Regrep { cmd } => run_regrep(cmd),
    }
}

fn run_ideals(cmd: &IdealsCmd) -> Result<Report, String> {
    match cmd {
        IdealsCmd::Closure { file, ball, budget } => {
            let loaded = load_presentation(file)?;
            let (closure, params) = closure_for(&loaded, ball, *budget)?;
            let report = ideals::closure_report(&loaded.pres, &closure);
            Ok(Report {
                command: "ideals closure".into(),
                presentation: Some((loaded.source, loaded.sha256)),
                params,
                outcome: if closure.saturated { Outcome::Holds } else { Outcome::Unknown },
                result: serde_json::to_value(&report).unwrap(),
            })
        }
        IdealsCmd::Intersect { file, ideal1, ideal2, ball } => {
            let loaded = load_presentation(file)?;
            let b = Arc::new(ball.ball(&loaded.pres)?);
            let params = ball_params(&b, ball.ball_cap);
            let e1 = ideals::parse_ideal(&loaded.pres, ideal1)?;
            let e2 = ideals::parse_ideal(&loaded.pres, ideal2)?;
            let i1 = ideals::from_expr(&loaded.pres, &b, e1, ideals::DEFAULT_DIV_BUDGET);
            let i2 = ideals::from_expr(&loaded.pres, &b, e2, ideals::DEFAULT_DIV_BUDGET);
            let meet = ideals::intersect(&loaded.pres, &b, &i1, &i2, ideals::DEFAULT_DIV_BUDGET);
            let (gens, complete) = ideals::generators_on_ball(
                &loaded.pres,
                &b,
                &meet.fingerprint,
                ideals::DEFAULT_DIV_BUDGET,
                64,
            );
            Ok(Report {
                command: "ideals intersect".into(),
                presentation: Some((loaded.source, loaded.sha256)),
                params,
                outcome: Outcome::Info,
                result: json!({
                    "description": ideals::display_ideal(&loaded.pres, &meet.expr),
                    "shape": serde_json::to_value(meet.shape()).unwrap(),
                    "member_count": meet.fingerprint.count_ones(),
                    "generators": gens.iter().map(|g| loaded.pres.display_word(g)).collect::<Vec<_>>(),
                    "generators_complete": complete,
                    "fingerprint_hash": format!("{:016x}", meet.fingerprint.hash64()),
                }),
            })
        }
        IdealsCmd::Containing { file, words, ball, budget } => {
            let loaded = load_presentation(file)?;
            let (closure, params) = closure_for(&loaded, ball, *budget)?;
            let mut targets = Vec::new();
            for text in words {
                let w = loaded.pres.parse_word(text)?;
                let nf = rewrite::normalize(&loaded.pres, &w).map_err(|e| e.to_string())?;
                if closure.ball.index_of(&nf).is_none() {
                    return Err(format!("word `{text}` lies outside the ball"));
                }
                targets.push(nf);
            }
            let hits = ideals::ideals_containing(&closure, &targets);
            let listed: Vec<Value> = hits
                .iter()
                .map(|&i| {
                    let rep = &closure.reps[i as usize];
                    json!({
                        "description": ideals::display_ideal(&loaded.pres, &rep.expr),
                        "shape": serde_json::to_value(rep.shape()).unwrap(),
                        "member_count": rep.fingerprint.count_ones(),
                    })
                })
                .collect();
            Ok(Report {
                command: "ideals containing".into(),
                presentation: Some((loaded.source, loaded.sha256)),
                params,
                outcome: Outcome::Info,
                result: json!({"count": listed.len(), "ideals": listed}),
            })
        }
    }
}

fn run_spectrum(cmd: &SpectrumCmd) -> Result<Report, String> {
    match cmd {
        SpectrumCmd::Chi { file, word, ball, budget } => {
            let loaded = load_presentation(file)?;
            let (closure, params) = closure_for(&loaded, ball, *budget)?;
            let w = loaded.pres.parse_word(word)?;
            let nf = rewrite::normalize(&loaded.pres, &w).map_err(|e| e.to_string())?;
            let chi = spectrum::chi_of(&closure, &nf)
                .ok_or_else(|| format!("`{word}` lies outside the ball"))?;
            Ok(Report {
                command: "spectrum chi".into(),
                presentation: Some((loaded.source, loaded.sha256)),
                params,
                outcome: Outcome::Info,
                result: character_value(&loaded.pres, &closure, &chi),
            })
        }
        SpectrumCmd::Limit { file, seq, ball, budget, tail } => {
            let loaded = load_presentation(file)?;
            let (closure, params) = closure_for(&loaded, ball, *budget)?;
            let spec = SeqSpec::parse(&loaded.pres, seq)?;
            match spectrum::limit_character(&loaded.pres, &closure, &spec, *tail) {
                Ok(chi) => Ok(Report {
                    command: "spectrum limit".into(),
                    presentation: Some((loaded.source, loaded.sha256)),
                    params,
                    outcome: Outcome::Holds,
                    result: character_value(&loaded.pres, &closure, &chi),
                }),
                Err(div) => Ok(Report {
                    command: "spectrum limit".into(),
                    presentation: Some((loaded.source, loaded.sha256)),
                    params,
                    outcome: Outcome::Unknown,
                    result: json!({
                        "divergent": div.oscillating.iter().map(|&i| {
                            ideals::display_ideal(&loaded.pres, &closure.reps[i as usize].expr)
                        }).collect::<Vec<_>>(),
                        "notes": div.escaped,
                    }),
                }),
            }
        }
        SpectrumCmd::Omega { file, word, seq, ball, budget, max_parts } => {
            let loaded = load_presentation(file)?;
            let (closure, params) = closure_for(&loaded, ball, *budget)?;
            let chi = match (word, seq) {
                (Some(text), None) => {
                    let w = loaded.pres.parse_word(text)?;
                    let nf = rewrite::normalize(&loaded.pres, &w).map_err(|e| e.to_string())?;
                    spectrum::chi_of(&closure, &nf)
                        .ok_or_else(|| format!("`{text}` lies outside the ball"))?
                }
                (None, Some(text)) => {
                    let spec = SeqSpec::parse(&loaded.pres, text)?;
                    spectrum::limit_character(&loaded.pres, &closure, &spec, None)
                        .map_err(|_| "sequence diverges; no limit character".to_string())?
                }
                _ => return Err("pass exactly one of --word or --seq".into()),
            };
            let covers = spectrum::enumerate_covers(&loaded.pres, &closure, *max_parts);
            let verdict = spectrum::is_in_omega(&closure, &chi, &covers);
            let (outcome, extra) = match &verdict {
                Verdict::Holds(n) => (Outcome::Holds, json!({"covers_checked": n})),
                Verdict::Fails(f) => (Outcome::Fails, serde_json::to_value(f).unwrap()),
                Verdict::Unknown(e) => (Outcome::Unknown, json!({"note": e.note})),
            };
            let mut result = character_value(&loaded.pres, &closure, &chi);
            result["omega"] = extra;
            result["cover_relations"] = json!(covers.len());
            Ok(Report {
                command: "spectrum omega".into(),
                presentation: Some((loaded.source, loaded.sha256)),
                params,
                outcome,
                result,
            })
        }
    }
}

fn run_regularity(cmd: &RegularityCmd) -> Result<Report, String> {
    let RegularityCmd::Check { file, kind, x, minus, hs, ball, budget, closure_budget } = cmd;
    let loaded = load_presentation(file)?;
    let (closure, mut params) = closure_for(&loaded, ball, *closure_budget)?;
    params.push(("budget".into(), json!(budget)));
    let base = ideals::parse_ideal(&loaded.pres, x)?;
    let removed: Vec<IdealExpr> = minus
        .iter()
        .map(|m| ideals::parse_ideal(&loaded.pres, m))
        .collect::<Result<_, _>>()?;
    let gx = GeneralizedIdeal { base, removed };
    let elements: Vec<hull::HullElement> = hs
        .iter()
        .map(|h| hull::parse_zigzag(&loaded.pres, h))
        .collect::<Result<_, _>>()?;
    let outcome = match kind {
        RegKind::Strong => regularity::regularity_witness(
            &loaded.pres,
            &closure,
            &gx,
            &elements,
            WitnessKind::Strong,
            *budget,
        ),
        RegKind::Cstar => regularity::regularity_witness(
            &loaded.pres,
            &closure,
            &gx,
            &elements,
            WitnessKind::CStar,
            *budget,
        ),
        RegKind::GpEqG => {
            if elements.len() != 1 {
                return Err("--kind gp-eq-g takes exactly one --h element".into());
            }
            regularity::gp_eq_g_check(&loaded.pres, &closure, &elements[0], &gx, *budget)
        }
    };
    let (status, result) = match &outcome {
        WitnessOutcome::Found(witness) => {
            let report = regularity::witness_report(&loaded.pres, &closure, witness, *budget);
            (Outcome::Holds, serde_json::to_value(&report).unwrap())
        }
        WitnessOutcome::NoWitness(obstruction) => (
            Outcome::Unknown,
            json!({
                "obstruction": serde_json::to_value(obstruction).unwrap(),
                "note": "no witness within the tracked list; not a refutation",
            }),
        ),
        WitnessOutcome::BudgetExhausted(e) => {
            (Outcome::Unknown, json!({"note": e.note, "budget": e.budget}))
        }
        WitnessOutcome::PreconditionFailed(f) => (
            Outcome::Fails,
            json!({"precondition": precondition_text(&loaded.pres, f)}),
        ),
    };
    Ok(Report {
        command: "regularity check".into(),
        presentation: Some((loaded.source, loaded.sha256)),
        params,
        outcome: status,
        result,
    })
}

fn precondition_text(p: &Presentation, f: &regularity::Condition1Failure) -> String {
    match f {
        regularity::Condition1Failure::EmptyTrace => "empty trace on the ball".into(),
        regularity::Condition1Failure::DomainViolation { h_index, word } => {
            format!("h[{h_index}] is undefined at {}", p.display_word(word))
        }
        regularity::Condition1Failure::Unfixed { word } => {
            format!("no listed element fixes {}", p.display_word(word))
        }
    }
}

fn run_hausdorff(cmd: &HausdorffCmd) -> Result<Report, String> {
    let HausdorffCmd::Scan { file, ball, closure_budget, prefix_len } = cmd;
    let loaded = load_presentation(file)?;
    let (closure, params) = closure_for(&loaded, ball, *closure_budget)?;
    let found = regularity::hausdorff_witness_search(
        &loaded.pres,
        &closure,
        *prefix_len,
        ideals::DEFAULT_DIV_BUDGET,
    );
    let witnesses: Vec<Value> = found
        .iter()
        .map(|w| {
            json!({
                "g": loaded.pres.display_letter(w.g),
                "seq": w.seq.source(),
                "limit_ones": w.limit.ones().iter().map(|&i| {
                    ideals::display_ideal(&loaded.pres, &closure.reps[i as usize].expr)
                }).collect::<Vec<_>>(),
                "moved": w.moved_elements.iter().map(|(i, word)| {
                    json!({
                        "ideal": ideals::display_ideal(&loaded.pres, &closure.reps[*i as usize].expr),
                        "element": loaded.pres.display_word(word),
                    })
                }).collect::<Vec<_>>(),
            })
        })
        .collect();
    Ok(Report {
        command: "hausdorff scan".into(),
        presentation: Some((loaded.source, loaded.sha256)),
        params,
        outcome: Outcome::Info,
        result: json!({"count": witnesses.len(), "witnesses": witnesses}),
    })
}

fn run_regrep(cmd: &RegrepCmd) -> Result<Report, String> {
    match cmd {
        RegrepCmd::Eval { file, expr, ball } => {
            let loaded = load_presentation(file)?;
            let b = ball.ball(&loaded.pres)?;
            let mut params = ball_params(&b, ball.ball_cap);
            params.push(("expr".into(), json!(expr)));
            let parsed = regrep::parse_op_expr(&loaded.pres, expr)?;
            let report = regrep::kernel_witness_check(
                &loaded.pres,
                &b,
                &parsed,
                ideals::DEFAULT_DIV_BUDGET,
            );
            Ok(Report {
                command: "regrep eval".into(),
                presentation: Some((loaded.source, loaded.sha256)),
                params,
                outcome: Outcome::Info,
                result: json!({
                    "max_interior_residual": report.max_residual,
                    "depth": report.depth,
                    "columns_evaluated": report.columns_evaluated,
                    "columns_skipped": report.columns_skipped,
                }),
            })
        }
        RegrepCmd::R4 { file, x, covers, ball } => {
            let loaded = load_presentation(file)?;
            let b = ball.ball(&loaded.pres)?;
            let params = ball_params(&b, ball.ball_cap);
            let xe = ideals::parse_ideal(&loaded.pres, x)?;
            let cover_exprs: Vec<IdealExpr> = covers
                .iter()
                .map(|c| ideals::parse_ideal(&loaded.pres, c))
                .collect::<Result<_, _>>()?;
            let report = regrep::r4_check(
                &loaded.pres,
                &b,
                &xe,
                &cover_exprs,
                ideals::DEFAULT_DIV_BUDGET,
            );
            let outcome = if !report.cover_holds_on_ball {
                Outcome::Fails
            } else if report.max_residual <= regrep::ZERO_TOLERANCE {
                Outcome::Holds
            } else {
                Outcome::Fails
            };
            Ok(Report {
                command: "regrep r4".into(),
                presentation: Some((loaded.source, loaded.sha256)),
                params,
                outcome,
                result: serde_json::to_value(&report).unwrap(),
            })
        }
        RegrepCmd::Lemma16 { m, alpha } => {
            let order = if m == "inf" || m == "infinity" {
                OrderBound::Infinite
            } else {
                OrderBound::Finite(m.parse::<usize>().map_err(|_| format!("bad order `{m}`"))?)
            };
            let bound = regrep::lemma16_eps(order, *alpha)?;
            let mut result = serde_json::Map::new();
            result.insert("eps".into(), json!(bound.eps));
            result.insert("supremum".into(), json!(bound.supremum));
            result.insert("m_used".into(), json!(bound.m_used));
            if let OrderBound::Finite(m) = order {
                let trace = regrep::lemma16_b_trace(m);
                result.insert("normalized_trace".into(), json!(trace));
                result.insert("expected_trace".into(), json!(1.0 / m as f64));
            }
            Ok(Report {
                command: "regrep lemma16".into(),
                presentation: None,
                params: vec![("m".into(), json!(m)), ("alpha".into(), json!(alpha))],
                outcome: Outcome::Holds,
                result: Value::Object(result),
            })
        }
    }
}
