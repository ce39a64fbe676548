//! Command-line front end.
//!
//! Every report is JSON with a `schema` field; `--format text` renders the same
//! data for people. Exit codes: 0 success, 1 factorization mismatch, 2 parse
//! error, 3 precondition violation.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::diagrams::{
    conway_skein, linking_matrix, verify_factorization, DiagramError, LinkDiagram, StringLink, StringLinkDiagram,
    DEFAULT_MAX_CROSSINGS,
};
use crate::factor::{conway_from_seifert, gamma, gamma_checks, lowest_coefficient, multi_lowest, phi_multi, FactorError};
use crate::milnor::{chat_matrix, mu_table, MilnorError};
use crate::series::SeriesError;
use crate::words::{normalize_longitude, pure_braids, Braid, Word, WordError};

pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "mubar", version, about = "Milnor invariants of string links and the Conway factorization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Crossing cap for the skein recursion.
    #[arg(long, global = true, env = "MUBAR_MAX_CROSSINGS", default_value_t = DEFAULT_MAX_CROSSINGS)]
    pub max_crossings: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// μ̄-invariant table.
    Mu(InputArgs),
    /// Γ(z), Φ(u) and the split-link checks.
    Gamma(InputArgs),
    /// Φ(u), multivariable Φ and the lowest-order coefficient.
    Phi(InputArgs),
    /// Conway polynomials of a link diagram, Seifert matrix or string link closures.
    Conway(InputArgs),
    /// Check ∇_L = ∇_K Γ for one string link.
    Verify(InputArgs),
    /// Run verify over every pure braid in a range.
    Corpus(CorpusArgs),
}

#[derive(Args, Debug)]
pub struct InputArgs {
    /// Input JSON file.
    #[arg(short = 'i', long, conflicts_with = "json", required_unless_present = "json")]
    pub input: Option<PathBuf>,
    /// Inline input JSON.
    #[arg(long)]
    pub json: Option<String>,
    /// Truncation order: μ̄ up to this length, series through degree q-1.
    #[arg(short = 'q', long = "order", default_value_t = 9)]
    pub order: usize,
}

#[derive(Args, Debug)]
pub struct CorpusArgs {
    /// Largest strand count.
    #[arg(long, default_value_t = 3)]
    pub strands: usize,
    /// Smallest strand count.
    #[arg(long, default_value_t = 2)]
    pub min_strands: usize,
    #[arg(long, default_value_t = 6)]
    pub max_letters: usize,
    #[arg(short = 'q', long = "order", default_value_t = 9)]
    pub order: usize,
    /// Random subsample of this many items per strand count.
    #[arg(long)]
    pub sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn parse(m: impl Into<String>) -> Self {
        CliError { code: EXIT_PARSE, message: m.into() }
    }
    fn pre(m: impl Into<String>) -> Self {
        CliError { code: EXIT_PRECONDITION, message: m.into() }
    }
}

impl From<WordError> for CliError {
    fn from(e: WordError) -> Self {
        match e {
            WordError::BadToken(_) | WordError::BraidIndex(..) | WordError::IndexOutOfRange(..) => Self::parse(e.to_string()),
            _ => Self::pre(e.to_string()),
        }
    }
}

impl From<MilnorError> for CliError {
    fn from(e: MilnorError) -> Self {
        Self::pre(e.to_string())
    }
}

impl From<SeriesError> for CliError {
    fn from(e: SeriesError) -> Self {
        Self::pre(e.to_string())
    }
}

impl From<FactorError> for CliError {
    fn from(e: FactorError) -> Self {
        Self::pre(e.to_string())
    }
}

impl From<DiagramError> for CliError {
    fn from(e: DiagramError) -> Self {
        match e {
            DiagramError::Malformed(_) => Self::parse(e.to_string()),
            DiagramError::Word(w) => w.into(),
            _ => Self::pre(e.to_string()),
        }
    }
}

/// Parsed input payload.
#[derive(Debug, Clone)]
pub enum Input {
    Braid(Braid),
    Longitudes(Vec<Word>),
    Link(LinkDiagram),
    Tangle(StringLinkDiagram),
    Seifert(Vec<Vec<i64>>),
}

impl Input {
    fn kind(&self) -> &'static str {
        match self {
            Input::Braid(_) => "braid",
            Input::Longitudes(_) => "longitudes",
            Input::Link(_) => "link",
            Input::Tangle(_) => "tangle",
            Input::Seifert(_) => "seifert",
        }
    }
}

pub fn parse_input(text: &str) -> Result<Input, CliError> {
    let v: Value = serde_json::from_str(text).map_err(|e| CliError::parse(format!("invalid JSON: {e}")))?;
    if let Some(a) = v.get("seifert") {
        let rows = a.as_array().ok_or_else(|| CliError::parse("seifert must be a matrix"))?;
        let m = rows
            .iter()
            .map(|r| {
                r.as_array()
                    .and_then(|r| r.iter().map(Value::as_i64).collect::<Option<Vec<_>>>())
                    .ok_or_else(|| CliError::parse("seifert entries must be integers"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(Input::Seifert(m));
    }
    if v.get("endpoints").is_some() {
        return Ok(Input::Tangle(StringLinkDiagram::from_pd_json(&v)?));
    }
    if v.get("crossings").is_some() {
        return Ok(Input::Link(LinkDiagram::from_pd_json(&v)?));
    }
    if let Some(l) = v.get("longitudes") {
        let arr = l.as_array().ok_or_else(|| CliError::parse("longitudes must be a list"))?;
        let words = arr
            .iter()
            .map(|s| s.as_str().ok_or_else(|| CliError::parse("longitudes must be strings")).and_then(|s| Ok(Word::parse(s)?)))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(m) = v.get("m").and_then(Value::as_u64) {
            if m as usize != words.len() {
                return Err(CliError::parse(format!("m = {m} but {} longitudes given", words.len())));
            }
        }
        if let Some((i, w)) = words.iter().enumerate().find(|(_, w)| w.rank() > words.len()) {
            return Err(CliError::parse(format!("longitude {} uses x{} with m = {}", i + 1, w.rank(), words.len())));
        }
        return Ok(Input::Longitudes(words));
    }
    if let (Some(m), Some(w)) = (v.get("strands").and_then(Value::as_u64), v.get("word")) {
        let word = w
            .as_array()
            .and_then(|a| a.iter().map(|x| x.as_i64().map(|k| k as i32)).collect::<Option<Vec<_>>>())
            .ok_or_else(|| CliError::parse("word must be a list of integers"))?;
        return Ok(Input::Braid(Braid::new(m as usize, word)?));
    }
    Err(CliError::parse("unrecognized input: expected a braid, longitudes, PD code, tangle or Seifert matrix"))
}

fn read_input(a: &InputArgs) -> Result<Input, CliError> {
    let text = match (&a.input, &a.json) {
        (Some(p), _) => std::fs::read_to_string(p).map_err(|e| CliError::parse(format!("{}: {e}", p.display())))?,
        (None, Some(s)) => s.clone(),
        (None, None) => return Err(CliError::parse("no input given")),
    };
    parse_input(&text)
}

fn check_order(q: usize) -> Result<(), CliError> {
    if q < 2 {
        return Err(CliError::pre(format!("order must be at least 2, got {q}")));
    }
    Ok(())
}

/// String link from input, with any notes about what ingestion changed.
fn string_link(input: &Input, q: usize) -> Result<(StringLink, Vec<String>), CliError> {
    let mut notes = Vec::new();
    let s = match input {
        Input::Braid(b) => StringLink::from_braid(b, q)?,
        Input::Tangle(d) => StringLink::from_diagram(d.clone(), q)?,
        Input::Longitudes(ws) => {
            let norm = ws
                .iter()
                .enumerate()
                .map(|(i, w)| {
                    if w.exponent_sum() != 0 {
                        notes.push(format!("longitude {} normalized by x{}^{}", i + 1, i + 1, -w.exponent_sum()));
                        normalize_longitude(w, i)
                    } else {
                        w.clone()
                    }
                })
                .collect();
            StringLink::from_longitudes(norm)?
        }
        _ => return Err(CliError::pre(format!("a {} input does not describe a string link", input.kind()))),
    };
    Ok((s, notes))
}

fn report(schema: &str, fields: Value) -> Value {
    let mut m = Map::new();
    m.insert("schema".into(), json!(format!("mubar.{schema}/1")));
    if let Value::Object(f) = fields {
        m.extend(f);
    }
    Value::Object(m)
}

pub struct Output {
    pub json: Value,
    pub text: String,
    pub code: i32,
}

pub fn run(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Mu(a) => cmd_mu(a),
        Command::Gamma(a) => cmd_gamma(a),
        Command::Phi(a) => cmd_phi(a),
        Command::Conway(a) => cmd_conway(a, cli.max_crossings),
        Command::Verify(a) => cmd_verify(a, cli.max_crossings),
        Command::Corpus(a) => cmd_corpus(a, cli.max_crossings),
    }
}

/// Render an output in the requested format, newline-terminated.
pub fn render(out: &Output, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(&out.json).expect("serializable") + "\n",
        Format::Text => out.text.clone(),
    }
}

fn longitude_strings(s: &StringLink) -> Vec<String> {
    s.longitudes.iter().map(|w| w.to_string()).collect()
}

pub fn cmd_mu(a: &InputArgs) -> Result<Output, CliError> {
    check_order(a.order)?;
    let input = read_input(a)?;
    let (s, notes) = string_link(&input, a.order)?;
    let t = mu_table(&s.longitudes, a.order)?;
    let mut text = String::new();
    writeln!(text, "m = {}, q = {}", t.m(), t.q()).unwrap();
    for (k, v) in t.entries() {
        let key: Vec<String> = k.iter().map(|i| (i + 1).to_string()).collect();
        writeln!(text, "mu({}) = {}", key.join(","), v).unwrap();
    }
    let json = report(
        "mu",
        json!({
            "input": input.kind(),
            "m": t.m(),
            "q": t.q(),
            "longitudes": longitude_strings(&s),
            "entries": t.to_json()["entries"],
            "notes": notes,
        }),
    );
    Ok(Output { json, text, code: 0 })
}

pub fn cmd_gamma(a: &InputArgs) -> Result<Output, CliError> {
    check_order(a.order)?;
    let input = read_input(a)?;
    let (s, notes) = string_link(&input, a.order)?;
    let g = gamma(&mu_table(&s.longitudes, a.order)?)?;
    let checks = gamma_checks(&g, &s.linking).ok();
    let mut text = String::new();
    writeln!(text, "Gamma(z) = {}", g.gamma_z).unwrap();
    if let Some(r) = g.rational_form() {
        writeln!(text, "         = {r}").unwrap();
    }
    writeln!(text, "Phi(u)   = {}", g.phi_u).unwrap();
    match &checks {
        Some(c) => writeln!(text, "parity {}, divisibility {}, square {}", c.parity, c.divisibility, c.square).unwrap(),
        None => writeln!(text, "checks skipped: not algebraically split").unwrap(),
    }
    let mut body = g.to_json(checks.as_ref());
    let obj = body.as_object_mut().expect("object");
    obj.insert("q".into(), json!(a.order));
    obj.insert("linking".into(), s.linking.to_json());
    obj.insert("notes".into(), json!(notes));
    if checks.is_none() {
        obj.insert("checks_skipped".into(), json!("not algebraically split"));
    }
    Ok(Output { json: report("gamma", body), text, code: 0 })
}

pub fn cmd_phi(a: &InputArgs) -> Result<Output, CliError> {
    check_order(a.order)?;
    let input = read_input(a)?;
    let (s, notes) = string_link(&input, a.order)?;
    let mu = mu_table(&s.longitudes, a.order)?;
    let g = gamma(&mu)?;
    let pm = phi_multi(&chat_matrix(&s.longitudes, a.order)?, &s.linking)?;
    let mut text = String::new();
    writeln!(text, "Phi(u) = {}", g.phi_u).unwrap();
    writeln!(text, "Phi(v) = {pm}").unwrap();
    let order = mu.entries().keys().map(|k| k.len()).min();
    let lowest = match order {
        Some(k) if k <= mu.q() => {
            let c = lowest_coefficient(&mu, k)?;
            let ml = multi_lowest(&mu, k)?;
            writeln!(text, "order {k}: coefficient of z^{} is {c}", (k - 1) * (s.m.saturating_sub(1))).unwrap();
            json!({"k": k, "degree": (k - 1) * s.m.saturating_sub(1), "coefficient": c.to_string(), "multi": ml.to_json()})
        }
        _ => Value::Null,
    };
    let json = report(
        "phi",
        json!({
            "q": a.order,
            "m": s.m,
            "phi_u": g.phi_u.to_json(),
            "phi_multi": pm.to_json(),
            "phi_multi_lowest_degree": pm.lowest_degree(),
            "phi_multi_note": "computed from the (m-1)x(m-1) minor; not normalized to a unit multiple of the Alexander polynomial",
            "lowest": lowest,
            "notes": notes,
        }),
    );
    Ok(Output { json, text, code: 0 })
}

pub fn cmd_conway(a: &InputArgs, cap: usize) -> Result<Output, CliError> {
    let input = read_input(a)?;
    let (json, text) = match &input {
        Input::Seifert(m) => {
            let (c, uni) = conway_from_seifert(m)?;
            (json!({"nabla": c.to_json(), "unimodular": uni}), format!("nabla = {c}\nunimodular: {uni}\n"))
        }
        Input::Link(d) => {
            let c = conway_skein(d, cap)?;
            (
                json!({"nabla": c.to_json(), "components": d.components().len(), "linking": linking_matrix(d).to_json()}),
                format!("nabla = {c}\n"),
            )
        }
        Input::Braid(_) | Input::Tangle(_) => {
            let d = match &input {
                Input::Braid(b) => StringLinkDiagram::from_braid(b)?,
                Input::Tangle(d) => d.clone(),
                _ => unreachable!(),
            };
            let l = conway_skein(&d.close_link(), cap)?;
            let k = conway_skein(&d.close_knot(), cap)?;
            (
                json!({"nabla_l": l.to_json(), "nabla_k": k.to_json(), "linking": linking_matrix(&d.close_link()).to_json()}),
                format!("nabla(L) = {l}\nnabla(K) = {k}\n"),
            )
        }
        Input::Longitudes(_) => return Err(CliError::pre("longitudes alone do not determine a diagram")),
    };
    let mut body = json;
    body.as_object_mut().expect("object").insert("input".into(), json!(input.kind()));
    body.as_object_mut().expect("object").insert("convention".into(), json!("skein: nabla(+) - nabla(-) = z nabla(0)"));
    Ok(Output { json: report("conway", body), text, code: 0 })
}

pub fn cmd_verify(a: &InputArgs, cap: usize) -> Result<Output, CliError> {
    check_order(a.order)?;
    let input = read_input(a)?;
    let (s, _) = string_link(&input, a.order)?;
    let r = verify_factorization(&s, a.order, cap)?;
    let text = format!(
        "nabla(L) = {}\nnabla(K) = {}\nGamma(z) = {}\n{} through z^{}\n",
        r.nabla_l,
        r.nabla_k,
        r.gamma.gamma_z,
        if r.pass() { "PASS" } else { "MISMATCH" },
        r.degree
    );
    let mut body = r.to_json();
    let obj = body.as_object_mut().expect("object");
    obj.insert("q".into(), json!(a.order));
    obj.insert("longitudes".into(), json!(longitude_strings(&s)));
    obj.insert("convention".into(), json!("nabla(z) = skein(-z)"));
    Ok(Output { json: report("verify", body), text, code: if r.pass() { 0 } else { EXIT_MISMATCH } })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusItem {
    pub id: usize,
    pub braid: Braid,
    pub pass: bool,
    pub mismatches: Vec<usize>,
}

/// Pure braids for the corpus, optionally subsampled per strand count.
pub fn corpus_braids(min_m: usize, max_m: usize, max_letters: usize, sample_n: Option<usize>, seed: u64) -> Vec<Braid> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for m in min_m..=max_m {
        let all = pure_braids(m, max_letters);
        match sample_n {
            Some(n) if n < all.len() => {
                let mut idx = sample(&mut rng, all.len(), n).into_vec();
                idx.sort_unstable();
                out.extend(idx.into_iter().map(|i| all[i].clone()));
            }
            _ => out.extend(all),
        }
    }
    out
}

pub fn run_corpus(braids: &[Braid], q: usize, cap: usize) -> Result<Vec<CorpusItem>, CliError> {
    braids
        .par_iter()
        .enumerate()
        .map(|(id, b)| {
            let s = StringLink::from_braid(b, q)?;
            let r = verify_factorization(&s, q, cap)?;
            Ok(CorpusItem { id, braid: b.clone(), pass: r.pass(), mismatches: r.mismatches })
        })
        .collect()
}

pub fn cmd_corpus(a: &CorpusArgs, cap: usize) -> Result<Output, CliError> {
    check_order(a.order)?;
    if a.min_strands < 1 || a.min_strands > a.strands {
        return Err(CliError::pre("need 1 <= min-strands <= strands"));
    }
    let braids = corpus_braids(a.min_strands, a.strands, a.max_letters, a.sample, a.seed);
    let items = run_corpus(&braids, a.order, cap)?;
    let mut summary = Map::new();
    let mut text = String::new();
    for m in a.min_strands..=a.strands {
        let of_m: Vec<&CorpusItem> = items.iter().filter(|i| i.braid.strands() == m).collect();
        let pass = of_m.iter().filter(|i| i.pass).count();
        summary.insert(m.to_string(), json!({"total": of_m.len(), "pass": pass}));
        writeln!(text, "{m} strands: {pass}/{} pass", of_m.len()).unwrap();
    }
    let failures: Vec<&CorpusItem> = items.iter().filter(|i| !i.pass).collect();
    for f in &failures {
        writeln!(text, "  mismatch: {} strands, {} at degrees {:?}", f.braid.strands(), f.braid, f.mismatches).unwrap();
    }
    let json = report(
        "corpus",
        json!({
            "q": a.order,
            "max_letters": a.max_letters,
            "sample": a.sample,
            "seed": a.seed,
            "summary": Value::Object(summary),
            "items": items.iter().map(|i| json!({
                "id": i.id,
                "strands": i.braid.strands(),
                "word": i.braid.word(),
                "pass": i.pass,
                "mismatch_degrees": i.mismatches,
            })).collect::<Vec<_>>(),
        }),
    );
    Ok(Output { json, text, code: if failures.is_empty() { 0 } else { EXIT_MISMATCH } })
}

/// Parse arguments, run, print; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(out) => {
            print!("{}", render(&out, cli.format));
            out.code
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(cmd: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("mubar").chain(cmd.iter().copied())).unwrap()
    }

    #[test]
    fn input_detection() {
        assert!(matches!(parse_input(r#"{"strands": 2, "word": [1, 1]}"#).unwrap(), Input::Braid(_)));
        assert!(matches!(parse_input(r#"{"m": 2, "longitudes": ["X1^-1 X2", "X2^-1 X1"]}"#).unwrap(), Input::Longitudes(_)));
        assert!(matches!(parse_input(r#"{"seifert": [[-1, 1], [0, -1]]}"#).unwrap(), Input::Seifert(_)));
        assert_eq!(parse_input("{").unwrap_err().code, EXIT_PARSE);
        assert_eq!(parse_input(r#"{"strands": 2, "word": [3]}"#).unwrap_err().code, EXIT_PARSE);
        assert_eq!(parse_input(r#"{"m": 3, "longitudes": ["X1"]}"#).unwrap_err().code, EXIT_PARSE);
    }

    #[test]
    fn hopf_verify_passes() {
        let out = run(&args(&["verify", "--json", r#"{"strands": 2, "word": [1, 1]}"#])).unwrap();
        assert_eq!(out.code, 0);
        assert_eq!(out.json["schema"], "mubar.verify/1");
        assert_eq!(out.json["pass"], true);
    }

    #[test]
    fn braid_and_longitudes_agree() {
        let a = run(&args(&["mu", "-q", "5", "--json", r#"{"strands": 2, "word": [1, 1]}"#])).unwrap();
        let b = run(&args(&["mu", "-q", "5", "--json", r#"{"m": 2, "longitudes": ["X1^-1 X2", "X2^-1 X1"]}"#])).unwrap();
        assert_eq!(a.json["entries"], b.json["entries"]);
    }

    #[test]
    fn preconditions() {
        let e = run(&args(&["mu", "--json", r#"{"strands": 2, "word": [1]}"#])).err().unwrap();
        assert_eq!(e.code, EXIT_PRECONDITION);
        let e = run(&args(&["mu", "-q", "1", "--json", r#"{"strands": 2, "word": [1, 1]}"#])).err().unwrap();
        assert_eq!(e.code, EXIT_PRECONDITION);
    }

    #[test]
    fn sampling_is_seeded() {
        let a = corpus_braids(3, 3, 6, Some(10), 7);
        assert_eq!(a.len(), 10);
        assert_eq!(a, corpus_braids(3, 3, 6, Some(10), 7));
    }
}
