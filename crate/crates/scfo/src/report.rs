//! Line-oriented text documents: protocol certificates, impossibility
//! reports, protocol templates and the summary table.
//!
//! Every document is a sequence of `key: value` lines. Blank lines and
//! lines starting with `#` are ignored on parse. Certificates and reports
//! end with an fnv1a-64 digest over the preceding lines; word fields appear
//! both as bitstrings and as club/heart glyphs, but only the bitstring is
//! read back. Arrangements are serialized 1-based.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::boolfun::{named_function, TruthTable};
use crate::encoding::Arrangement;
use crate::search::{ImpossibilityReport, ProtocolCertificate, SearchStats, Table2Report};
use crate::verify::{ProtocolTemplate, Slot};
use crate::words::{CardWord, InsertionVector};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DocError {
    #[error("missing key {0:?}")]
    MissingKey(&'static str),
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("duplicate key {0:?}")]
    DuplicateKey(String),
    #[error("bad value for {key}: {detail}")]
    BadValue { key: String, detail: String },
    #[error("not an scfo document (missing scfo-document header)")]
    NotADocument,
    #[error("unsupported document kind {0:?}")]
    UnsupportedKind(String),
    #[error("unsupported format version {0}")]
    UnsupportedVersion(String),
    #[error("digest mismatch: document was altered after writing")]
    DigestMismatch,
    #[error("template is invalid: {0}")]
    InvalidTemplate(#[from] crate::verify::VerifyError),
    #[error("io: {0}")]
    Io(#[from] io::Error),
}

fn fnv1a64(data: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in data {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn push_kv(out: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "{key}: {value}");
}

fn finish_with_digest(mut body: String) -> String {
    let digest = fnv1a64(body.as_bytes());
    let _ = writeln!(body, "digest: {digest:016x}");
    body
}

fn on_off(flag: bool) -> &'static str {
    if flag {
        "on"
    } else {
        "off"
    }
}

pub fn render_certificate(cert: &ProtocolCertificate) -> String {
    let mut out = String::new();
    push_kv(&mut out, "scfo-document", "protocol-certificate");
    push_kv(&mut out, "format-version", FORMAT_VERSION);
    push_kv(&mut out, "tool-version", env!("CARGO_PKG_VERSION"));
    if let Some(name) = &cert.function_name {
        push_kv(&mut out, "function", name);
    }
    push_kv(&mut out, "variables", cert.table.vars());
    push_kv(&mut out, "truth-table", cert.table.table_text());
    push_kv(&mut out, "mode", &cert.mode);
    push_kv(&mut out, "prune", on_off(cert.prune));
    push_kv(&mut out, "explore-delta", cert.explore_delta);
    push_kv(&mut out, "arrangement", &cert.arrangement);
    push_kv(&mut out, "insertion", &cert.insertion);
    push_kv(&mut out, "additional-clubs", cert.additional_clubs);
    push_kv(&mut out, "final-length", cert.final_length);
    push_kv(&mut out, "opening-pattern-0", &cert.opening_pattern_0);
    push_kv(
        &mut out,
        "opening-pattern-0-cards",
        cert.opening_pattern_0.glyphs(),
    );
    push_kv(&mut out, "opening-pattern-1", &cert.opening_pattern_1);
    push_kv(
        &mut out,
        "opening-pattern-1-cards",
        cert.opening_pattern_1.glyphs(),
    );
    if let Some(tallies) = &cert.tallies {
        out.push_str(&tallies.render());
        out.push('\n');
    }
    finish_with_digest(out)
}

pub fn render_impossibility(rep: &ImpossibilityReport) -> String {
    let mut out = String::new();
    push_kv(&mut out, "scfo-document", "impossibility-report");
    push_kv(&mut out, "format-version", FORMAT_VERSION);
    push_kv(&mut out, "tool-version", env!("CARGO_PKG_VERSION"));
    if let Some(name) = &rep.function_name {
        push_kv(&mut out, "function", name);
    }
    push_kv(&mut out, "variables", rep.table.vars());
    push_kv(&mut out, "truth-table", rep.table.table_text());
    push_kv(&mut out, "mode", &rep.mode);
    push_kv(&mut out, "prune", on_off(rep.prune));
    push_kv(&mut out, "explore-delta", rep.explore_delta);
    push_kv(&mut out, "conclusion", rep.conclusion.as_str());
    push_kv(&mut out, "certifying", rep.certifying);
    out.push_str(&rep.stats.render());
    out.push('\n');
    finish_with_digest(out)
}

pub fn render_template(
    template: &ProtocolTemplate,
    function: &TruthTable,
    name: Option<&str>,
) -> String {
    let mut out = String::new();
    push_kv(&mut out, "scfo-document", "protocol-template");
    push_kv(&mut out, "format-version", FORMAT_VERSION);
    push_kv(&mut out, "variables", template.n());
    let slots = template
        .slots()
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(" ");
    push_kv(&mut out, "slots", slots);
    if let Some((p0, p1)) = template.outputs() {
        push_kv(&mut out, "output-pattern-0", p0);
        push_kv(&mut out, "output-pattern-1", p1);
    }
    if let Some(name) = name {
        push_kv(&mut out, "function", name);
    }
    push_kv(&mut out, "truth-table", function.table_text());
    out
}

/// The machine-readable summary table.
pub fn render_table2(report: &Table2Report) -> String {
    let mut out = String::new();
    push_kv(&mut out, "scfo-document", "summary-table");
    push_kv(&mut out, "format-version", FORMAT_VERSION);
    push_kv(&mut out, "tool-version", env!("CARGO_PKG_VERSION"));
    for row in &report.rows {
        let protocol = match (row.exists, row.minimal_clubs) {
            (true, Some(k0)) => format!("({k0},0)-scfo"),
            (true, None) => "trivial".to_string(),
            (false, _) => "-".to_string(),
        };
        let existence = if row.exists { "yes" } else { "no" };
        let _ = writeln!(
            out,
            "row: {} | {} | {} | {}",
            row.name, row.formula, existence, protocol
        );
    }
    push_kv(&mut out, "certifying", report.certifying());
    finish_with_digest(out)
}

/// Human-oriented rendering of the summary table.
pub fn table2_text(report: &Table2Report) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<26} {:<5} {:<10} details",
        "function", "vars", "protocol"
    );
    for row in &report.rows {
        let (exist, detail) = match (row.exists, row.minimal_clubs) {
            (true, Some(k0)) => ("yes", format!("({k0},0)-scfo, minimal additional clubs {k0}")),
            (true, None) => ("yes", "constant, no cards needed".to_string()),
            (false, _) => ("no", format!("searched {} instances", row.stats.instances_total)),
        };
        let _ = writeln!(
            out,
            "{:<26} {:<5} {:<10} {}",
            row.formula, row.vars, exist, detail
        );
    }
    out
}

/// A parsed document.
pub enum Document {
    Certificate(ProtocolCertificate),
    Template {
        template: ProtocolTemplate,
        function: TruthTable,
        name: Option<String>,
    },
}

struct Lines<'a> {
    pairs: Vec<(String, &'a str)>,
}

impl<'a> Lines<'a> {
    fn parse(text: &'a str) -> Result<(Self, Option<u64>, u64), DocError> {
        let mut pairs = Vec::new();
        let mut declared_digest = None;
        let mut body_end = 0usize;
        for line in text.lines() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                body_end += line.len() + 1;
                continue;
            }
            let (key, value) = trimmed.split_once(':').ok_or_else(|| DocError::BadValue {
                key: trimmed.to_string(),
                detail: "expected key: value".to_string(),
            })?;
            let key = key.trim().to_string();
            let value = value.trim();
            if key == "digest" {
                let parsed =
                    u64::from_str_radix(value, 16).map_err(|e| DocError::BadValue {
                        key,
                        detail: e.to_string(),
                    })?;
                declared_digest = Some(parsed);
                continue;
            }
            body_end += line.len() + 1;
            pairs.push((key, value));
        }
        let body_digest = fnv1a64(&text.as_bytes()[..body_end.min(text.len())]);
        Ok((Lines { pairs }, declared_digest, body_digest))
    }

    fn take(&mut self, key: &'static str) -> Result<&'a str, DocError> {
        self.take_opt(key)?.ok_or(DocError::MissingKey(key))
    }

    fn take_opt(&mut self, key: &'static str) -> Result<Option<&'a str>, DocError> {
        let mut found = None;
        let mut index = None;
        for (i, (k, v)) in self.pairs.iter().enumerate() {
            if k == key {
                if found.is_some() {
                    return Err(DocError::DuplicateKey(key.to_string()));
                }
                found = Some(*v);
                index = Some(i);
            }
        }
        if let Some(i) = index {
            self.pairs.remove(i);
        }
        Ok(found)
    }

    fn finish(self) -> Result<(), DocError> {
        match self.pairs.into_iter().next() {
            None => Ok(()),
            Some((key, _)) => Err(DocError::UnknownKey(key)),
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, DocError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| DocError::BadValue {
        key: key.to_string(),
        detail: e.to_string(),
    })
}

fn parse_word(key: &str, value: &str) -> Result<CardWord, DocError> {
    value.parse().map_err(|e| DocError::BadValue {
        key: key.to_string(),
        detail: format!("{e}"),
    })
}

fn parse_stats(lines: &mut Lines) -> Result<Option<SearchStats>, DocError> {
    let Some(total) = lines.take_opt("instances-total")? else {
        return Ok(None);
    };
    Ok(Some(SearchStats {
        permutations: parse_num("permutations", lines.take("permutations")?)?,
        shift_space: parse_num(
            "shift-vectors-per-permutation",
            lines.take("shift-vectors-per-permutation")?,
        )?,
        instances_total: parse_num("instances-total", total)?,
        infeasible: parse_num("instances-infeasible", lines.take("instances-infeasible")?)?,
        correctness_failed: parse_num(
            "instances-correctness-failed",
            lines.take("instances-correctness-failed")?,
        )?,
        accepted_instances: parse_num("instances-accepted", lines.take("instances-accepted")?)?,
        accepted_entries: parse_num("entries-accepted", lines.take("entries-accepted")?)?,
        exploratory_entries: parse_num(
            "entries-exploratory",
            lines.take("entries-exploratory")?,
        )?,
        indeterminate: parse_num("indeterminate", lines.take("indeterminate")?)?,
    }))
}

/// Parses any supported document.
pub fn parse_document(text: &str) -> Result<Document, DocError> {
    let (mut lines, declared, computed) = Lines::parse(text)?;
    if let Some(declared) = declared {
        if declared != computed {
            return Err(DocError::DigestMismatch);
        }
    }
    let kind = lines.take("scfo-document")?;
    let version = lines.take("format-version")?;
    if version != "1" {
        return Err(DocError::UnsupportedVersion(version.to_string()));
    }
    match kind {
        "protocol-certificate" => parse_certificate_body(lines),
        "protocol-template" => parse_template_body(lines),
        other => Err(DocError::UnsupportedKind(other.to_string())),
    }
}

pub fn parse_certificate(text: &str) -> Result<ProtocolCertificate, DocError> {
    match parse_document(text)? {
        Document::Certificate(cert) => Ok(cert),
        _ => Err(DocError::UnsupportedKind(
            "expected protocol-certificate".to_string(),
        )),
    }
}

fn parse_certificate_body(mut lines: Lines) -> Result<Document, DocError> {
    let _tool = lines.take_opt("tool-version")?;
    let function_name = lines.take_opt("function")?.map(str::to_string);
    let vars: usize = parse_num("variables", lines.take("variables")?)?;
    let table: TruthTable = lines
        .take("truth-table")?
        .parse()
        .map_err(|e| DocError::BadValue {
            key: "truth-table".to_string(),
            detail: format!("{e}"),
        })?;
    if table.vars() != vars {
        return Err(DocError::BadValue {
            key: "variables".to_string(),
            detail: format!("table has {} variables, header says {vars}", table.vars()),
        });
    }
    let mode = lines.take("mode")?.to_string();
    let prune = lines.take("prune")? == "on";
    let explore_delta: u32 = parse_num("explore-delta", lines.take("explore-delta")?)?;
    let arrangement_raw = lines.take("arrangement")?;
    let one_based: Vec<usize> = arrangement_raw
        .split_whitespace()
        .map(|t| parse_num("arrangement", t))
        .collect::<Result<_, _>>()?;
    let arrangement = Arrangement::from_one_based(one_based).map_err(|e| DocError::BadValue {
        key: "arrangement".to_string(),
        detail: e.to_string(),
    })?;
    let insertion_raw = lines.take("insertion")?;
    let counts: Vec<u32> = insertion_raw
        .split_whitespace()
        .map(|t| parse_num("insertion", t))
        .collect::<Result<_, _>>()?;
    let insertion = InsertionVector::new(counts);
    let additional_clubs: u32 =
        parse_num("additional-clubs", lines.take("additional-clubs")?)?;
    let final_length: u32 = parse_num("final-length", lines.take("final-length")?)?;
    let opening_pattern_0 = parse_word("opening-pattern-0", lines.take("opening-pattern-0")?)?;
    let opening_pattern_1 = parse_word("opening-pattern-1", lines.take("opening-pattern-1")?)?;
    let _glyphs0 = lines.take_opt("opening-pattern-0-cards")?;
    let _glyphs1 = lines.take_opt("opening-pattern-1-cards")?;
    let tallies = parse_stats(&mut lines)?;
    lines.finish()?;
    Ok(Document::Certificate(ProtocolCertificate {
        function_name,
        table,
        arrangement,
        insertion,
        additional_clubs,
        final_length,
        opening_pattern_0,
        opening_pattern_1,
        mode,
        prune,
        explore_delta,
        tallies,
    }))
}

fn parse_slot(token: &str) -> Result<Slot, DocError> {
    let bad = |detail: String| DocError::BadValue {
        key: "slots".to_string(),
        detail,
    };
    match token {
        "C" | "c" | "club" => Ok(Slot::Club),
        "H" | "h" | "heart" => Ok(Slot::Heart),
        _ => {
            let (negated, rest) = match token.strip_prefix('!') {
                Some(rest) => (true, rest),
                None => (false, token),
            };
            let var_text = rest
                .strip_prefix('x')
                .ok_or_else(|| bad(format!("unrecognized slot {token:?}")))?;
            let var: usize = var_text
                .parse()
                .map_err(|_| bad(format!("unrecognized slot {token:?}")))?;
            if var == 0 {
                return Err(bad("variables are numbered from x1".to_string()));
            }
            Ok(Slot::Lit {
                var: var - 1,
                negated,
            })
        }
    }
}

fn parse_template_body(mut lines: Lines) -> Result<Document, DocError> {
    let vars: usize = parse_num("variables", lines.take("variables")?)?;
    let slots: Vec<Slot> = lines
        .take("slots")?
        .split_whitespace()
        .map(parse_slot)
        .collect::<Result<_, _>>()?;
    let p0 = lines
        .take_opt("output-pattern-0")?
        .map(|v| parse_word("output-pattern-0", v))
        .transpose()?;
    let p1 = lines
        .take_opt("output-pattern-1")?
        .map(|v| parse_word("output-pattern-1", v))
        .transpose()?;
    let outputs = match (p0, p1) {
        (Some(a), Some(b)) => Some((a, b)),
        (None, None) => None,
        _ => {
            return Err(DocError::BadValue {
                key: "output-pattern-0".to_string(),
                detail: "output patterns must be given in pairs".to_string(),
            })
        }
    };
    let name = lines.take_opt("function")?.map(str::to_string);
    let table_text = lines.take_opt("truth-table")?;
    let function = match (table_text, &name) {
        (Some(text), _) => text.parse().map_err(|e| DocError::BadValue {
            key: "truth-table".to_string(),
            detail: format!("{e}"),
        })?,
        (None, Some(name)) => named_function(name).map_err(|e| DocError::BadValue {
            key: "function".to_string(),
            detail: e.to_string(),
        })?,
        (None, None) => return Err(DocError::MissingKey("truth-table")),
    };
    lines.finish()?;
    let template = ProtocolTemplate::new(vars, slots, outputs)?;
    Ok(Document::Template {
        template,
        function,
        name,
    })
}

/// Writes through a temporary file in the same directory, then renames.
pub fn atomic_write(path: &Path, content: &str) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(dir) => dir.join(format!(
            ".{}.tmp",
            path.file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| "scfo-out".to_string())
        )),
        None => Path::new(&format!(
            ".{}.tmp",
            path.to_string_lossy()
        ))
        .to_path_buf(),
    };
    fs::write(&tmp, content)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
