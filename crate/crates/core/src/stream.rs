//! Text stream format.
//!
//! ```text
//! # n=5
//! # directed=1        (optional)
//! + 0 1               insert
//! - 0 1               delete
//! ?                   query checkpoint
//! ```

use std::fmt::Write as _;
use std::io::Read;

use thiserror::Error;

use crate::graph::{NodeId, UpdateEvent};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub reason: String,
}

impl ParseError {
    fn new(line: usize, reason: impl Into<String>) -> Self {
        Self {
            line,
            reason: reason.into(),
        }
    }
}

/// An event together with the 1-based line it came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Record {
    pub line: usize,
    pub event: UpdateEvent,
}

/// A parsed stream file: header plus events.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamFile {
    pub n: usize,
    pub directed: bool,
    pub records: Vec<Record>,
}

impl StreamFile {
    pub fn events(&self) -> impl Iterator<Item = UpdateEvent> + '_ {
        self.records.iter().map(|r| r.event)
    }

    /// Serializes back to the text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# n={}", self.n).unwrap();
        if self.directed {
            out.push_str("# directed=1\n");
        }
        for r in &self.records {
            write_event(&mut out, &r.event);
        }
        out
    }

    pub fn from_events(n: usize, directed: bool, events: impl IntoIterator<Item = UpdateEvent>) -> Self {
        let records = events
            .into_iter()
            .enumerate()
            .map(|(i, event)| Record {
                line: i + 2 + directed as usize,
                event,
            })
            .collect();
        Self { n, directed, records }
    }
}

fn write_event(out: &mut String, e: &UpdateEvent) {
    match *e {
        UpdateEvent::Insert(u, v) => writeln!(out, "+ {u} {v}").unwrap(),
        UpdateEvent::Delete(u, v) => writeln!(out, "- {u} {v}").unwrap(),
        UpdateEvent::Query => out.push_str("?\n"),
    }
}

#[derive(Debug, Default)]
struct Header {
    n: Option<usize>,
    directed: bool,
}

fn parse_header(line: usize, body: &str, header: &mut Header) -> Result<(), ParseError> {
    for tok in body.split_whitespace() {
        let Some((key, value)) = tok.split_once('=') else {
            continue;
        };
        match key {
            "n" => {
                let n = value
                    .parse::<usize>()
                    .map_err(|_| ParseError::new(line, format!("bad node count {value:?}")))?;
                header.n = Some(n);
            }
            "directed" => {
                header.directed = match value {
                    "1" | "true" => true,
                    "0" | "false" => false,
                    _ => return Err(ParseError::new(line, format!("bad directed flag {value:?}"))),
                }
            }
            _ => {}
        }
    }
    Ok(())
}

fn parse_node(line: usize, tok: Option<&str>, n: Option<usize>) -> Result<NodeId, ParseError> {
    let tok = tok.ok_or_else(|| ParseError::new(line, "missing endpoint"))?;
    let v: NodeId = tok
        .parse()
        .map_err(|_| ParseError::new(line, format!("bad node id {tok:?}")))?;
    if let Some(n) = n {
        if v as usize >= n {
            return Err(ParseError::new(line, format!("node {v} out of range for n={n}")));
        }
    }
    Ok(v)
}

fn parse_body(text: &str, header: &mut Header) -> Result<Vec<Record>, ParseError> {
    let mut records = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('#') {
            parse_header(line, rest, header)?;
            continue;
        }
        let mut toks = body.split_whitespace();
        let op = toks.next().unwrap_or_default();
        let event = match op {
            "?" => UpdateEvent::Query,
            "+" | "-" => {
                let u = parse_node(line, toks.next(), header.n)?;
                let v = parse_node(line, toks.next(), header.n)?;
                if u == v {
                    return Err(ParseError::new(line, "self-loop"));
                }
                if op == "+" {
                    UpdateEvent::Insert(u, v)
                } else {
                    UpdateEvent::Delete(u, v)
                }
            }
            other => return Err(ParseError::new(line, format!("unknown record {other:?}"))),
        };
        if toks.next().is_some() {
            return Err(ParseError::new(line, "trailing tokens"));
        }
        records.push(Record { line, event });
    }
    Ok(records)
}

/// Parses event records; header lines are accepted but not required.
pub fn parse_events(text: &str) -> Result<Vec<Record>, ParseError> {
    parse_body(text, &mut Header::default())
}

/// Parses a complete stream file; the `# n=` header is mandatory.
pub fn parse_stream(text: &str) -> Result<StreamFile, ParseError> {
    let mut header = Header::default();
    let records = parse_body(text, &mut header)?;
    let n = header
        .n
        .ok_or_else(|| ParseError::new(1, "missing `# n=<int>` header"))?;
    Ok(StreamFile {
        n,
        directed: header.directed,
        records,
    })
}

pub fn read_stream(mut reader: impl Read) -> Result<StreamFile, ParseError> {
    let mut text = String::new();
    reader
        .read_to_string(&mut text)
        .map_err(|e| ParseError::new(0, format!("read failed: {e}")))?;
    parse_stream(&text)
}
