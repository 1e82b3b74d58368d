//! Line-oriented text format for ribbon graphs.
//!
//! ```text
//! graph <name>
//! vertex <vid>: <dart> <dart> ...   # counterclockwise
//! edge <dart> <dart>
//! ext <legnum> <dart>
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;

use ribbon_core::ribbon::{build_graph, GraphError, RibbonGraph};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DslError {
    #[error("syntax error at line {line}, column {col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("line {line}: {source}")]
    Located {
        line: usize,
        #[source]
        source: GraphError,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

impl DslError {
    /// The underlying graph error, if this is not a syntax error.
    pub fn graph_error(&self) -> Option<&GraphError> {
        match self {
            DslError::Located { source, .. } => Some(source),
            DslError::Graph(e) => Some(e),
            DslError::Syntax { .. } => None,
        }
    }
}

struct Token<'a> {
    text: &'a str,
    col: usize,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &line[s..i],
                    col: s + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &line[s..],
            col: s + 1,
        });
    }
    out
}

fn syntax(line: usize, col: usize, message: impl Into<String>) -> DslError {
    DslError::Syntax {
        line,
        col,
        message: message.into(),
    }
}

fn valid_name(s: &str) -> bool {
    !s.is_empty()
        && s
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.' | '\''))
}

/// Parse a graph. Dart names are numbered in order of first appearance on
/// vertex lines; the names are kept as dart labels.
pub fn parse_graph_dsl(text: &str) -> Result<RibbonGraph, DslError> {
    let mut name: Option<String> = None;
    let mut vertex_names: Vec<String> = Vec::new();
    let mut rotation: Vec<Vec<u32>> = Vec::new();
    let mut dart_names: Vec<String> = Vec::new();
    let mut dart_index: HashMap<String, u32> = HashMap::new();
    let mut paired: HashMap<u32, usize> = HashMap::new();
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    let mut legs: Vec<(usize, u32)> = Vec::new();
    let mut leg_line: HashMap<usize, usize> = HashMap::new();
    let mut last_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        last_line = ln;
        let line = raw.split('#').next().unwrap_or("");
        let toks = tokens(line);
        let Some(head) = toks.first() else { continue };
        match head.text {
            "graph" => {
                if name.is_some() {
                    return Err(syntax(ln, head.col, "second 'graph' line"));
                }
                if !rotation.is_empty() {
                    return Err(syntax(ln, head.col, "'graph' must come first"));
                }
                match toks.as_slice() {
                    [_, n] if valid_name(n.text) => name = Some(n.text.to_string()),
                    [_, n] => return Err(syntax(ln, n.col, "invalid graph name")),
                    [_] => return Err(syntax(ln, head.col + head.text.len(), "missing graph name")),
                    [_, _, extra, ..] => return Err(syntax(ln, extra.col, "unexpected token")),
                    [] => unreachable!(),
                }
            }
            "vertex" => {
                if name.is_none() {
                    return Err(syntax(ln, head.col, "expected 'graph <name>' first"));
                }
                let Some(vt) = toks.get(1) else {
                    return Err(syntax(ln, head.col + head.text.len(), "missing vertex id"));
                };
                // accept both "v:" and "v :"
                let (vid, rest) = if let Some(v) = vt.text.strip_suffix(':') {
                    (v, &toks[2..])
                } else if toks.get(2).map(|t| t.text) == Some(":") {
                    (vt.text, &toks[3..])
                } else {
                    return Err(syntax(ln, vt.col + vt.text.len(), "expected ':' after vertex id"));
                };
                if !valid_name(vid) {
                    return Err(syntax(ln, vt.col, "invalid vertex id"));
                }
                if vertex_names.iter().any(|v| v == vid) {
                    return Err(syntax(ln, vt.col, format!("vertex '{vid}' declared twice")));
                }
                if rest.is_empty() {
                    return Err(syntax(ln, vt.col + vt.text.len(), "vertex has no darts"));
                }
                let mut cyc = Vec::with_capacity(rest.len());
                for t in rest {
                    if !valid_name(t.text) {
                        return Err(syntax(ln, t.col, "invalid dart name"));
                    }
                    if let Some(&id) = dart_index.get(t.text) {
                        return Err(DslError::Located {
                            line: ln,
                            source: GraphError::DuplicateDart(ribbon_core::ribbon::Dart(id)),
                        });
                    }
                    let id = dart_names.len() as u32;
                    dart_index.insert(t.text.to_string(), id);
                    dart_names.push(t.text.to_string());
                    cyc.push(id);
                }
                vertex_names.push(vid.to_string());
                rotation.push(cyc);
            }
            "edge" | "ext" => {
                if name.is_none() {
                    return Err(syntax(ln, head.col, "expected 'graph <name>' first"));
                }
                if toks.len() < 3 {
                    let col = toks.last().map_or(1, |t| t.col + t.text.len());
                    return Err(syntax(ln, col, format!("'{}' needs two arguments", head.text)));
                }
                if toks.len() > 3 {
                    return Err(syntax(ln, toks[3].col, "unexpected token"));
                }
                let dart = |t: &Token<'_>| -> Result<u32, DslError> {
                    dart_index
                        .get(t.text)
                        .copied()
                        .ok_or_else(|| syntax(ln, t.col, format!("unknown dart '{}'", t.text)))
                };
                let mut claim = |id: u32| -> Result<(), DslError> {
                    if paired.insert(id, ln).is_some() {
                        return Err(DslError::Located {
                            line: ln,
                            source: GraphError::DuplicateDart(ribbon_core::ribbon::Dart(id)),
                        });
                    }
                    Ok(())
                };
                if head.text == "edge" {
                    let (a, b) = (dart(&toks[1])?, dart(&toks[2])?);
                    if a == b {
                        return Err(DslError::Located {
                            line: ln,
                            source: GraphError::SelfPairedDart(ribbon_core::ribbon::Dart(a)),
                        });
                    }
                    claim(a)?;
                    claim(b)?;
                    pairs.push((a, b));
                } else {
                    let k: usize = toks[1]
                        .text
                        .parse()
                        .map_err(|_| syntax(ln, toks[1].col, "leg number must be a positive integer"))?;
                    if k == 0 {
                        return Err(syntax(ln, toks[1].col, "leg numbers start at 1"));
                    }
                    if leg_line.insert(k, ln).is_some() {
                        return Err(DslError::Located {
                            line: ln,
                            source: GraphError::DuplicateLeg(k),
                        });
                    }
                    let d = dart(&toks[2])?;
                    claim(d)?;
                    legs.push((k, d));
                }
            }
            other => {
                return Err(syntax(ln, head.col, format!("unknown keyword '{other}'")));
            }
        }
    }

    let Some(name) = name else {
        return Err(syntax(last_line.max(1), 1, "missing 'graph <name>' line"));
    };
    if rotation.is_empty() {
        return Err(syntax(last_line.max(1), 1, "graph has no vertices"));
    }
    let mut g = build_graph(&name, &rotation, &pairs, &legs)?;
    g.dart_labels = dart_names;
    g.vertex_labels = vertex_names;
    Ok(g)
}

/// Write a graph in the text format, using its vertex and dart labels.
pub fn serialize_graph(g: &RibbonGraph) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "graph {}", g.name);
    for v in 0..g.num_vertices() {
        let darts: Vec<&str> = g.rotation(v).iter().map(|&h| g.dart_labels[h].as_str()).collect();
        let _ = writeln!(s, "vertex {}: {}", g.vertex_labels[v], darts.join(" "));
    }
    for &(a, b) in g.edges() {
        let _ = writeln!(s, "edge {} {}", g.dart_labels[a], g.dart_labels[b]);
    }
    for k in 1..=g.num_legs() {
        let _ = writeln!(s, "ext {} {}", k, g.dart_labels[g.leg_dart(k)]);
    }
    s
}

/// Structure with names removed: dense rotation, edges and leg darts.
pub fn canonical_form(g: &RibbonGraph) -> (Vec<Vec<usize>>, Vec<(usize, usize)>, Vec<usize>) {
    (
        (0..g.num_vertices()).map(|v| g.rotation(v).to_vec()).collect(),
        g.edges().to_vec(),
        (1..=g.num_legs()).map(|k| g.leg_dart(k)).collect(),
    )
}
