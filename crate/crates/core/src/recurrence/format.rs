//! Family spec text format, version 1.
//!
//! ```text
//! format: 1
//! name: nonskew_grid_m3
//! offset: 3
//! offset_layers: 2
//! stride: 1
//!
//! [base]
//! vertices: 2
//! prelayer 0: - 0 1
//!
//! [layer]
//! width: 3
//! edge: L0.0 L0.1
//! edge: L1.0 L0.0
//! edge: L0.1 B0
//! delete: 1 2
//!
//! [boundary]
//! vertices: B0 B1 L0.0 L0.1 L0.2 L1.0 L1.1 L1.2
//! ```
//!
//! Header keys `format`, `name`, `offset`, `offset_layers` and `stride` are
//! required; `formula` (default 2) and `warmup` are optional.
//!
//! `[base]` gives `W_0` either inline (`vertices: <count>` followed by
//! `edge: <tail> <head>` lines) or as `graph: <path>` naming a file in the
//! graph text format, resolved relative to the spec file. `prelayer <d>:`
//! lists, for each layer vertex, the `W_0` vertex standing in for layer
//! `-d`, or `-` if edges to it are left out.
//!
//! `[layer]` holds the width, the template edges in order (their indices
//! are used by `delete: <after> <template>`), and `[boundary]` lists the
//! vertices of the boundary graph. Lines starting with `#` are comments.

use std::fmt::Write as _;
use std::path::Path;

use super::{Deletion, Endpoint, RecursiveFamilySpec, SpecError, TemplateEdge};
use crate::graph::LabeledGraph;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Header,
    Base,
    Layer,
    Boundary,
}

impl RecursiveFamilySpec {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "format: 1").unwrap();
        writeln!(out, "name: {}", self.name).unwrap();
        writeln!(out, "offset: {}", self.offset).unwrap();
        writeln!(out, "offset_layers: {}", self.offset_layers).unwrap();
        writeln!(out, "stride: {}", self.stride).unwrap();
        writeln!(out, "formula: {}", self.formula).unwrap();
        if let Some(w) = self.warmup {
            writeln!(out, "warmup: {w}").unwrap();
        }
        writeln!(out, "\n[base]").unwrap();
        writeln!(out, "vertices: {}", self.base.vertex_count()).unwrap();
        for &(t, h) in self.base.edges() {
            writeln!(out, "edge: {t} {h}").unwrap();
        }
        for (d, row) in self.prelayers.iter().enumerate() {
            let cells: Vec<String> = row
                .iter()
                .map(|c| c.map_or_else(|| "-".to_string(), |v| v.to_string()))
                .collect();
            writeln!(out, "prelayer {d}: {}", cells.join(" ")).unwrap();
        }
        writeln!(out, "\n[layer]").unwrap();
        writeln!(out, "width: {}", self.width).unwrap();
        for e in &self.edges {
            writeln!(out, "edge: {} {}", e.tail, e.head).unwrap();
        }
        for d in &self.deletions {
            writeln!(out, "delete: {} {}", d.after, d.template).unwrap();
        }
        writeln!(out, "\n[boundary]").unwrap();
        let labels: Vec<String> = self.boundary.iter().map(|e| e.to_string()).collect();
        writeln!(out, "vertices: {}", labels.join(" ")).unwrap();
        out
    }

    /// Parses a spec with an inline base graph.
    pub fn parse_text(text: &str) -> Result<Self, SpecError> {
        parse(text, |_| {
            Err("`graph:` needs a spec file location; use RecursiveFamilySpec::load".into())
        })
    }

    /// Reads a spec file; `graph:` paths are relative to its directory.
    pub fn load(path: &Path) -> Result<Self, SpecError> {
        let text = std::fs::read_to_string(path).map_err(|e| SpecError::Parse {
            line: 0,
            msg: format!("{}: {e}", path.display()),
        })?;
        let dir = path.parent().unwrap_or(Path::new("."));
        parse(&text, |rel| {
            let p = dir.join(rel);
            let g = std::fs::read_to_string(&p).map_err(|e| format!("{}: {e}", p.display()))?;
            LabeledGraph::parse_text(&g).map_err(|e| format!("{}: {e}", p.display()))
        })
    }
}

fn two_fields(s: &str) -> Option<(&str, &str)> {
    let mut it = s.split_whitespace();
    match (it.next(), it.next(), it.next()) {
        (Some(a), Some(b), None) => Some((a, b)),
        _ => None,
    }
}

fn parse<F>(text: &str, load_graph: F) -> Result<RecursiveFamilySpec, SpecError>
where
    F: Fn(&str) -> Result<LabeledGraph, String>,
{
    let mut section = Section::Header;
    let mut format = None;
    let mut name = None;
    let mut offset = None;
    let mut offset_layers = None;
    let mut stride = None;
    let mut formula = 2u8;
    let mut warmup = None;
    let mut base_vertices: Option<usize> = None;
    let mut base_edges: Vec<(usize, usize)> = Vec::new();
    let mut base_graph: Option<LabeledGraph> = None;
    let mut prelayers: Vec<(usize, Vec<Option<usize>>)> = Vec::new();
    let mut width = None;
    let mut edges = Vec::new();
    let mut deletions = Vec::new();
    let mut boundary: Option<Vec<Endpoint>> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |msg: String| SpecError::Parse { line: line_no, msg };
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line {
            "[base]" => {
                section = Section::Base;
                continue;
            }
            "[layer]" => {
                section = Section::Layer;
                continue;
            }
            "[boundary]" => {
                section = Section::Boundary;
                continue;
            }
            _ if line.starts_with('[') => return Err(err(format!("unknown section {line}"))),
            _ => {}
        }
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| err(format!("expected `key: value`, got {line:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        let number = |s: &str| -> Result<usize, SpecError> {
            s.parse().map_err(|_| err(format!("bad number {s:?}")))
        };
        let pair = |s| two_fields(s).ok_or_else(|| err(format!("expected two fields, got {s:?}")));
        match (section, key) {
            (Section::Header, "format") => {
                if value != "1" {
                    return Err(err(format!("unsupported format {value:?}")));
                }
                format = Some(1);
            }
            (Section::Header, "name") => name = Some(value.to_string()),
            (Section::Header, "offset") => offset = Some(number(value)?),
            (Section::Header, "offset_layers") => offset_layers = Some(number(value)?),
            (Section::Header, "stride") => stride = Some(number(value)?),
            (Section::Header, "formula") => {
                formula = value
                    .parse()
                    .map_err(|_| err(format!("bad formula {value:?}")))?
            }
            (Section::Header, "warmup") => warmup = Some(number(value)?),
            (Section::Base, "vertices") => base_vertices = Some(number(value)?),
            (Section::Base, "edge") => {
                let (a, b) = pair(value)?;
                base_edges.push((number(a)?, number(b)?));
            }
            (Section::Base, "graph") => base_graph = Some(load_graph(value).map_err(err)?),
            (Section::Base, k) if k.starts_with("prelayer") => {
                let d = number(k["prelayer".len()..].trim())?;
                let row = value
                    .split_whitespace()
                    .map(|c| {
                        if c == "-" {
                            Ok(None)
                        } else {
                            number(c).map(Some)
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                prelayers.push((d, row));
            }
            (Section::Layer, "width") => width = Some(number(value)?),
            (Section::Layer, "edge") => {
                let (a, b) = pair(value)?;
                edges.push(TemplateEdge::new(
                    a.parse().map_err(err)?,
                    b.parse().map_err(err)?,
                ));
            }
            (Section::Layer, "delete") => {
                let (a, b) = pair(value)?;
                deletions.push(Deletion {
                    after: number(a)?,
                    template: number(b)?,
                });
            }
            (Section::Boundary, "vertices") => {
                boundary = Some(
                    value
                        .split_whitespace()
                        .map(|s| s.parse().map_err(err))
                        .collect::<Result<_, _>>()?,
                )
            }
            _ => return Err(err(format!("unexpected key {key:?} here"))),
        }
    }

    let missing = |what: &str| SpecError::Parse {
        line: 0,
        msg: format!("missing {what}"),
    };
    format.ok_or_else(|| missing("`format: 1` header"))?;
    let base = match (base_graph, base_vertices) {
        (Some(g), None) if base_edges.is_empty() => g,
        (None, Some(n)) => LabeledGraph::new(n, base_edges)?,
        (None, None) => return Err(missing("[base] vertices or graph")),
        _ => {
            return Err(SpecError::Parse {
                line: 0,
                msg: "[base] takes either `graph:` or `vertices:`/`edge:`, not both".into(),
            })
        }
    };
    prelayers.sort_by_key(|&(d, _)| d);
    for (i, &(d, _)) in prelayers.iter().enumerate() {
        if d != i {
            return Err(SpecError::Parse {
                line: 0,
                msg: format!("prelayers must be numbered 0, 1, … without gaps (missing {i})"),
            });
        }
    }
    Ok(RecursiveFamilySpec {
        name: name.ok_or_else(|| missing("`name`"))?,
        offset: offset.ok_or_else(|| missing("`offset`"))?,
        offset_layers: offset_layers.ok_or_else(|| missing("`offset_layers`"))?,
        stride: stride.ok_or_else(|| missing("`stride`"))?,
        formula,
        warmup,
        base,
        prelayers: prelayers.into_iter().map(|(_, row)| row).collect(),
        width: width.ok_or_else(|| missing("[layer] width"))?,
        edges,
        deletions,
        boundary: boundary.ok_or_else(|| missing("[boundary] vertices"))?,
    })
}
