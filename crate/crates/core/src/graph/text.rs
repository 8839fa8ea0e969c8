//! Plain-text graph format.
//!
//! ```text
//! # optional comment lines
//! v 3
//! e 0 1
//! e 1 2
//! e 2 0
//! ```
//!
//! The first non-comment line gives the vertex count; each following line
//! is one edge `e <tail> <head>` in edge-id order. Blank lines are ignored
//! on input and never emitted.

use std::fmt::Write as _;
use std::str::FromStr;

use super::{GraphError, LabeledGraph};

impl LabeledGraph {
    /// Canonical text form. Two graphs are equal iff their texts are equal.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(8 + 10 * self.edge_count());
        writeln!(out, "v {}", self.vertex_count()).unwrap();
        for &(t, h) in self.edges() {
            writeln!(out, "e {t} {h}").unwrap();
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self, GraphError> {
        let mut vertex_count = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |msg: String| GraphError::Parse { line: line_no, msg };
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let tag = parts.next().unwrap();
            let nums: Vec<usize> = parts
                .map(|s| s.parse().map_err(|_| err(format!("bad number {s:?}"))))
                .collect::<Result<_, _>>()?;
            match (tag, vertex_count) {
                ("v", None) => {
                    if nums.len() != 1 {
                        return Err(err("expected `v <vertex_count>`".into()));
                    }
                    vertex_count = Some(nums[0]);
                }
                ("v", Some(_)) => return Err(err("duplicate `v` line".into())),
                ("e", Some(_)) => {
                    if nums.len() != 2 {
                        return Err(err("expected `e <tail> <head>`".into()));
                    }
                    edges.push((nums[0], nums[1]));
                }
                ("e", None) => return Err(err("edge before `v` line".into())),
                _ => return Err(err(format!("unknown line tag {tag:?}"))),
            }
        }
        let vertex_count = vertex_count.ok_or(GraphError::Parse {
            line: 0,
            msg: "missing `v` line".into(),
        })?;
        LabeledGraph::new(vertex_count, edges)
    }
}

impl FromStr for LabeledGraph {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse_text(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let g = LabeledGraph::new(3, vec![(0, 1), (1, 2), (2, 0)]).unwrap();
        let text = g.to_text();
        assert_eq!(text, "v 3\ne 0 1\ne 1 2\ne 2 0\n");
        assert_eq!(LabeledGraph::parse_text(&text).unwrap(), g);
    }

    #[test]
    fn comments_and_blank_lines() {
        let g: LabeledGraph = "# square\nv 4\n\ne 0 1\n# mid\ne 1 2\ne 2 3\ne 3 0\n"
            .parse()
            .unwrap();
        assert_eq!(g.edge_count(), 4);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            LabeledGraph::parse_text("e 0 1\n"),
            Err(GraphError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            LabeledGraph::parse_text("v 2\ne 0 x\n"),
            Err(GraphError::Parse { line: 2, .. })
        ));
        assert!(LabeledGraph::parse_text("").is_err());
        assert_eq!(
            LabeledGraph::parse_text("v 2\ne 1 1\n"),
            Err(GraphError::SelfLoop(0))
        );
    }
}
