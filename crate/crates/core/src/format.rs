//! Line-oriented text formats for graphs and syndromes.
//!
//! Graph files:
//!
//! ```text
//! # comment
//! nodes 3
//! node 0 a 0
//! node 1 b 0
//! node 2 c 0
//! edge 0 1
//! ```
//!
//! Syndrome files hold one `test <tester> <tested> <0|1>` line per edge.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::graph::{DiagnosticGraph, NodeLabel, Syndrome};

fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(k, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then(|| (k + 1, line.split_whitespace().collect()))
    })
}

fn parse_num<T: std::str::FromStr>(line: usize, tok: &str, what: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} `{tok}`")))
}

pub fn write_graph(graph: &DiagnosticGraph) -> String {
    let mut out = String::new();
    writeln!(out, "nodes {}", graph.node_count()).unwrap();
    for (k, label) in graph.nodes().iter().enumerate() {
        writeln!(out, "node {k} {} {}", label.module_id, label.timestamp).unwrap();
    }
    for (i, j) in graph.edges() {
        writeln!(out, "edge {i} {j}").unwrap();
    }
    out
}

pub fn parse_graph(text: &str) -> Result<DiagnosticGraph> {
    let mut declared: Option<usize> = None;
    let mut nodes: Vec<Option<NodeLabel>> = Vec::new();
    let mut edges = Vec::new();

    for (line, toks) in content_lines(text) {
        match toks.as_slice() {
            ["nodes", n] => {
                if declared.is_some() {
                    return Err(Error::parse(line, "repeated `nodes` header"));
                }
                let n: usize = parse_num(line, n, "node count")?;
                declared = Some(n);
                nodes = vec![None; n];
            }
            ["node", idx, module, ts] => {
                let n = declared.ok_or_else(|| Error::parse(line, "`node` before `nodes` header"))?;
                let idx: usize = parse_num(line, idx, "node index")?;
                if idx >= n {
                    return Err(Error::parse(line, format!("node index {idx} >= {n}")));
                }
                if nodes[idx].is_some() {
                    return Err(Error::parse(line, format!("node {idx} declared twice")));
                }
                nodes[idx] = Some(NodeLabel::new(*module, parse_num(line, ts, "timestamp")?));
            }
            ["edge", i, j] => {
                if declared.is_none() {
                    return Err(Error::parse(line, "`edge` before `nodes` header"));
                }
                edges.push((parse_num(line, i, "node index")?, parse_num(line, j, "node index")?));
            }
            _ => return Err(Error::parse(line, "unrecognized line")),
        }
    }

    let declared = declared.ok_or_else(|| Error::parse(0, "missing `nodes` header"))?;
    let nodes = nodes
        .into_iter()
        .enumerate()
        .map(|(k, n)| n.ok_or_else(|| Error::parse(0, format!("node {k} of {declared} not declared"))))
        .collect::<Result<Vec<_>>>()?;
    DiagnosticGraph::new(nodes, edges)
}

pub fn write_syndrome(graph: &DiagnosticGraph, syndrome: &Syndrome) -> String {
    let mut out = String::new();
    for ((i, j), &bit) in graph.edges().iter().zip(syndrome.outcomes()) {
        writeln!(out, "test {i} {j} {}", u8::from(bit)).unwrap();
    }
    out
}

pub fn parse_syndrome(graph: &DiagnosticGraph, text: &str) -> Result<Syndrome> {
    let tests = content_lines(text)
        .map(|(line, toks)| match toks.as_slice() {
            ["test", i, j, bit] => {
                let bit = match *bit {
                    "0" => false,
                    "1" => true,
                    other => return Err(Error::parse(line, format!("outcome must be 0 or 1, got `{other}`"))),
                };
                Ok((parse_num(line, i, "node index")?, parse_num(line, j, "node index")?, bit))
            }
            _ => Err(Error::parse(line, "expected `test <tester> <tested> <0|1>`")),
        })
        .collect::<Result<Vec<_>>>()?;
    Syndrome::from_tests(graph, tests)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_with_comments() {
        let text = "# cycle\nnodes 3\nnode 0 a 0\nnode 2 c 0 # trailing\nnode 1 b 0\n\nedge 2 0\nedge 0 1\nedge 1 2\n";
        let g = parse_graph(text).unwrap();
        assert_eq!(g.nodes()[2].module_id, "c");
        assert_eq!(g.edges(), &[(0, 1), (1, 2), (2, 0)]);
        let s = parse_syndrome(&g, "test 0 1 1\ntest 1 2 0\n# x\ntest 2 0 0\n").unwrap();
        assert_eq!(s.outcomes(), &[true, false, false]);
        assert_eq!(write_syndrome(&g, &s), "test 0 1 1\ntest 1 2 0\ntest 2 0 0\n");
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_graph("node 0 a 0\n").is_err());
        assert!(parse_graph("nodes 2\nnode 0 a 0\n").is_err());
        assert!(parse_graph("nodes 1\nnode 0 a x\n").is_err());
        assert!(matches!(
            parse_graph("nodes 2\nnode 0 a 0\nnode 1 b 0\nedge 0 0\n"),
            Err(Error::SelfLoop(0))
        ));
        let g = parse_graph("nodes 2\nnode 0 a 0\nnode 1 b 0\nedge 0 1\n").unwrap();
        assert!(parse_syndrome(&g, "test 0 1 2\n").is_err());
        assert!(parse_syndrome(&g, "").is_err());
    }

    fn arb_graph() -> impl Strategy<Value = DiagnosticGraph> {
        (1usize..9).prop_flat_map(|n| {
            let labels = proptest::collection::vec(("[a-zA-Z_]{1,6}", -3i64..4), n);
            let edges = proptest::collection::vec((0..n, 0..n), 0..(n * n));
            (labels, edges).prop_filter_map("valid graph", |(labels, edges)| {
                let nodes = labels.into_iter().map(|(m, t)| NodeLabel::new(m, t)).collect();
                let mut edges: Vec<_> = edges.into_iter().filter(|(i, j)| i != j).collect();
                edges.sort_unstable();
                edges.dedup();
                DiagnosticGraph::new(nodes, edges).ok()
            })
        })
    }

    proptest! {
        #[test]
        fn graph_text_round_trips(g in arb_graph()) {
            let text = write_graph(&g);
            let back = parse_graph(&text).unwrap();
            prop_assert_eq!(&back, &g);
            prop_assert_eq!(write_graph(&back), text);
        }
    }
}
