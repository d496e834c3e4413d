//! Directed input graphs with a designated sink, plus the line-oriented
//! text format used to store them.
//!
//! ```text
//! dmdst 1
//! <n> <m> <sink>
//! <u> <v>        # m lines, directed edge u -> v, 0-based
//! ```
//!
//! Lines starting with `#` are comments. Trailing whitespace is ignored.

use std::collections::VecDeque;
use std::fmt;
use std::io::Read;

use thiserror::Error;

/// Magic first line of the graph file format.
pub const MAGIC: &str = "dmdst 1";

/// Source line of a parse error, if the graph came from text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Line(pub Option<usize>);

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(l) => write!(f, " (line {l})"),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("missing or unsupported magic line, expected `{MAGIC}`{0}")]
    BadMagic(Line),
    #[error("malformed header{line}: {reason}")]
    MalformedHeader { line: Line, reason: String },
    #[error("malformed edge line{0}")]
    MalformedEdge(Line),
    #[error("header declares {expected} edges but {found} were given")]
    EdgeCountMismatch { expected: usize, found: usize },
    #[error("graph must have at least one vertex")]
    Empty,
    #[error("sink {sink} out of range for {n} vertices")]
    SinkOutOfRange { sink: usize, n: usize },
    #[error("vertex {v} out of range for {n} vertices{line}")]
    VertexOutOfRange { v: usize, n: usize, line: Line },
    #[error("self-loop on vertex {v}{line}")]
    SelfLoop { v: usize, line: Line },
    #[error("duplicate edge {u} -> {v}{line}")]
    DuplicateEdge { u: usize, v: usize, line: Line },
    #[error("sink is unreachable from vertex {0}")]
    SinkUnreachableFrom(usize),
    #[error("i/o error: {0}")]
    Io(String),
}

/// A directed graph on vertices `0..n` in which every vertex can reach `sink`.
///
/// An edge `u -> v` means `u` may choose `v` as its parent in a spanning
/// in-tree. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    sink: usize,
    out: Vec<Vec<usize>>,
    // reversed adjacency, each list sorted ascending
    inc: Vec<Vec<usize>>,
    m: usize,
}

impl Digraph {
    /// Builds and validates a graph. Out-edge order follows `edges` order.
    pub fn new<I>(n: usize, sink: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::build(n, sink, edges.into_iter().map(|(u, v)| (u, v, None)))
    }

    fn build<I>(n: usize, sink: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize, Option<usize>)>,
    {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        if sink >= n {
            return Err(GraphError::SinkOutOfRange { sink, n });
        }
        let mut out = vec![Vec::new(); n];
        let mut m = 0;
        for (u, v, line) in edges {
            let line = Line(line);
            for x in [u, v] {
                if x >= n {
                    return Err(GraphError::VertexOutOfRange { v: x, n, line });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop { v, line });
            }
            if out[u].contains(&v) {
                return Err(GraphError::DuplicateEdge { u, v, line });
            }
            out[u].push(v);
            m += 1;
        }
        let mut inc = vec![Vec::new(); n];
        for (u, heads) in out.iter().enumerate() {
            for &v in heads {
                inc[v].push(u);
            }
        }
        let g = Digraph { sink, out, inc, m };
        if let Some(&v) = g.unreachable_from_sink().first() {
            return Err(GraphError::SinkUnreachableFrom(v));
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.out.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    /// Heads of the out-edges of `u`, in insertion order.
    pub fn out_edges(&self, u: usize) -> &[usize] {
        &self.out[u]
    }

    /// Tails of the in-edges of `v`, ascending.
    pub fn in_edges(&self, v: usize) -> &[usize] {
        &self.inc[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.out.get(u).is_some_and(|heads| heads.contains(&v))
    }

    /// All edges, grouped by tail in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(u, heads)| heads.iter().map(move |&v| (u, v)))
    }

    /// Vertices with no directed path to the sink, ascending.
    ///
    /// Always empty for a constructed `Digraph`; see [`unreachable_vertices`]
    /// for the check on raw edge lists.
    pub fn unreachable_from_sink(&self) -> Vec<usize> {
        backward_unreached(self.sink, &self.inc)
    }
}

/// Vertices of the raw edge list `edges` on `0..n` that cannot reach `sink`.
///
/// Edges with out-of-range endpoints are ignored.
pub fn unreachable_vertices(n: usize, sink: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut inc = vec![Vec::new(); n];
    for &(u, v) in edges {
        if u < n && v < n {
            inc[v].push(u);
        }
    }
    if sink >= n {
        return (0..n).collect();
    }
    backward_unreached(sink, &inc)
}

fn backward_unreached(sink: usize, inc: &[Vec<usize>]) -> Vec<usize> {
    let mut seen = vec![false; inc.len()];
    let mut queue = VecDeque::from([sink]);
    seen[sink] = true;
    while let Some(v) = queue.pop_front() {
        for &u in &inc[v] {
            if !seen[u] {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    (0..inc.len()).filter(|&v| !seen[v]).collect()
}

/// Parses the text graph format.
pub fn parse_graph(text: &str) -> Result<Digraph, GraphError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    match lines.next() {
        Some((_, l)) if l == MAGIC => {}
        Some((no, _)) => return Err(GraphError::BadMagic(Line(Some(no)))),
        None => return Err(GraphError::BadMagic(Line(None))),
    }

    let (hline, header) = lines.next().ok_or_else(|| GraphError::MalformedHeader {
        line: Line(None),
        reason: "missing `<n> <m> <sink>` line".into(),
    })?;
    let fields = parse_ints(header).ok_or_else(|| GraphError::MalformedHeader {
        line: Line(Some(hline)),
        reason: "expected three non-negative integers".into(),
    })?;
    let [n, m, sink] = fields[..] else {
        return Err(GraphError::MalformedHeader {
            line: Line(Some(hline)),
            reason: format!("expected 3 fields, found {}", fields.len()),
        });
    };

    let mut edges = Vec::with_capacity(m);
    for (no, l) in lines {
        match parse_ints(l).as_deref() {
            Some(&[u, v]) => edges.push((u, v, Some(no))),
            _ => return Err(GraphError::MalformedEdge(Line(Some(no)))),
        }
    }
    if edges.len() != m {
        return Err(GraphError::EdgeCountMismatch {
            expected: m,
            found: edges.len(),
        });
    }
    Digraph::build(n, sink, edges)
}

/// Reads and parses a graph from any byte source.
pub fn read_graph<R: Read>(mut reader: R) -> Result<Digraph, GraphError> {
    let mut text = String::new();
    reader
        .read_to_string(&mut text)
        .map_err(|e| GraphError::Io(e.to_string()))?;
    parse_graph(&text)
}

fn parse_ints(line: &str) -> Option<Vec<usize>> {
    line.split_whitespace().map(|t| t.parse().ok()).collect()
}

/// Serializes in canonical form: edges grouped by tail, ascending, each
/// group in out-edge order.
pub fn serialize_graph(g: &Digraph) -> String {
    let mut s = format!("{MAGIC}\n{} {} {}\n", g.n(), g.m(), g.sink());
    for (u, v) in g.edges() {
        s.push_str(&format!("{u} {v}\n"));
    }
    s
}
