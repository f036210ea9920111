//! Ingestion of bootstrapped graphs into an incidence matrix.
//!
//! Every graph is reduced to its undirected skeleton and encoded as one row
//! of a binary `m x k` matrix, where column `i` tracks the presence of the
//! `i`-th potential edge. Potential edges are enumerated lexicographically
//! over node positions: `(0,1), (0,2), ..., (0,v-1), (1,2), ...`.
//!
//! The text format is line oriented:
//!
//! ```text
//! nodes A B C      # header, declares the node order
//! graph            # starts a graph block
//! A B              # one edge (or arc, with `directed`)
//! graph            # an empty block is the empty graph
//! ```

use std::collections::{BTreeSet, HashMap};
use std::fmt::{self, Debug, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered set of node labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSet {
    labels: Vec<String>,
    positions: HashMap<String, usize>,
}

impl NodeSet {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut out = NodeSet {
            labels: Vec::new(),
            positions: HashMap::new(),
        };
        for label in labels {
            let label = label.into();
            if out.positions.contains_key(&label) {
                return Err(Error::DuplicateNode(label));
            }
            out.positions.insert(label.clone(), out.labels.len());
            out.labels.push(label);
        }
        if out.labels.len() < 2 {
            return Err(Error::TooFewNodes(out.labels.len()));
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.positions.get(label).copied()
    }

    /// Number of potential undirected edges, `v(v-1)/2`.
    pub fn edge_count(&self) -> usize {
        let v = self.len();
        v * (v - 1) / 2
    }

    /// Inverse of the linear edge index.
    pub fn pair(&self, linear: usize) -> Option<EdgeIndex> {
        let v = self.len();
        let mut offset = 0;
        for a in 0..v.saturating_sub(1) {
            let row = v - a - 1;
            if linear < offset + row {
                let b = a + 1 + (linear - offset);
                return Some(EdgeIndex { a, b, linear });
            }
            offset += row;
        }
        None
    }

    /// Labels of both endpoints of edge `linear`.
    pub fn edge_labels(&self, linear: usize) -> Option<(&str, &str)> {
        self.pair(linear)
            .map(|e| (self.labels[e.a].as_str(), self.labels[e.b].as_str()))
    }

    fn linear(&self, a: usize, b: usize) -> usize {
        debug_assert!(a < b && b < self.len());
        a * self.len() - a * (a + 1) / 2 + (b - a - 1)
    }
}

/// Position of an undirected edge: endpoints `a < b` and its column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeIndex {
    pub a: usize,
    pub b: usize,
    pub linear: usize,
}

/// Column index of the undirected edge `{first, second}`.
pub fn edge_index(first: &str, second: &str, nodes: &NodeSet) -> Result<EdgeIndex> {
    let p = nodes
        .position(first)
        .ok_or_else(|| Error::UnknownNode(first.to_string()))?;
    let q = nodes
        .position(second)
        .ok_or_else(|| Error::UnknownNode(second.to_string()))?;
    if p == q {
        return Err(Error::SelfLoop(first.to_string()));
    }
    let (a, b) = if p < q { (p, q) } else { (q, p) };
    Ok(EdgeIndex {
        a,
        b,
        linear: nodes.linear(a, b),
    })
}

/// Forget arc directions. Unordered pairs are returned as `(min, max)`.
pub fn biorient<T>(arcs: &[(T, T)]) -> Result<BTreeSet<(T, T)>>
where
    T: Ord + Clone + Debug,
{
    let mut out = BTreeSet::new();
    for (from, to) in arcs {
        match from.cmp(to) {
            std::cmp::Ordering::Equal => return Err(Error::SelfLoop(format!("{from:?}"))),
            std::cmp::Ordering::Less => out.insert((from.clone(), to.clone())),
            std::cmp::Ordering::Greater => out.insert((to.clone(), from.clone())),
        };
    }
    Ok(out)
}

/// Dense binary `m x k` matrix, one row per observed structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Incidence {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl Incidence {
    /// Builds from explicit rows. All rows must share the same length and
    /// contain only 0/1.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::EmptySampleSet);
        }
        let k = rows[0].as_ref().len();
        if k == 0 {
            return Err(Error::domain("incidence rows must have at least one column"));
        }
        let mut data = Vec::with_capacity(m * k);
        for row in rows {
            let row = row.as_ref();
            if row.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    found: row.len(),
                });
            }
            if let Some(bad) = row.iter().find(|&&x| x > 1) {
                return Err(Error::domain(format!("incidence entries must be 0 or 1, got {bad}")));
            }
            data.extend_from_slice(row);
        }
        Ok(Incidence {
            rows: m,
            cols: k,
            data,
        })
    }

    /// Parses rows written as bit strings, e.g. `["110", "101"]`.
    pub fn from_bit_strings(rows: &[&str]) -> Result<Self> {
        let parsed: Vec<Vec<u8>> = rows
            .iter()
            .map(|r| {
                r.chars()
                    .map(|c| match c {
                        '0' => Ok(0),
                        '1' => Ok(1),
                        other => Err(Error::domain(format!("bad bit `{other}`"))),
                    })
                    .collect::<Result<Vec<u8>>>()
            })
            .collect::<Result<_>>()?;
        Incidence::from_rows(&parsed)
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<u8>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Incidence { rows, cols, data }
    }

    /// Sample count `m`.
    pub fn samples(&self) -> usize {
        self.rows
    }

    /// Dimension `k`.
    pub fn dim(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u8]> {
        self.data.chunks_exact(self.cols)
    }

    /// Keeps only the given columns, in the given order.
    pub fn select_columns(&self, idx: &[usize]) -> Result<Incidence> {
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.cols) {
            return Err(Error::InvalidIndex(format!(
                "column {bad} out of range for dimension {}",
                self.cols
            )));
        }
        let data = self
            .rows()
            .flat_map(|row| idx.iter().map(move |&i| row[i]))
            .collect();
        Ok(Incidence::from_raw(self.rows, idx.len(), data))
    }
}

/// Bootstrapped graphs over a common node set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSet {
    nodes: NodeSet,
    incidence: Incidence,
}

impl SampleSet {
    /// Builds a sample set from per-graph edge lists.
    pub fn from_edge_lists<'a, G, E>(nodes: NodeSet, graphs: G) -> Result<Self>
    where
        G: IntoIterator<Item = E>,
        E: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let k = nodes.edge_count();
        let mut data = Vec::new();
        let mut m = 0;
        for graph in graphs {
            let mut row = vec![0u8; k];
            for (a, b) in graph {
                row[edge_index(a, b, &nodes)?.linear] = 1;
            }
            data.extend_from_slice(&row);
            m += 1;
        }
        if m == 0 {
            return Err(Error::EmptySampleSet);
        }
        Ok(SampleSet {
            incidence: Incidence::from_raw(m, k, data),
            nodes,
        })
    }

    pub fn nodes(&self) -> &NodeSet {
        &self.nodes
    }

    pub fn incidence(&self) -> &Incidence {
        &self.incidence
    }

    pub fn samples(&self) -> usize {
        self.incidence.samples()
    }

    pub fn dim(&self) -> usize {
        self.incidence.dim()
    }

    /// Writes the sample set back out in the text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("nodes");
        for label in self.nodes.labels() {
            out.push(' ');
            out.push_str(label);
        }
        out.push('\n');
        for row in self.incidence.rows() {
            out.push_str("graph\n");
            for (j, _) in row.iter().enumerate().filter(|(_, &x)| x == 1) {
                let (a, b) = self.nodes.edge_labels(j).expect("column within edge range");
                let _ = writeln!(out, "{a} {b}");
            }
        }
        out
    }
}

impl fmt::Display for SampleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parses the sample-set text format.
///
/// With `directed` set, edge lines are read as arcs; either way each block
/// is collapsed to its undirected skeleton and repeated edges are ignored.
pub fn parse_sample_set(text: &str, directed: bool) -> Result<SampleSet> {
    let mut nodes: Option<NodeSet> = None;
    let mut blocks: Vec<Vec<(usize, usize)>> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let Some(header) = &nodes else {
            if tokens[0] != "nodes" {
                return Err(parse_err(lineno, "expected `nodes` header"));
            }
            nodes = Some(NodeSet::new(tokens[1..].iter().copied()).map_err(|e| {
                parse_err(lineno, e.to_string())
            })?);
            continue;
        };
        if tokens == ["graph"] {
            blocks.push(Vec::new());
            continue;
        }
        if tokens.len() != 2 {
            return Err(parse_err(
                lineno,
                format!("expected `graph` or an edge `<label> <label>`, got `{line}`"),
            ));
        }
        let Some(block) = blocks.last_mut() else {
            return Err(parse_err(lineno, "edge line before the first `graph` block"));
        };
        let locate = |label: &str| {
            header
                .position(label)
                .ok_or_else(|| parse_err(lineno, format!("unknown node label `{label}`")))
        };
        let (from, to) = (locate(tokens[0])?, locate(tokens[1])?);
        if from == to {
            return Err(parse_err(lineno, format!("self-loop on node `{}`", tokens[0])));
        }
        // Undirected lines are stored canonically; arcs keep their direction
        // until biorientation.
        if directed {
            block.push((from, to));
        } else {
            block.push((from.min(to), from.max(to)));
        }
    }

    let nodes = nodes.ok_or(Error::EmptySampleSet)?;
    if blocks.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    let k = nodes.edge_count();
    let mut data = Vec::with_capacity(blocks.len() * k);
    for block in &blocks {
        let mut row = vec![0u8; k];
        for (a, b) in biorient(block)? {
            row[nodes.linear(a, b)] = 1;
        }
        data.extend_from_slice(&row);
    }
    Ok(SampleSet {
        incidence: Incidence::from_raw(blocks.len(), k, data),
        nodes,
    })
}
