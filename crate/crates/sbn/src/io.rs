//! Text formats for networks, evidence, and bitmap datasets, plus seeded
//! generation of random layered networks.
//!
//! Parsers reject malformed input rather than repairing it. Emission is
//! canonical: biases in ascending node order, edges sorted by
//! (child, parent), floats printed as the shortest decimal that reparses to
//! the same bits, `\n` line endings. `emit(parse(t)) == t` for canonical
//! text.

use crate::error::{Error, Result};
use crate::network::{Evidence, SigmoidBeliefNetwork};
use crate::rng::Rng64;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_f64(tok: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_err(line, format!("bad {what} `{tok}`")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite {what} `{tok}`")));
    }
    Ok(v)
}

fn parse_usize(tok: &str, line: usize, what: &str) -> Result<usize> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("bad {what} `{tok}`")))
}

/// Serializes a network:
///
/// ```text
/// SBN 1
/// N <n_nodes>
/// H <i> <bias>          (one per node, ascending i)
/// J <i> <j> <weight>    (j < i, sorted by (i, j))
/// ```
pub fn emit_network(net: &SigmoidBeliefNetwork) -> String {
    let mut out = String::new();
    out.push_str("SBN 1\n");
    out.push_str(&format!("N {}\n", net.n_nodes()));
    for i in 0..net.n_nodes() {
        out.push_str(&format!("H {} {}\n", i, net.bias(i)));
    }
    for e in net.edges() {
        out.push_str(&format!("J {} {} {}\n", e.child, e.parent, e.weight));
    }
    out
}

/// Parses the network format emitted by [`emit_network`]. Rejects edges with
/// parent >= child, duplicate or unsorted edges, missing or out-of-order
/// bias lines, and non-finite numbers.
pub fn parse_network(text: &str) -> Result<SigmoidBeliefNetwork> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l));
    let (ln, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    if header.trim_end() != "SBN 1" {
        return Err(parse_err(ln, "expected header `SBN 1`"));
    }
    let (ln, count_line) = lines
        .next()
        .ok_or_else(|| parse_err(2, "missing `N <n_nodes>` line"))?;
    let toks: Vec<&str> = count_line.split_whitespace().collect();
    if toks.len() != 2 || toks[0] != "N" {
        return Err(parse_err(ln, "expected `N <n_nodes>`"));
    }
    let n = parse_usize(toks[1], ln, "node count")?;

    let mut biases = Vec::with_capacity(n);
    for expect in 0..n {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| parse_err(2 + expect, format!("missing bias line for node {expect}")))?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 || toks[0] != "H" {
            return Err(parse_err(ln, "expected `H <i> <bias>`"));
        }
        let i = parse_usize(toks[1], ln, "node index")?;
        if i != expect {
            return Err(parse_err(
                ln,
                format!(
                    "bias lines must cover nodes in ascending order; expected {expect}, got {i}"
                ),
            ));
        }
        biases.push(parse_f64(toks[2], ln, "bias")?);
    }

    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut prev: Option<(usize, usize)> = None;
    for (ln, line) in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            return Err(parse_err(ln, "blank line"));
        }
        if toks.len() != 4 || toks[0] != "J" {
            return Err(parse_err(ln, "expected `J <i> <j> <weight>`"));
        }
        let child = parse_usize(toks[1], ln, "child index")?;
        let parent = parse_usize(toks[2], ln, "parent index")?;
        if child >= n {
            return Err(parse_err(ln, format!("child index {child} out of range")));
        }
        if parent >= child {
            return Err(parse_err(
                ln,
                format!("edge ({child}, {parent}) must have parent < child"),
            ));
        }
        if let Some(p) = prev {
            if (child, parent) <= p {
                return Err(parse_err(
                    ln,
                    format!("edge ({child}, {parent}) out of (child, parent) order"),
                ));
            }
        }
        prev = Some((child, parent));
        edges.push((child, parent, parse_f64(toks[3], ln, "weight")?));
    }
    SigmoidBeliefNetwork::new(biases, &edges)
}

/// Serializes evidence as one `<node-index> <0|1>` line per clamped node,
/// ascending node order.
pub fn emit_evidence(evidence: &Evidence) -> String {
    let mut out = String::new();
    for (i, b) in evidence.iter() {
        out.push_str(&format!("{i} {b}\n"));
    }
    out
}

/// Parses evidence lines `<node-index> <0|1>`; duplicate indices are
/// rejected.
pub fn parse_evidence(text: &str) -> Result<Evidence> {
    let mut pairs = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let ln = k + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            return Err(parse_err(ln, "blank line"));
        }
        if toks.len() != 2 {
            return Err(parse_err(ln, "expected `<node-index> <0|1>`"));
        }
        let i = parse_usize(toks[0], ln, "node index")?;
        let b = match toks[1] {
            "0" => 0u8,
            "1" => 1u8,
            other => return Err(parse_err(ln, format!("bad bit `{other}`"))),
        };
        pairs.push((i, b));
    }
    Evidence::from_pairs(pairs)
}

/// Fixed-size binary patterns laid out row-major over a rows x cols grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitmapDataset {
    rows: usize,
    cols: usize,
    patterns: Vec<Vec<u8>>,
}

impl BitmapDataset {
    pub fn new(rows: usize, cols: usize, patterns: Vec<Vec<u8>>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::ZeroCount("bitmap dimensions"));
        }
        for p in &patterns {
            if p.len() != rows * cols {
                return Err(Error::Dimension(format!(
                    "pattern length {} does not match {rows}x{cols}",
                    p.len()
                )));
            }
            if p.iter().any(|&b| b > 1) {
                return Err(Error::InvalidProbability {
                    value: 2.0,
                    bounds: "{0, 1} (pattern bit)",
                });
            }
        }
        Ok(Self {
            rows,
            cols,
            patterns,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Bits per pattern (rows * cols).
    pub fn width(&self) -> usize {
        self.rows * self.cols
    }

    pub fn n_patterns(&self) -> usize {
        self.patterns.len()
    }

    pub fn pattern(&self, k: usize) -> &[u8] {
        &self.patterns[k]
    }

    pub fn patterns(&self) -> impl Iterator<Item = &[u8]> + '_ {
        self.patterns.iter().map(|p| p.as_slice())
    }
}

/// Serializes a dataset:
///
/// ```text
/// BITMAP 1
/// <rows> <cols> <count>
/// <count lines of rows*cols characters in {0,1}>
/// ```
pub fn emit_dataset(ds: &BitmapDataset) -> String {
    let mut out = String::new();
    out.push_str("BITMAP 1\n");
    out.push_str(&format!(
        "{} {} {}\n",
        ds.rows(),
        ds.cols(),
        ds.n_patterns()
    ));
    for p in ds.patterns() {
        for &b in p {
            out.push(if b == 1 { '1' } else { '0' });
        }
        out.push('\n');
    }
    out
}

/// Parses the dataset format emitted by [`emit_dataset`]. The declared count
/// must match the number of pattern lines exactly.
pub fn parse_dataset(text: &str) -> Result<BitmapDataset> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l));
    let (ln, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    if header.trim_end() != "BITMAP 1" {
        return Err(parse_err(ln, "expected header `BITMAP 1`"));
    }
    let (ln, dims) = lines
        .next()
        .ok_or_else(|| parse_err(2, "missing `<rows> <cols> <count>` line"))?;
    let toks: Vec<&str> = dims.split_whitespace().collect();
    if toks.len() != 3 {
        return Err(parse_err(ln, "expected `<rows> <cols> <count>`"));
    }
    let rows = parse_usize(toks[0], ln, "rows")?;
    let cols = parse_usize(toks[1], ln, "cols")?;
    let count = parse_usize(toks[2], ln, "count")?;
    if rows == 0 || cols == 0 {
        return Err(parse_err(ln, "bitmap dimensions must be positive"));
    }
    let mut patterns = Vec::with_capacity(count);
    for _ in 0..count {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| parse_err(0, format!("expected {count} patterns, file ended early")))?;
        let line = line.trim_end();
        if line.len() != rows * cols {
            return Err(parse_err(
                ln,
                format!(
                    "pattern has {} characters, expected {}",
                    line.len(),
                    rows * cols
                ),
            ));
        }
        let mut bits = Vec::with_capacity(rows * cols);
        for ch in line.chars() {
            match ch {
                '0' => bits.push(0u8),
                '1' => bits.push(1u8),
                other => return Err(parse_err(ln, format!("bad character `{other}`"))),
            }
        }
        patterns.push(bits);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(ln, "trailing content after declared patterns"));
    }
    BitmapDataset::new(rows, cols, patterns)
}

/// Generates a layered network with full bipartite connectivity between
/// adjacent layers and top-down edges. Node indices are assigned top layer
/// first; every bias and weight is drawn i.i.d. uniform on [lo, hi].
///
/// Draw order is fixed: all biases in node order, then all weights in
/// (child, parent) order, so a seed pins the network exactly.
pub fn gen_random_layered(
    layer_sizes: &[usize],
    weight_range: (f64, f64),
    seed: u64,
) -> Result<SigmoidBeliefNetwork> {
    if layer_sizes.is_empty() || layer_sizes.contains(&0) {
        return Err(Error::BadLayers);
    }
    let (lo, hi) = weight_range;
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::BadWeightRange { lo, hi });
    }
    let n: usize = layer_sizes.iter().sum();
    let mut rng = Rng64::new(seed);
    let biases: Vec<f64> = (0..n).map(|_| rng.next_range(lo, hi)).collect();

    let mut offsets = Vec::with_capacity(layer_sizes.len() + 1);
    offsets.push(0usize);
    for &s in layer_sizes {
        offsets.push(offsets.last().unwrap() + s);
    }
    let mut edges = Vec::new();
    for l in 1..layer_sizes.len() {
        let (upper, lower) = (offsets[l - 1]..offsets[l], offsets[l]..offsets[l + 1]);
        for child in lower {
            for parent in upper.clone() {
                edges.push((child, parent, rng.next_range(lo, hi)));
            }
        }
    }
    SigmoidBeliefNetwork::new(biases, &edges)
}
