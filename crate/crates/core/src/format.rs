//! Text formats.
//!
//! Graph samples are line oriented:
//!
//! ```text
//! graphsample v=4 n=3 base=0
//! # comments start with '#'
//! 0 0 1
//! 0 2 3
//! 2 1 2
//! ```
//!
//! After the header, each line `k i j` records edge `{i, j}` in graph `k`
//! (`0 <= k < n`). Vertex labels start at `base` (0 or 1); graph indices are
//! always 0-based. Graphs without edges have no lines.
//!
//! Time series are CSV with channel labels in the first row and one time
//! sample per following row. Edge tables (`i,j,count,frequency`) carry
//! per-pair frequencies, and double as null marginals when read back.

use std::io::{BufRead, Read, Write};

use crate::error::{Error, Result};
use crate::graph::{pair_count, EdgeMarginals, Graph, GraphSample, VertexPair};
use crate::timeseries::{ChannelMatrix, EdgeFrequency};

const MAGIC: &str = "graphsample";

/// Vertex numbering used in a file.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Base {
    #[default]
    Zero,
    One,
}

impl Base {
    pub fn offset(self) -> usize {
        match self {
            Base::Zero => 0,
            Base::One => 1,
        }
    }

    pub fn from_offset(offset: usize) -> Option<Self> {
        match offset {
            0 => Some(Base::Zero),
            1 => Some(Base::One),
            _ => None,
        }
    }
}

/// Writes `sample`, with `comments` (without the leading `#`) after the header.
pub fn write_graph_sample<W: Write>(
    mut out: W,
    sample: &GraphSample,
    base: Base,
    comments: &[String],
) -> Result<()> {
    writeln!(
        out,
        "{MAGIC} v={} n={} base={}",
        sample.vertex_count(),
        sample.len(),
        base.offset()
    )?;
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    let b = base.offset();
    for (k, g) in sample.iter().enumerate() {
        for p in g.edges() {
            writeln!(out, "{k} {} {}", p.i() + b, p.j() + b)?;
        }
    }
    out.flush()?;
    Ok(())
}

struct Header {
    v: usize,
    n: usize,
    base: Base,
}

fn parse_header(line: &str, lineno: usize) -> Result<Header> {
    let mut tokens = line.split_whitespace();
    if tokens.next() != Some(MAGIC) {
        return Err(Error::parse(lineno, format!("expected '{MAGIC}' header")));
    }
    let (mut v, mut n, mut base) = (None, None, Base::Zero);
    for tok in tokens {
        let (key, value) = tok
            .split_once('=')
            .ok_or_else(|| Error::parse(lineno, format!("malformed header field '{tok}'")))?;
        let num: usize = value
            .parse()
            .map_err(|_| Error::parse(lineno, format!("'{value}' is not a nonnegative integer")))?;
        match key {
            "v" => v = Some(num),
            "n" => n = Some(num),
            "base" => {
                base = Base::from_offset(num)
                    .ok_or_else(|| Error::parse(lineno, "base must be 0 or 1"))?
            }
            other => return Err(Error::parse(lineno, format!("unknown header field '{other}'"))),
        }
    }
    let v = v.ok_or_else(|| Error::parse(lineno, "header is missing v="))?;
    let n = n.ok_or_else(|| Error::parse(lineno, "header is missing n="))?;
    if v < 2 {
        return Err(Error::parse(lineno, "v must be at least 2"));
    }
    if n == 0 {
        return Err(Error::parse(lineno, "n must be at least 1"));
    }
    Ok(Header { v, n, base })
}

/// Reads a graph sample; errors carry 1-based line numbers.
pub fn read_graph_sample<R: BufRead>(input: R) -> Result<GraphSample> {
    let mut header: Option<Header> = None;
    let mut graphs: Vec<Graph> = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let Some(h) = &header else {
            let h = parse_header(text, lineno)?;
            graphs = vec![Graph::empty(h.v); h.n];
            header = Some(h);
            continue;
        };
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::parse(lineno, "expected '<graph> <i> <j>'"));
        }
        let mut nums = [0usize; 3];
        for (slot, f) in nums.iter_mut().zip(&fields) {
            *slot = f
                .parse()
                .map_err(|_| Error::parse(lineno, format!("'{f}' is not a nonnegative integer")))?;
        }
        let [k, a, b] = nums;
        if k >= h.n {
            return Err(Error::parse(lineno, format!("graph index {k} outside 0..{}", h.n)));
        }
        let off = h.base.offset();
        if a < off || b < off {
            return Err(Error::parse(lineno, format!("vertex below base {off}")));
        }
        let pair = VertexPair::checked(a - off, b - off, h.v)
            .map_err(|_| Error::parse(lineno, format!("invalid pair ({a}, {b}) for v = {}", h.v)))?;
        if graphs[k].contains(pair) {
            return Err(Error::parse(lineno, format!("duplicate edge ({a}, {b}) in graph {k}")));
        }
        graphs[k].insert(pair);
    }
    if header.is_none() {
        return Err(Error::parse(1, "missing graphsample header"));
    }
    GraphSample::new(graphs)
}

/// Reads a time-series CSV: labels, then one row per time sample. Lines
/// starting with `#` are skipped.
pub fn read_channel_csv<R: Read>(input: R, sampling_rate: f64) -> Result<ChannelMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let labels: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(e, 1))?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(e, rows.len() + 2))?;
        let line = record.position().map_or(rows.len() + 2, |p| p.line() as usize);
        if record.len() != labels.len() {
            return Err(Error::parse(
                line,
                format!("expected {} values, found {}", labels.len(), record.len()),
            ));
        }
        let row = record
            .iter()
            .map(|f| match f.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(Error::parse(line, format!("'{f}' is not a finite number"))),
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::parse(1, "time series has no samples"));
    }
    ChannelMatrix::from_rows(labels, &rows, sampling_rate)
}

fn csv_error(err: csv::Error, fallback_line: usize) -> Error {
    let line = err
        .position()
        .map_or(fallback_line, |p| p.line() as usize);
    Error::parse(line, err.to_string())
}

/// Writes `i,j,count,frequency` rows.
pub fn write_edge_table<W: Write>(out: W, edges: &[EdgeFrequency], base: Base) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["i", "j", "count", "frequency"])
        .map_err(|e| csv_error(e, 0))?;
    let b = base.offset();
    for e in edges {
        w.write_record([
            (e.pair.i() + b).to_string(),
            (e.pair.j() + b).to_string(),
            e.count.to_string(),
            e.frequency.to_string(),
        ])
        .map_err(|e| csv_error(e, 0))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads per-pair probabilities from a CSV with columns `i`, `j` and
/// `frequency` (or `probability`), skipping `#` lines. Pairs not listed get
/// probability 0.
pub fn read_marginals<R: Read>(input: R, v: usize, base: Base) -> Result<EdgeMarginals> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader.headers().map_err(|e| csv_error(e, 1))?.clone();
    let col = |names: &[&str]| headers.iter().position(|h| names.contains(&h));
    let (ci, cj, cp) = match (col(&["i"]), col(&["j"]), col(&["frequency", "probability"])) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(Error::parse(1, "expected columns i, j and frequency")),
    };
    let mut values = vec![0.0; pair_count(v)];
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(e, 0))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |c: usize| record.get(c).unwrap_or("");
        let vertex = |c: usize| -> Result<usize> {
            field(c)
                .parse::<usize>()
                .ok()
                .and_then(|x| x.checked_sub(base.offset()))
                .ok_or_else(|| Error::parse(line, format!("bad vertex '{}'", field(c))))
        };
        let pair = VertexPair::checked(vertex(ci)?, vertex(cj)?, v)
            .map_err(|e| Error::parse(line, e.to_string()))?;
        let p: f64 = field(cp)
            .parse()
            .map_err(|_| Error::parse(line, format!("bad probability '{}'", field(cp))))?;
        values[pair.index(v)] = p;
    }
    EdgeMarginals::new(v, values)
}
