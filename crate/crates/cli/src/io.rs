//! Text formats: edge-list TSV, `label,value` CSV and JSON basis files.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use dgft::{DiGraph, Error, OrthonormalBasis};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Malformed or unreadable input that is not a core parse error.
#[derive(Debug)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| InputError(format!("cannot read {}: {e}", path.display())).into())
}

/// Edges of an edge-list file with vertices numbered by first appearance.
#[derive(Debug, Clone)]
pub struct EdgeList {
    pub labels: Vec<String>,
    pub edges: Vec<(usize, usize, f64)>,
}

impl EdgeList {
    pub fn parse(text: &str) -> std::result::Result<Self, Error> {
        let mut rdr = csv::ReaderBuilder::new()
            .delimiter(b'\t')
            .has_headers(false)
            .comment(Some(b'#'))
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut labels = Vec::new();
        let mut edges = Vec::new();
        let mut id = |name: &str, labels: &mut Vec<String>| {
            *index.entry(name.to_string()).or_insert_with(|| {
                labels.push(name.to_string());
                labels.len() - 1
            })
        };
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Parse { line: csv_line(&e), msg: e.to_string() })?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            if rec.iter().all(|f| f.trim().is_empty()) {
                continue;
            }
            if rec.len() != 3 {
                return Err(Error::Parse { line, msg: format!("expected src<TAB>dst<TAB>weight, got {} fields", rec.len()) });
            }
            let (s, d) = (rec[0].trim(), rec[1].trim());
            if s.is_empty() || d.is_empty() {
                return Err(Error::Parse { line, msg: "empty vertex label".into() });
            }
            let w: f64 = rec[2]
                .trim()
                .parse()
                .map_err(|_| Error::Parse { line, msg: format!("invalid weight `{}`", &rec[2]) })?;
            let (s, d) = (id(s, &mut labels), id(d, &mut labels));
            edges.push((s, d, w));
        }
        Ok(Self { labels, edges })
    }

    pub fn into_digraph(self) -> std::result::Result<DiGraph, Error> {
        DiGraph::new(self.labels.len(), self.edges)?.with_labels(self.labels)
    }
}

fn csv_line(e: &csv::Error) -> usize {
    e.position().map_or(0, |p| p.line() as usize)
}

pub fn read_edge_list(path: &Path) -> Result<EdgeList> {
    Ok(EdgeList::parse(&read(path)?)?)
}

pub fn read_graph(path: &Path) -> Result<DiGraph> {
    Ok(read_edge_list(path)?.into_digraph()?)
}

/// Edge list of `g`, optionally preceded by `#` comment lines.
pub fn format_edge_list(g: &DiGraph, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        out.push_str(&format!("# {c}\n"));
    }
    for e in g.edges() {
        out.push_str(&format!("{}\t{}\t{}\n", g.label(e.src), g.label(e.dst), e.weight));
    }
    out
}

/// `label,value` rows, with an optional `label,value` header.
pub fn parse_labeled_values(text: &str) -> std::result::Result<Vec<(String, f64)>, Error> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse { line: csv_line(&e), msg: e.to_string() })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        if rec.len() != 2 {
            return Err(Error::Parse { line, msg: format!("expected label,value, got {} fields", rec.len()) });
        }
        match rec[1].parse::<f64>() {
            Ok(v) => out.push((rec[0].to_string(), v)),
            Err(_) if i == 0 => continue, // header
            Err(_) => return Err(Error::Parse { line, msg: format!("invalid value `{}`", &rec[1]) }),
        }
    }
    Ok(out)
}

/// Values from `path` placed at the positions of `labels`. Unknown and
/// repeated labels are errors; missing labels come back as `None`.
pub fn read_labeled_values(path: &Path, labels: &[String]) -> Result<Vec<Option<f64>>> {
    let rows = parse_labeled_values(&read(path)?)?;
    let pos: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let mut out = vec![None; labels.len()];
    for (label, v) in rows {
        let i = *pos
            .get(label.as_str())
            .ok_or_else(|| InputError(format!("{}: unknown vertex `{label}`", path.display())))?;
        if out[i].replace(v).is_some() {
            return Err(InputError(format!("{}: vertex `{label}` listed twice", path.display())).into());
        }
    }
    Ok(out)
}

pub const BASIS_SCHEMA_VERSION: u32 = 1;

/// On-disk basis: columns in ascending frequency order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisFile {
    pub schema_version: u32,
    pub producer: String,
    pub n: usize,
    pub method_tag: String,
    pub config: serde_json::Value,
    pub labels: Option<Vec<String>>,
    /// Ascending; `frequencies[k]` belongs to `columns[k]`.
    pub frequencies: Vec<f64>,
    /// Dispersion in the order the method produced its columns.
    pub dispersion_raw: f64,
    /// Dispersion of the sorted frequencies divided by their maximum.
    pub dispersion_rescaled: f64,
    pub columns: Vec<Vec<f64>>,
}

impl BasisFile {
    pub fn from_basis(g: &DiGraph, basis: &OrthonormalBasis, config: serde_json::Value) -> Result<Self> {
        let profile = basis.profile(g)?;
        let sorted = basis.clone().with_frequencies(g)?.sorted_by_frequency();
        Ok(Self {
            schema_version: BASIS_SCHEMA_VERSION,
            producer: format!("dgft {}", env!("CARGO_PKG_VERSION")),
            n: basis.n(),
            method_tag: basis.method_tag().to_string(),
            config,
            labels: g.labels().map(<[String]>::to_vec),
            frequencies: sorted.freqs().expect("cached above").to_vec(),
            dispersion_raw: profile.dispersion_raw,
            dispersion_rescaled: profile.dispersion_rescaled,
            columns: (0..sorted.n()).map(|k| sorted.column(k)).collect(),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).with_context(|| format!("cannot write {}", path.display()))
    }

    /// Parses and validates shape and orthonormality.
    pub fn read(path: &Path) -> Result<Self> {
        let text = read(path)?;
        let file: BasisFile = serde_json::from_str(&text)
            .map_err(|e| InputError(format!("{}: invalid basis file: {e}", path.display())))?;
        if file.schema_version != BASIS_SCHEMA_VERSION {
            return Err(InputError(format!("{}: unsupported schema version {}", path.display(), file.schema_version)).into());
        }
        if file.columns.len() != file.n || file.columns.iter().any(|c| c.len() != file.n) || file.frequencies.len() != file.n {
            return Err(InputError(format!("{}: basis is not {}x{}", path.display(), file.n, file.n)).into());
        }
        file.basis().map_err(|e| InputError(format!("{}: {e}", path.display())))?;
        Ok(file)
    }

    /// The embedded basis, with the stored frequencies attached.
    pub fn basis(&self) -> std::result::Result<OrthonormalBasis, Error> {
        let m = DMatrix::from_fn(self.n, self.n, |i, j| self.columns[j][i]);
        OrthonormalBasis::new(m, self.method_tag.clone())
    }
}
