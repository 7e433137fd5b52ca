//! CSV row types: the manifest, per-bin statistics, the merged sample and
//! the standalone sample files used by the single-step commands.

use std::io;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use kreglib_core::canon::canonical_form;
use kreglib_core::graph6;
use kreglib_core::library::{BinAssigner, SampleEntry, Source};
use kreglib_core::stats::SampleMoments;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

fn fixed6<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(&format_args!("{x:.6}"))
}

fn fixed6_opt<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(x) => fixed6(x, s),
        None => s.serialize_str(""),
    }
}

fn opt_f64<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
    let s = String::deserialize(d)?;
    if s.is_empty() {
        return Ok(None);
    }
    s.parse().map(Some).map_err(serde::de::Error::custom)
}

fn source_str<S: Serializer>(x: &Source, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(x.as_str())
}

fn parse_source<'de, D: Deserializer<'de>>(d: D) -> Result<Source, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(|_| serde::de::Error::custom(format!("unknown source {s:?}")))
}

pub fn canonical_id(entry: &SampleEntry) -> String {
    canonical_form(&entry.graph).graph6().expect("n within graph6 range")
}

/// One graph of the final library.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub n: usize,
    pub k: usize,
    pub bin_index: usize,
    #[serde(serialize_with = "fixed6")]
    pub chi: f64,
    #[serde(serialize_with = "fixed6")]
    pub mean_distance: f64,
    #[serde(serialize_with = "source_str", deserialize_with = "parse_source")]
    pub source: Source,
    pub seed: u64,
    pub canonical_id: String,
}

impl ManifestRow {
    pub fn new(entry: &SampleEntry, bin_index: usize) -> Self {
        Self {
            n: entry.graph.n(),
            k: entry.graph.k(),
            bin_index,
            chi: entry.chi,
            mean_distance: entry.mean_distance,
            source: entry.source,
            seed: entry.seed,
            canonical_id: canonical_id(entry),
        }
    }
}

/// One graph of the merged non-isomorphic sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergedRow {
    pub n: usize,
    pub bin_index: usize,
    #[serde(serialize_with = "fixed6")]
    pub chi: f64,
    #[serde(serialize_with = "fixed6")]
    pub mean_distance: f64,
    #[serde(serialize_with = "source_str", deserialize_with = "parse_source")]
    pub source: Source,
    pub seed: u64,
    pub canonical_id: String,
    /// 1 when the graph is part of the final library.
    pub selected: u8,
}

/// Per-bin counts and moments, before (`merged_*`) and after (`final_*`)
/// subsampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinRow {
    pub n: usize,
    pub k: usize,
    pub bin_index: usize,
    #[serde(serialize_with = "fixed6")]
    pub chi_low: f64,
    #[serde(serialize_with = "fixed6")]
    pub chi_high: f64,
    pub wm_raw: usize,
    pub wm_noniso: usize,
    pub cc_raw: usize,
    pub cc_noniso: usize,
    pub overlap: usize,
    pub merged: usize,
    #[serde(rename = "final")]
    pub final_size: usize,
    pub draws: usize,
    #[serde(serialize_with = "fixed6_opt", deserialize_with = "opt_f64")]
    pub merged_mean: Option<f64>,
    #[serde(serialize_with = "fixed6_opt", deserialize_with = "opt_f64")]
    pub merged_std: Option<f64>,
    #[serde(serialize_with = "fixed6_opt", deserialize_with = "opt_f64")]
    pub merged_skewness: Option<f64>,
    #[serde(serialize_with = "fixed6_opt", deserialize_with = "opt_f64")]
    pub merged_cvm_p: Option<f64>,
    #[serde(serialize_with = "fixed6_opt", deserialize_with = "opt_f64")]
    pub final_mean: Option<f64>,
    #[serde(serialize_with = "fixed6_opt", deserialize_with = "opt_f64")]
    pub final_std: Option<f64>,
    #[serde(serialize_with = "fixed6_opt", deserialize_with = "opt_f64")]
    pub final_skewness: Option<f64>,
    #[serde(serialize_with = "fixed6_opt", deserialize_with = "opt_f64")]
    pub final_cvm_p: Option<f64>,
}

pub(crate) fn moment_fields(m: Option<SampleMoments>) -> [Option<f64>; 4] {
    match m {
        Some(m) => [Some(m.mean), Some(m.std_dev), Some(m.skewness), m.cvm_p],
        None => [None; 4],
    }
}

/// Per-size summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeRow {
    pub n: usize,
    pub k: usize,
    pub method: String,
    pub bins: usize,
    pub occupied: usize,
    pub wm_raw: usize,
    pub cc_raw: usize,
    pub merged: usize,
    #[serde(rename = "final")]
    pub final_size: usize,
    pub overlap: usize,
    pub census_attempts: u64,
}

/// A graph together with its measurements, as exchanged between the
/// single-step commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub n: usize,
    pub k: usize,
    pub bin_index: usize,
    #[serde(serialize_with = "fixed6")]
    pub chi: f64,
    #[serde(serialize_with = "fixed6")]
    pub mean_distance: f64,
    #[serde(serialize_with = "source_str", deserialize_with = "parse_source")]
    pub source: Source,
    pub seed: u64,
    pub graph6: String,
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a header-only file when `rows` is empty.
pub fn write_csv_with_header<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    if !rows.is_empty() {
        return write_csv(path, rows);
    }
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(header)?;
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    r.deserialize().collect::<Result<_, _>>().with_context(|| format!("parsing {}", path.display()))
}

pub const MANIFEST_HEADER: &[&str] = &["n", "k", "bin_index", "chi", "mean_distance", "source", "seed", "canonical_id"];
pub const MERGED_HEADER: &[&str] =
    &["n", "bin_index", "chi", "mean_distance", "source", "seed", "canonical_id", "selected"];
pub const SAMPLE_HEADER: &[&str] = &["n", "k", "bin_index", "chi", "mean_distance", "source", "seed", "graph6"];

pub fn sample_row(entry: &SampleEntry, assigner: &BinAssigner) -> Result<SampleRow> {
    Ok(SampleRow {
        n: entry.graph.n(),
        k: entry.graph.k(),
        bin_index: assigner.assign(entry.chi)?,
        chi: entry.chi,
        mean_distance: entry.mean_distance,
        source: entry.source,
        seed: entry.seed,
        graph6: graph6::encode(&entry.graph).ok_or_else(|| anyhow!("n = {} too large for graph6", entry.graph.n()))?,
    })
}

pub fn write_sample(path: &Path, entries: &[SampleEntry], assigner: &BinAssigner) -> Result<()> {
    let file = std::fs::File::create(path).with_context(|| format!("writing {}", path.display()))?;
    write_sample_to(io::BufWriter::new(file), entries, assigner)
}

pub fn write_sample_to<W: io::Write>(w: W, entries: &[SampleEntry], assigner: &BinAssigner) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    w.write_record(SAMPLE_HEADER)?;
    for e in entries {
        w.serialize(sample_row(e, assigner)?)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a sample file, re-measuring every graph. All rows must share one
/// `(n, k)`, returned alongside the entries.
pub fn read_sample(path: &Path) -> Result<(Option<(usize, usize)>, Vec<SampleEntry>)> {
    let rows: Vec<SampleRow> = read_csv(path)?;
    let mut size = None;
    let mut out = Vec::with_capacity(rows.len());
    for (i, r) in rows.into_iter().enumerate() {
        let line = i + 2;
        if *size.get_or_insert((r.n, r.k)) != (r.n, r.k) {
            return Err(anyhow!("{}:{line}: mixed graph sizes in one sample", path.display()));
        }
        let g = graph6::decode(&r.graph6, r.k).with_context(|| format!("{}:{line}", path.display()))?;
        if g.n() != r.n || !g.degree_check() || !g.is_connected() {
            return Err(anyhow!("{}:{line}: not a connected {}-regular graph on {} vertices", path.display(), r.k, r.n));
        }
        out.push(SampleEntry::measure(g, r.source, r.seed)?);
    }
    Ok((size, out))
}

pub fn write_edgelist<W: io::Write>(mut w: W, entries: &[SampleEntry]) -> io::Result<()> {
    for e in entries {
        writeln!(w, "# n={} k={} chi={:.6} mean_distance={:.6} source={} seed={}", e.graph.n(), e.graph.k(), e.chi, e.mean_distance, e.source, e.seed)?;
        for (u, v) in e.graph.edges() {
            writeln!(w, "{u} {v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}
