//! Re-checks an on-disk library against its manifest.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use kreglib_core::canon::canonical_form;
use kreglib_core::graph6;
use kreglib_core::library::{BinAssigner, SampleEntry};

use crate::config::RunConfig;
use crate::layout::*;
use crate::records::{read_csv, BinRow, ManifestRow, MergedRow};

/// Rounding slack of the six-decimal manifest columns.
const PRINT_TOLERANCE: f64 = 5.01e-7;

/// Problems found in a library; empty when it is consistent.
#[derive(Debug, Default)]
pub struct Findings {
    pub problems: Vec<String>,
    pub graphs: usize,
}

impl Findings {
    pub fn ok(&self) -> bool {
        self.problems.is_empty()
    }

    fn push(&mut self, msg: String) {
        self.problems.push(msg);
    }
}

/// Checks every graph file against the manifest and every graph against
/// the regularity, connectivity, clustering and canonical-id invariants.
/// Unreadable top-level files are reported as errors.
pub fn verify_library(root: &Path) -> Result<Findings> {
    let cfg = RunConfig::load(&root.join(CONFIG))?;
    let manifest: Vec<ManifestRow> = read_csv(&root.join(MANIFEST))?;
    let mut f = Findings::default();
    if let Err(e) = cfg.validate() {
        f.push(format!("config.json: {e}"));
    }

    let mut groups: BTreeMap<(usize, usize), Vec<&ManifestRow>> = BTreeMap::new();
    for (i, row) in manifest.iter().enumerate() {
        if row.k != cfg.k || !cfg.n.contains(&row.n) {
            f.push(format!("manifest.csv:{}: n = {}, k = {} not in config", i + 2, row.n, row.k));
            continue;
        }
        groups.entry((row.n, row.bin_index)).or_default().push(row);
    }

    let mut expected_files = BTreeSet::new();
    let mut ids: BTreeMap<usize, BTreeSet<&str>> = BTreeMap::new();
    for (&(n, bin), rows) in &groups {
        let assigner = BinAssigner::new(n, cfg.k)?;
        if bin >= assigner.bin_count() {
            f.push(format!("n = {n}: bin {bin} outside 0..{}", assigner.bin_count()));
            continue;
        }
        if rows.len() > cfg.batch_size {
            f.push(format!("n = {n} bin {bin}: {} graphs exceed batch size {}", rows.len(), cfg.batch_size));
        }
        let rel = format!("n{n}/{}", bin_file_name(&assigner, bin));
        expected_files.insert(rel.clone());
        let path = root.join(&rel);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) => {
                f.push(format!("{rel}: {e}"));
                continue;
            }
        };
        let lines: Vec<&str> = text.lines().collect();
        if lines.len() != rows.len() {
            f.push(format!("{rel}: count mismatch, file has {} graphs, manifest lists {}", lines.len(), rows.len()));
        }
        for (j, (line, row)) in lines.iter().zip(rows).enumerate() {
            let at = format!("{rel}:{}", j + 1);
            f.graphs += 1;
            let g = match graph6::decode(line, cfg.k) {
                Ok(g) => g,
                Err(e) => {
                    f.push(format!("{at}: {e}"));
                    continue;
                }
            };
            if graph6::encode(&g).as_deref() != Some(line.trim()) {
                f.push(format!("{at}: graph6 does not round-trip"));
            }
            if g.n() != n || !g.degree_check() || !g.is_connected() {
                f.push(format!("{at}: not a connected {}-regular graph on {n} vertices", cfg.k));
                continue;
            }
            let e = SampleEntry::measure(g, row.source, row.seed)?;
            if e.chi > assigner.chi_max() + 1e-12 {
                f.push(format!("{at}: clustering {} above the bound", e.chi));
            }
            if assigner.assign(e.chi).ok() != Some(bin) {
                f.push(format!("{at}: clustering {:.6} outside bin {bin}", e.chi));
            }
            if (e.chi - row.chi).abs() > PRINT_TOLERANCE || (e.mean_distance - row.mean_distance).abs() > PRINT_TOLERANCE {
                f.push(format!("{at}: measurements differ from the manifest"));
            }
            let form = canonical_form(&e.graph);
            if form.graph6().as_deref() != Some(row.canonical_id.as_str()) {
                f.push(format!("{at}: canonical id does not match the graph"));
            } else if graph6::decode(&row.canonical_id, cfg.k).map(|c| canonical_form(&c)) != Ok(form) {
                f.push(format!("{at}: canonical id is not isomorphic to the graph"));
            }
            if !ids.entry(n).or_default().insert(&row.canonical_id) {
                f.push(format!("{at}: duplicate isomorphism class"));
            }
        }
    }

    for &n in &cfg.n {
        let dir = size_dir(root, n);
        let Ok(listing) = fs::read_dir(&dir) else { continue };
        for entry in listing {
            let name = entry?.file_name().to_string_lossy().into_owned();
            let rel = format!("n{n}/{name}");
            if name.ends_with(".g6") && !expected_files.contains(&rel) {
                f.push(format!("{rel}: not referenced by the manifest"));
            }
        }
    }

    check_bins(root, &cfg, &groups, &mut f)?;
    check_merged(root, &manifest, &mut f)?;
    Ok(f)
}

fn check_bins(root: &Path, cfg: &RunConfig, groups: &BTreeMap<(usize, usize), Vec<&ManifestRow>>, f: &mut Findings) -> Result<()> {
    let path = root.join(BINS);
    if !path.exists() {
        return Ok(());
    }
    let rows: Vec<BinRow> = read_csv(&path)?;
    for r in &rows {
        let listed = groups.get(&(r.n, r.bin_index)).map_or(0, Vec::len);
        if r.final_size != listed {
            f.push(format!("bins.csv: n = {} bin {} reports {} final graphs, manifest lists {listed}", r.n, r.bin_index, r.final_size));
        }
        if r.final_size != r.merged.min(cfg.batch_size) {
            f.push(format!("bins.csv: n = {} bin {} final size is not min(merged, batch size)", r.n, r.bin_index));
        }
        if r.merged != r.wm_noniso + r.cc_noniso - r.overlap {
            f.push(format!("bins.csv: n = {} bin {} merged count disagrees with source counts", r.n, r.bin_index));
        }
    }
    Ok(())
}

fn check_merged(root: &Path, manifest: &[ManifestRow], f: &mut Findings) -> Result<()> {
    let path = root.join(MERGED);
    if !path.exists() {
        return Ok(());
    }
    let rows: Vec<MergedRow> = read_csv(&path).with_context(|| "merged sample")?;
    let picked: Vec<(usize, usize, &str)> =
        rows.iter().filter(|r| r.selected == 1).map(|r| (r.n, r.bin_index, r.canonical_id.as_str())).collect();
    let listed: Vec<(usize, usize, &str)> = manifest.iter().map(|r| (r.n, r.bin_index, r.canonical_id.as_str())).collect();
    if picked != listed {
        f.push("merged.csv: selected graphs differ from the manifest".into());
    }
    Ok(())
}
