//! On-disk library layout:
//!
//! ```text
//! <dir>/config.json        run configuration
//! <dir>/manifest.csv       one row per final graph
//! <dir>/bins.csv           per-bin counts and moments
//! <dir>/sizes.csv          per-n summary
//! <dir>/merged.csv         merged non-isomorphic sample, final graphs flagged
//! <dir>/n<n>/bin<idx>_chi<low>-<high>.g6
//! ```
//!
//! Bin files list the final graphs of one occupied bin in manifest order.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Result;
use kreglib_core::graph6;
use kreglib_core::library::{BinAssigner, SizeLibrary};

use crate::config::RunConfig;
use crate::records::*;

pub const CONFIG: &str = "config.json";
pub const MANIFEST: &str = "manifest.csv";
pub const BINS: &str = "bins.csv";
pub const SIZES: &str = "sizes.csv";
pub const MERGED: &str = "merged.csv";

pub fn size_dir(root: &Path, n: usize) -> PathBuf {
    root.join(format!("n{n}"))
}

pub fn bin_file_name(assigner: &BinAssigner, bin: usize) -> String {
    let (low, high) = assigner.bounds(bin);
    format!("bin{bin:03}_chi{low:.4}-{high:.4}.g6")
}

/// Writes every file of the layout, replacing earlier output for the same
/// sizes.
pub fn write_library(root: &Path, cfg: &RunConfig, libs: &[SizeLibrary]) -> Result<()> {
    fs::create_dir_all(root)?;
    fs::write(root.join(CONFIG), cfg.to_json())?;
    let mut manifest = Vec::new();
    let mut merged = Vec::new();
    let mut bins = Vec::new();
    let mut sizes = Vec::new();
    for lib in libs {
        let dir = size_dir(root, lib.n);
        if dir.exists() {
            fs::remove_dir_all(&dir)?;
        }
        fs::create_dir_all(&dir)?;
        for b in &lib.bins {
            let mut lines = String::new();
            for e in b.final_entries() {
                manifest.push(ManifestRow::new(e, b.index));
                lines.push_str(&graph6::encode(&e.graph).expect("validated n"));
                lines.push('\n');
            }
            if !lines.is_empty() {
                fs::write(dir.join(bin_file_name(&lib.assigner, b.index)), lines)?;
            }
            let mut selected = b.selected.iter().peekable();
            for (i, e) in b.merged.iter().enumerate() {
                let pick = selected.next_if_eq(&&i).is_some();
                let row = ManifestRow::new(e, b.index);
                merged.push(MergedRow {
                    n: row.n,
                    bin_index: b.index,
                    chi: row.chi,
                    mean_distance: row.mean_distance,
                    source: row.source,
                    seed: row.seed,
                    canonical_id: row.canonical_id,
                    selected: pick as u8,
                });
            }
            let [merged_mean, merged_std, merged_skewness, merged_cvm_p] = moment_fields(b.merged_moments);
            let [final_mean, final_std, final_skewness, final_cvm_p] = moment_fields(b.final_moments);
            let c = b.counts;
            bins.push(BinRow {
                n: lib.n,
                k: lib.k,
                bin_index: b.index,
                chi_low: b.low,
                chi_high: b.high,
                wm_raw: c.wm_raw,
                wm_noniso: c.wm_noniso,
                cc_raw: c.cc_raw,
                cc_noniso: c.cc_noniso,
                overlap: c.overlap,
                merged: c.merged,
                final_size: c.final_size,
                draws: b.draws,
                merged_mean,
                merged_std,
                merged_skewness,
                merged_cvm_p,
                final_mean,
                final_std,
                final_skewness,
                final_cvm_p,
            });
        }
        sizes.push(SizeRow {
            n: lib.n,
            k: lib.k,
            method: lib.method.as_str().into(),
            bins: lib.assigner.bin_count(),
            occupied: lib.occupied_bins(),
            wm_raw: lib.bins.iter().map(|b| b.counts.wm_raw).sum(),
            cc_raw: lib.bins.iter().map(|b| b.counts.cc_raw).sum(),
            merged: lib.merged_size(),
            final_size: lib.final_size(),
            overlap: lib.overlap(),
            census_attempts: lib.census_attempts,
        });
    }
    write_csv_with_header(&root.join(MANIFEST), MANIFEST_HEADER, &manifest)?;
    write_csv_with_header(&root.join(MERGED), MERGED_HEADER, &merged)?;
    write_csv_with_header(&root.join(BINS), BIN_HEADER, &bins)?;
    write_csv_with_header(&root.join(SIZES), SIZE_HEADER, &sizes)?;
    Ok(())
}

pub const BIN_HEADER: &[&str] = &[
    "n", "k", "bin_index", "chi_low", "chi_high", "wm_raw", "wm_noniso", "cc_raw", "cc_noniso", "overlap", "merged",
    "final", "draws", "merged_mean", "merged_std", "merged_skewness", "merged_cvm_p", "final_mean", "final_std",
    "final_skewness", "final_cvm_p",
];

pub const SIZE_HEADER: &[&str] =
    &["n", "k", "method", "bins", "occupied", "wm_raw", "cc_raw", "merged", "final", "overlap", "census_attempts"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bin_names() {
        let a = BinAssigner::new(10, 4).unwrap();
        assert_eq!(bin_file_name(&a, 0), "bin000_chi0.0000-0.0500.g6");
        assert_eq!(bin_file_name(&a, 13), "bin013_chi0.6500-0.7000.g6");
    }

    #[test]
    fn empty_library_has_headers() {
        let dir = tempfile::tempdir().unwrap();
        write_library(dir.path(), &RunConfig::default(), &[]).unwrap();
        let manifest = fs::read_to_string(dir.path().join(MANIFEST)).unwrap();
        assert_eq!(manifest, format!("{}\n", MANIFEST_HEADER.join(",")));
        let bins = fs::read_to_string(dir.path().join(BINS)).unwrap();
        assert_eq!(bins.trim_end(), BIN_HEADER.join(","));
    }
}
