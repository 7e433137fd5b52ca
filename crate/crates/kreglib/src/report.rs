//! CSV data behind the figures and the sample-size table.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Result;
use kreglib_core::library::Source;
use kreglib_core::metrics::{known_quartic_count, population_estimate_log10, LogBase};
use serde::Serialize;

use crate::config::RunConfig;
use crate::layout::{BINS, CONFIG, MERGED, SIZES};
use crate::records::{read_csv, write_csv, BinRow, MergedRow, SizeRow};

/// Intervals per distance histogram.
pub const HISTOGRAM_BINS: usize = 20;

#[derive(Serialize)]
struct PopulationRow {
    n: usize,
    known: Option<u64>,
    log10_known: Option<String>,
    log10_estimate: String,
    log10_estimate_base10: String,
}

#[derive(Serialize)]
struct SampleSizeRow {
    n: usize,
    bin_index: usize,
    chi_low: String,
    chi_high: String,
    wm_raw: usize,
    wm_noniso: usize,
    cc_raw: usize,
    cc_noniso: usize,
}

#[derive(Serialize)]
struct OverlapRow {
    n: usize,
    bin_index: usize,
    wm_noniso: usize,
    cc_noniso: usize,
    overlap: usize,
    merged: usize,
}

#[derive(Serialize)]
struct HistRow {
    n: usize,
    bin_index: usize,
    sample: &'static str,
    low: String,
    high: String,
    count: usize,
}

#[derive(Serialize)]
struct PHistRow {
    sample: &'static str,
    p_low: String,
    p_high: String,
    count: usize,
}

#[derive(Serialize)]
struct TableRow {
    n: usize,
    bins: usize,
    occupied: usize,
    wm_raw: usize,
    wm_noniso: usize,
    cc_raw: usize,
    cc_noniso: usize,
    overlap: usize,
    merged: usize,
    #[serde(rename = "final")]
    final_size: usize,
    method: String,
    known: Option<u64>,
    log10_estimate: String,
}

fn f4(x: f64) -> String {
    format!("{x:.4}")
}

/// Equal-width counts of each series over the joint range of all series.
fn histogram(series: &[&[f64]], bins: usize) -> Vec<(f64, f64, Vec<usize>)> {
    let all = series.iter().flat_map(|s| s.iter().copied());
    let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        return Vec::new();
    }
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut out: Vec<(f64, f64, Vec<usize>)> =
        (0..bins).map(|i| (lo + i as f64 * width, lo + (i + 1) as f64 * width, vec![0; series.len()])).collect();
    for (s, values) in series.iter().enumerate() {
        for &x in values.iter() {
            let i = (((x - lo) / width) as usize).min(bins - 1);
            out[i].2[s] += 1;
        }
    }
    out
}

fn hist_rows(n: usize, bin: usize, labels: &[&'static str], series: &[&[f64]], out: &mut Vec<HistRow>) {
    for (low, high, counts) in histogram(series, HISTOGRAM_BINS) {
        for (label, count) in labels.iter().zip(counts) {
            out.push(HistRow { n, bin_index: bin, sample: label, low: f4(low), high: f4(high), count });
        }
    }
}

/// Writes the report files into `out` and returns their paths.
pub fn write_report(lib: &Path, out: &Path) -> Result<Vec<PathBuf>> {
    let cfg = RunConfig::load(&lib.join(CONFIG))?;
    let bins: Vec<BinRow> = read_csv(&lib.join(BINS))?;
    let sizes: Vec<SizeRow> = read_csv(&lib.join(SIZES))?;
    let merged: Vec<MergedRow> = read_csv(&lib.join(MERGED))?;
    fs::create_dir_all(out)?;
    let mut written = Vec::new();
    let mut emit = |name: &str, f: &dyn Fn(&Path) -> Result<()>| -> Result<()> {
        let p = out.join(name);
        f(&p)?;
        written.push(p);
        Ok(())
    };

    let top = cfg.n.iter().copied().max().unwrap_or(0).max(50);
    let population: Vec<PopulationRow> = (6..=top)
        .map(|n| PopulationRow {
            n,
            known: known_quartic_count(n),
            log10_known: known_quartic_count(n).map(|c| format!("{:.6}", (c as f64).log10())),
            log10_estimate: format!("{:.6}", population_estimate_log10(n, LogBase::Natural)),
            log10_estimate_base10: format!("{:.6}", population_estimate_log10(n, LogBase::Ten)),
        })
        .collect();
    emit("fig1_population.csv", &|p| write_csv(p, &population))?;

    let sample_sizes: Vec<SampleSizeRow> = bins
        .iter()
        .map(|b| SampleSizeRow {
            n: b.n,
            bin_index: b.bin_index,
            chi_low: f4(b.chi_low),
            chi_high: f4(b.chi_high),
            wm_raw: b.wm_raw,
            wm_noniso: b.wm_noniso,
            cc_raw: b.cc_raw,
            cc_noniso: b.cc_noniso,
        })
        .collect();
    emit("fig4_sample_sizes.csv", &|p| write_csv(p, &sample_sizes))?;

    let mut by_bin: BTreeMap<(usize, usize), Vec<&MergedRow>> = BTreeMap::new();
    for r in &merged {
        by_bin.entry((r.n, r.bin_index)).or_default().push(r);
    }
    let values = |key: (usize, usize), keep: &dyn Fn(&MergedRow) -> bool| -> Vec<f64> {
        by_bin.get(&key).map_or_else(Vec::new, |rows| rows.iter().filter(|r| keep(r)).map(|r| r.mean_distance).collect())
    };

    // bins where both samplers came within 1% of the per-source target
    let full = (cfg.per_bin_target as f64 * 0.99).ceil() as usize;
    let mut fig5 = Vec::new();
    for b in bins.iter().filter(|b| b.wm_noniso >= full && b.cc_noniso >= full) {
        let key = (b.n, b.bin_index);
        let wm = values(key, &|r| r.source == Source::Wm);
        let cc = values(key, &|r| r.source == Source::Cc);
        hist_rows(b.n, b.bin_index, &["WM", "CC"], &[&wm, &cc], &mut fig5);
    }
    emit("fig5_distance_by_source.csv", &|p| write_csv(p, &fig5))?;

    let overlap: Vec<OverlapRow> = bins
        .iter()
        .map(|b| OverlapRow {
            n: b.n,
            bin_index: b.bin_index,
            wm_noniso: b.wm_noniso,
            cc_noniso: b.cc_noniso,
            overlap: b.overlap,
            merged: b.merged,
        })
        .collect();
    emit("fig6_overlap.csv", &|p| write_csv(p, &overlap))?;

    let large: Vec<&BinRow> = bins.iter().filter(|b| b.merged > cfg.batch_size).collect();
    let mut fig7 = Vec::new();
    for (label, ps) in [
        ("merged", large.iter().filter_map(|b| b.merged_cvm_p).collect::<Vec<_>>()),
        ("final", large.iter().filter_map(|b| b.final_cvm_p).collect()),
    ] {
        for i in 0..10 {
            let (lo, hi) = (i as f64 / 10.0, (i + 1) as f64 / 10.0);
            let count = ps.iter().filter(|&&p| p >= lo && (p < hi || (i == 9 && p <= hi))).count();
            fig7.push(PHistRow { sample: label, p_low: format!("{lo:.1}"), p_high: format!("{hi:.1}"), count });
        }
    }
    emit("fig7_cvm_histogram.csv", &|p| write_csv(p, &fig7))?;

    emit("fig8_11_bin_moments.csv", &|p| write_csv(p, &bins))?;

    let mut s1 = Vec::new();
    for b in &large {
        let key = (b.n, b.bin_index);
        let all = values(key, &|_| true);
        let fin = values(key, &|r| r.selected == 1);
        hist_rows(b.n, b.bin_index, &["merged", "final"], &[&all, &fin], &mut s1);
    }
    emit("figS1_distance_histograms.csv", &|p| write_csv(p, &s1))?;

    let table: Vec<TableRow> = sizes
        .iter()
        .map(|s| {
            let of = |f: fn(&BinRow) -> usize| bins.iter().filter(|b| b.n == s.n).map(f).sum();
            TableRow {
                n: s.n,
                bins: s.bins,
                occupied: s.occupied,
                wm_raw: s.wm_raw,
                wm_noniso: of(|b| b.wm_noniso),
                cc_raw: s.cc_raw,
                cc_noniso: of(|b| b.cc_noniso),
                overlap: s.overlap,
                merged: s.merged,
                final_size: s.final_size,
                method: s.method.clone(),
                known: known_quartic_count(s.n),
                log10_estimate: format!("{:.2}", population_estimate_log10(s.n, LogBase::Natural)),
            }
        })
        .collect();
    emit("table1.csv", &|p| write_csv(p, &table))?;
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_counts_everything() {
        let a = [0.0, 0.5, 1.0, 1.0];
        let b = [0.25];
        let h = histogram(&[&a, &b], 4);
        assert_eq!(h.len(), 4);
        assert_eq!(h.iter().map(|r| r.2[0]).sum::<usize>(), 4);
        assert_eq!(h[3].2[0], 2);
        assert_eq!(h[1].2[1], 1);
        assert!(histogram(&[&[]], 4).is_empty());
        let flat = histogram(&[&[2.0, 2.0]], 3);
        assert_eq!(flat[0].2[0], 2);
    }
}
