//! Binning, merging, deduplication and normality-driven subsampling.
//!
//! The per-size pipeline is split into steps so that a caller can persist
//! each raw batch before moving on:
//!
//! 1. [`run_wm`] and [`run_cc`] produce raw batches from each source;
//! 2. [`census`] optionally tops the sample up until no new class appears
//!    for a whole window of attempts (used where every class can be found);
//! 3. [`assemble`] deduplicates each source, merges them, subsamples each
//!    merged bin and computes per-bin statistics.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::index;
use thiserror::Error;

use crate::canon::DedupIndex;
use crate::cave::{cave_chain, CaveChainError};
use crate::graph::Graph;
use crate::metrics::{clustering_coefficient, max_clustering, mean_graph_distance, population_estimate, MetricError};
use crate::pairing::{uniform_regular, wm_campaign, PairingError, DEFAULT_MAX_ATTEMPTS};
use crate::seed::{derive_seed, rng_from_seed, stream};
use crate::stats::{cvm_statistic, describe, CvmNullCache, SampleMoments};
use crate::swap::{apply_swap, propose_swap};
use crate::walk::{build_down_run, WalkBatch, WalkConfig};

/// Slack allowed above the clustering bound and below zero.
pub const CHI_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LibraryError {
    #[error("clustering coefficient {0} outside the feasible range")]
    OutOfRange(f64),
    #[error("samples were binned with different parameters")]
    ConfigMismatch,
    #[error("degree must be at least 2 for clustering bins")]
    DegreeTooSmall,
    #[error(transparent)]
    Pairing(#[from] PairingError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    CaveChain(#[from] CaveChainError),
}

/// Which sampler produced a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Source {
    /// Uniform pairing-model sampler.
    Wm,
    /// Build-down walk from the cave chain.
    Cc,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Wm => "WM",
            Source::Cc => "CC",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Source {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "WM" => Ok(Source::Wm),
            "CC" => Ok(Source::Cc),
            _ => Err(()),
        }
    }
}

/// Equal-width partition of `[0, chi_max]`.
///
/// The default bin count is `ceil(2 n chi_max)`, which is `7n/5` for `k = 4`
/// (width `1/(2n)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinAssigner {
    n: usize,
    k: usize,
    bins: usize,
    chi_max: f64,
}

impl BinAssigner {
    pub fn new(n: usize, k: usize) -> Result<Self, LibraryError> {
        if k < 2 {
            return Err(LibraryError::DegreeTooSmall);
        }
        // 2n (k(k+1) - 6) / (k(k+1)), rounded up, in exact integers
        let num = 2 * n * (k * (k + 1) - 6);
        let den = k * (k + 1);
        Self::with_bins(n, k, num.div_ceil(den).max(1))
    }

    pub fn with_bins(n: usize, k: usize, bins: usize) -> Result<Self, LibraryError> {
        if k < 2 {
            return Err(LibraryError::DegreeTooSmall);
        }
        Ok(Self { n, k, bins: bins.max(1), chi_max: max_clustering(k) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn bin_count(&self) -> usize {
        self.bins
    }

    pub fn chi_max(&self) -> f64 {
        self.chi_max
    }

    pub fn width(&self) -> f64 {
        self.chi_max / self.bins as f64
    }

    /// Lower and upper edge of bin `i`.
    pub fn bounds(&self, i: usize) -> (f64, f64) {
        (i as f64 * self.width(), (i + 1) as f64 * self.width())
    }

    /// `floor(chi * B / chi_max)`, clamped to the last bin.
    ///
    /// Values within 1e-9 below an edge are placed above it, so that an
    /// exact edge computed in floating point lands in the upper bin.
    pub fn assign(&self, chi: f64) -> Result<usize, LibraryError> {
        if !(chi >= -CHI_TOLERANCE && chi <= self.chi_max + CHI_TOLERANCE) {
            return Err(LibraryError::OutOfRange(chi));
        }
        if self.chi_max <= 0.0 {
            return Ok(0);
        }
        let x = chi.max(0.0) * self.bins as f64 / self.chi_max + 1e-9;
        Ok((libm::floor(x) as usize).min(self.bins - 1))
    }
}

/// One graph with the measurements the library keeps for it.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleEntry {
    pub graph: Graph,
    pub chi: f64,
    pub mean_distance: f64,
    pub source: Source,
    /// Seed of the run or campaign that produced the graph.
    pub seed: u64,
}

impl SampleEntry {
    pub fn measure(graph: Graph, source: Source, seed: u64) -> Result<Self, MetricError> {
        let chi = clustering_coefficient(&graph)?;
        let mean_distance = mean_graph_distance(&graph)?;
        Ok(Self { graph, chi, mean_distance, source, seed })
    }
}

/// Entries grouped by clustering bin.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedSample {
    assigner: BinAssigner,
    bins: Vec<Vec<SampleEntry>>,
}

impl BinnedSample {
    pub fn new(assigner: BinAssigner) -> Self {
        Self { assigner, bins: vec![Vec::new(); assigner.bin_count()] }
    }

    pub fn from_entries<I>(assigner: BinAssigner, entries: I) -> Result<Self, LibraryError>
    where
        I: IntoIterator<Item = SampleEntry>,
    {
        let mut s = Self::new(assigner);
        for e in entries {
            s.push(e)?;
        }
        Ok(s)
    }

    pub fn push(&mut self, entry: SampleEntry) -> Result<usize, LibraryError> {
        let bin = self.assigner.assign(entry.chi)?;
        self.bins[bin].push(entry);
        Ok(bin)
    }

    pub fn assigner(&self) -> &BinAssigner {
        &self.assigner
    }

    pub fn bins(&self) -> &[Vec<SampleEntry>] {
        &self.bins
    }

    pub fn into_bins(self) -> Vec<Vec<SampleEntry>> {
        self.bins
    }

    pub fn len(&self) -> usize {
        self.bins.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Keeps the first entry of every isomorphism class.
    pub fn dedup(&self) -> Self {
        let bins = self
            .bins
            .iter()
            .map(|bin| {
                let mut idx = DedupIndex::new();
                bin.iter().filter(|e| idx.insert(&e.graph)).cloned().collect()
            })
            .collect();
        Self { assigner: self.assigner, bins }
    }
}

/// Per-bin class counts of a merge.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MergeCounts {
    pub wm_noniso: usize,
    pub cc_noniso: usize,
    /// Classes found by both sources.
    pub overlap: usize,
    pub merged: usize,
}

/// Deduplicates each sample, then takes the union bin by bin. Where both
/// sources found a class, the WM entry is kept.
pub fn merge_and_dedup(wm: &BinnedSample, cc: &BinnedSample) -> Result<(BinnedSample, Vec<MergeCounts>), LibraryError> {
    if wm.assigner != cc.assigner {
        return Err(LibraryError::ConfigMismatch);
    }
    let (wm, cc) = (wm.dedup(), cc.dedup());
    let mut merged = BinnedSample::new(wm.assigner);
    let mut counts = Vec::with_capacity(wm.bins.len());
    for (i, (a, b)) in wm.bins.iter().zip(&cc.bins).enumerate() {
        let mut idx = DedupIndex::new();
        let mut out: Vec<SampleEntry> = Vec::with_capacity(a.len() + b.len());
        for e in a {
            idx.insert(&e.graph);
            out.push(e.clone());
        }
        let mut overlap = 0;
        for e in b {
            if idx.insert(&e.graph) {
                out.push(e.clone());
            } else {
                overlap += 1;
            }
        }
        counts.push(MergeCounts { wm_noniso: a.len(), cc_noniso: b.len(), overlap, merged: out.len() });
        merged.bins[i] = out;
    }
    Ok((merged, counts))
}

/// Knobs of the normality-driven batch search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsampleParams {
    pub batch_size: usize,
    /// Draws made before the threshold is first checked.
    pub draws: usize,
    /// Hard cap on total draws.
    pub max_draws: usize,
    pub p_threshold: f64,
}

impl Default for SubsampleParams {
    fn default() -> Self {
        Self { batch_size: 100, draws: 10_000, max_draws: 100_000, p_threshold: 0.999 }
    }
}

/// Result of [`subsample_bin`].
#[derive(Debug, Clone, PartialEq)]
pub struct SubsampleOutcome {
    /// Sorted positions of the kept values.
    pub selected: Vec<usize>,
    pub draws: usize,
    /// Best p-value found, when a search ran.
    pub best_p: Option<f64>,
}

/// Picks the `batch_size`-subset of `values` with the highest normality
/// p-value among random draws. Bins no larger than `batch_size` are kept
/// whole. Ties keep the earliest draw.
pub fn subsample_bin(values: &[f64], params: &SubsampleParams, cache: &mut CvmNullCache, seed: u64) -> SubsampleOutcome {
    let m = values.len();
    let size = params.batch_size;
    if m <= size {
        return SubsampleOutcome { selected: (0..m).collect(), draws: 0, best_p: None };
    }
    cache.ensure(size);
    let mut rng = rng_from_seed(seed);
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut batch = vec![0.0; size];
    let mut draws = 0;
    while draws < params.max_draws.max(1) {
        if draws >= params.draws && best.as_ref().is_some_and(|(p, _)| *p > params.p_threshold) {
            break;
        }
        draws += 1;
        let pick = index::sample(&mut rng, m, size);
        for (slot, i) in batch.iter_mut().zip(pick.iter()) {
            *slot = values[i];
        }
        let p = cache.p_value(cvm_statistic(&batch), size).unwrap_or(0.0);
        if best.as_ref().is_none_or(|(b, _)| p > *b) {
            best = Some((p, pick.into_vec()));
        }
    }
    let (p, mut selected) = best.expect("at least one draw");
    selected.sort_unstable();
    SubsampleOutcome { selected, draws, best_p: Some(p) }
}

/// How the classes of one size were collected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Sampled, then topped up until saturation.
    Census,
    Sampled,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Census => "census",
            Method::Sampled => "sampled",
        }
    }
}

/// Every knob of a per-size build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineParams {
    pub k: usize,
    /// Raw graphs wanted per bin from each source.
    pub per_bin_target: usize,
    pub batch_cap: usize,
    pub abort_limit: usize,
    /// Uniform draws; defaults to `per_bin_target` times the bin count.
    pub wm_draws: Option<usize>,
    /// Build-down runs; defaults to `ceil(per_bin_target / batch_cap)`.
    pub cc_runs: Option<usize>,
    pub pairing_attempts: usize,
    pub subsample: SubsampleParams,
    /// Bootstrap size for normality p-values.
    pub null_draws: usize,
    /// Sizes whose estimated class count is at most this are saturated.
    pub census_limit: f64,
    /// Consecutive attempts without a new class that end a census.
    pub census_window: u64,
}

impl Default for PipelineParams {
    fn default() -> Self {
        Self {
            k: 4,
            per_bin_target: 1000,
            batch_cap: 20,
            abort_limit: 500,
            wm_draws: None,
            cc_runs: None,
            pairing_attempts: DEFAULT_MAX_ATTEMPTS,
            subsample: SubsampleParams::default(),
            null_draws: 10_000,
            census_limit: 1000.0,
            census_window: 1_000_000,
        }
    }
}

impl PipelineParams {
    pub fn assigner(&self, n: usize) -> Result<BinAssigner, LibraryError> {
        BinAssigner::new(n, self.k)
    }

    pub fn wm_draws_for(&self, n: usize) -> Result<usize, LibraryError> {
        Ok(self.wm_draws.unwrap_or(self.per_bin_target * self.assigner(n)?.bin_count()))
    }

    pub fn walk_config(&self, seed: u64) -> WalkConfig {
        WalkConfig { batch_cap: self.batch_cap, abort_limit: self.abort_limit, seed, target_per_bin: self.per_bin_target }
    }

    pub fn cc_run_count(&self) -> usize {
        self.cc_runs.unwrap_or_else(|| self.walk_config(0).runs_for_target())
    }

    pub fn method_for(&self, n: usize) -> Method {
        if self.k == 4 && population_estimate(n) <= self.census_limit {
            Method::Census
        } else {
            Method::Sampled
        }
    }

    /// Fresh null-distribution cache for a build with `master` seed.
    pub fn null_cache(&self, master: u64) -> CvmNullCache {
        CvmNullCache::new(self.null_draws, derive_seed(master, &[stream::CVM_NULL]))
    }
}

pub fn wm_seed(master: u64, n: usize) -> u64 {
    derive_seed(master, &[n as u64, stream::WM])
}

pub fn cc_seed(master: u64, n: usize, run: usize) -> u64 {
    derive_seed(master, &[n as u64, stream::CC, run as u64])
}

/// The uniform-sampler campaign for size `n`.
pub fn run_wm(n: usize, params: &PipelineParams, master: u64) -> Result<Vec<SampleEntry>, LibraryError> {
    let assigner = params.assigner(n)?;
    let draws = params.wm_draws_for(n)?;
    Ok(wm_campaign(&assigner, draws, params.per_bin_target, params.pairing_attempts, wm_seed(master, n))?)
}

/// Build-down run number `run` for size `n`, started from the cave chain.
pub fn run_cc(n: usize, params: &PipelineParams, master: u64, run: usize) -> Result<WalkBatch, LibraryError> {
    let assigner = params.assigner(n)?;
    let start = cave_chain(n, params.k)?;
    Ok(build_down_run(&start, &params.walk_config(cc_seed(master, n, run)), &assigner)?)
}

/// New classes found by a census top-up.
#[derive(Debug, Clone, Default)]
pub struct CensusOutcome {
    pub wm: Vec<SampleEntry>,
    pub cc: Vec<SampleEntry>,
    pub attempts: u64,
}

/// Alternates uniform draws and walk steps until `census_window`
/// consecutive attempts find no class absent from `known` and from earlier
/// census finds. The walk is skipped when `n` admits no cave chain.
pub fn census<'a, I>(n: usize, params: &PipelineParams, master: u64, known: I) -> Result<CensusOutcome, LibraryError>
where
    I: IntoIterator<Item = &'a Graph>,
{
    let k = params.k;
    let seed = derive_seed(master, &[n as u64, stream::CENSUS]);
    let mut rng = rng_from_seed(seed);
    let mut index = DedupIndex::new();
    for g in known {
        index.insert(g);
    }
    let mut walker = cave_chain(n, k).ok();
    let mut out = CensusOutcome::default();
    let mut quiet = 0u64;
    while quiet < params.census_window {
        let g = uniform_regular(n, k, params.pairing_attempts, &mut rng)?;
        out.attempts += 1;
        if index.insert(&g) {
            out.wm.push(SampleEntry::measure(g, Source::Wm, seed)?);
            quiet = 0;
        } else {
            quiet += 1;
        }
        let Some(current) = walker.as_mut() else { continue };
        if quiet >= params.census_window {
            break;
        }
        out.attempts += 1;
        match propose_swap(current, &mut rng).and_then(|p| apply_swap(current, &p)) {
            Ok(next) => {
                if index.insert(&next) {
                    out.cc.push(SampleEntry::measure(next.clone(), Source::Cc, seed)?);
                    quiet = 0;
                } else {
                    quiet += 1;
                }
                *current = next;
            }
            Err(_) => quiet += 1,
        }
    }
    Ok(out)
}

/// Per-bin sample sizes through the pipeline.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BinCounts {
    pub wm_raw: usize,
    pub cc_raw: usize,
    pub wm_noniso: usize,
    pub cc_noniso: usize,
    pub overlap: usize,
    pub merged: usize,
    pub final_size: usize,
}

/// One clustering bin of the finished library.
#[derive(Debug, Clone, PartialEq)]
pub struct FinalBin {
    pub index: usize,
    pub low: f64,
    pub high: f64,
    pub counts: BinCounts,
    /// Merged non-isomorphic entries.
    pub merged: Vec<SampleEntry>,
    /// Positions in `merged` of the final entries, sorted.
    pub selected: Vec<usize>,
    pub merged_moments: Option<SampleMoments>,
    pub final_moments: Option<SampleMoments>,
    pub draws: usize,
}

impl FinalBin {
    pub fn final_entries(&self) -> impl Iterator<Item = &SampleEntry> + '_ {
        self.selected.iter().map(|&i| &self.merged[i])
    }
}

/// The curated library for one graph size.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeLibrary {
    pub n: usize,
    pub k: usize,
    pub assigner: BinAssigner,
    pub method: Method,
    pub census_attempts: u64,
    pub bins: Vec<FinalBin>,
}

impl SizeLibrary {
    pub fn final_size(&self) -> usize {
        self.bins.iter().map(|b| b.selected.len()).sum()
    }

    pub fn merged_size(&self) -> usize {
        self.bins.iter().map(|b| b.merged.len()).sum()
    }

    pub fn occupied_bins(&self) -> usize {
        self.bins.iter().filter(|b| !b.merged.is_empty()).count()
    }

    pub fn overlap(&self) -> usize {
        self.bins.iter().map(|b| b.counts.overlap).sum()
    }
}

fn moments(values: &[f64], cache: &mut CvmNullCache) -> Option<SampleMoments> {
    describe(values, cache).ok()
}

pub fn subsample_seed(master: u64, n: usize, bin: usize) -> u64 {
    derive_seed(master, &[n as u64, stream::SUBSAMPLE, bin as u64])
}

/// Dedup, merge, subsample and describe the raw samples of one size.
pub fn assemble(
    n: usize,
    params: &PipelineParams,
    master: u64,
    wm_raw: Vec<SampleEntry>,
    cc_raw: Vec<SampleEntry>,
    census_attempts: Option<u64>,
    cache: &mut CvmNullCache,
) -> Result<SizeLibrary, LibraryError> {
    let assigner = params.assigner(n)?;
    let wm = BinnedSample::from_entries(assigner, wm_raw)?;
    let cc = BinnedSample::from_entries(assigner, cc_raw)?;
    let (merged, merge_counts) = merge_and_dedup(&wm, &cc)?;
    let mut bins = Vec::with_capacity(assigner.bin_count());
    for (i, entries) in merged.into_bins().into_iter().enumerate() {
        let values: Vec<f64> = entries.iter().map(|e| e.mean_distance).collect();
        let outcome = subsample_bin(&values, &params.subsample, cache, subsample_seed(master, n, i));
        let chosen: Vec<f64> = outcome.selected.iter().map(|&j| values[j]).collect();
        let (low, high) = assigner.bounds(i);
        let mc = merge_counts[i];
        bins.push(FinalBin {
            index: i,
            low,
            high,
            counts: BinCounts {
                wm_raw: wm.bins()[i].len(),
                cc_raw: cc.bins()[i].len(),
                wm_noniso: mc.wm_noniso,
                cc_noniso: mc.cc_noniso,
                overlap: mc.overlap,
                merged: mc.merged,
                final_size: outcome.selected.len(),
            },
            merged_moments: moments(&values, cache),
            final_moments: moments(&chosen, cache),
            selected: outcome.selected,
            merged: entries,
            draws: outcome.draws,
        });
    }
    let method = if census_attempts.is_some() { Method::Census } else { Method::Sampled };
    Ok(SizeLibrary { n, k: params.k, assigner, method, census_attempts: census_attempts.unwrap_or(0), bins })
}

/// Runs every step for one size without persistence.
pub fn build_size(n: usize, params: &PipelineParams, master: u64, cache: &mut CvmNullCache) -> Result<SizeLibrary, LibraryError> {
    let mut wm = run_wm(n, params, master)?;
    let mut cc = Vec::new();
    for run in 0..params.cc_run_count() {
        cc.extend(run_cc(n, params, master, run)?.entries);
    }
    let mut attempts = None;
    if params.method_for(n) == Method::Census {
        let found = census(n, params, master, wm.iter().chain(&cc).map(|e| &e.graph))?;
        attempts = Some(found.attempts);
        wm.extend(found.wm);
        cc.extend(found.cc);
    }
    assemble(n, params, master, wm, cc, attempts, cache)
}
