//! The build-down walk: repeated validity-checked edge swaps from a start
//! graph (normally the cave chain), harvesting graphs into clustering bins.
//!
//! The start graph is recorded first. Each step proposes and applies one
//! swap; a rejected swap leaves the walk in place. An accepted graph whose
//! bin already holds `batch_cap` graphs is not recorded but the walk moves
//! on to it. Otherwise it is recorded unless it is isomorphic to a graph
//! already in this batch, in which case the walk stays put. The run stops
//! after `abort_limit` consecutive steps that recorded nothing, or once
//! every bin is full.

use alloc::vec;
use alloc::vec::Vec;

use crate::canon::DedupIndex;
use crate::graph::Graph;
use crate::library::{BinAssigner, SampleEntry, Source};
use crate::metrics::{clustering_coefficient, MetricError};
use crate::seed::rng_from_seed;
use crate::swap::{apply_swap, propose_swap};

/// Parameters of one build-down run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkConfig {
    /// Most graphs recorded per bin in one run.
    pub batch_cap: usize,
    /// Consecutive non-recording steps that end the run.
    pub abort_limit: usize,
    pub seed: u64,
    /// Raw target per bin across all runs of a campaign.
    pub target_per_bin: usize,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self { batch_cap: 20, abort_limit: 500, seed: 0, target_per_bin: 1000 }
    }
}

impl WalkConfig {
    /// Runs needed for a bin reached in every run to hit `target_per_bin`.
    pub fn runs_for_target(&self) -> usize {
        if self.batch_cap == 0 {
            return 0;
        }
        self.target_per_bin.div_ceil(self.batch_cap)
    }
}

/// Graphs recorded by one run plus step counters.
#[derive(Debug, Clone, Default)]
pub struct WalkBatch {
    pub entries: Vec<SampleEntry>,
    pub steps: usize,
    pub swaps_accepted: usize,
}

struct Harvest<'a> {
    assigner: &'a BinAssigner,
    cap: usize,
    seed: u64,
    counts: Vec<usize>,
    seen: DedupIndex,
    entries: Vec<SampleEntry>,
}

enum Outcome {
    Recorded,
    BinFull,
    Isomorphic,
}

impl Harvest<'_> {
    fn offer(&mut self, g: &Graph) -> Result<Outcome, MetricError> {
        let chi = clustering_coefficient(g)?;
        let bin = self.assigner.assign(chi).expect("swaps preserve the clustering bound");
        if self.counts[bin] >= self.cap {
            return Ok(Outcome::BinFull);
        }
        if !self.seen.insert(g) {
            return Ok(Outcome::Isomorphic);
        }
        self.counts[bin] += 1;
        self.entries.push(SampleEntry::measure(g.clone(), Source::Cc, self.seed)?);
        Ok(Outcome::Recorded)
    }

    fn all_full(&self) -> bool {
        self.counts.iter().all(|&c| c >= self.cap)
    }
}

/// One build-down run from `start`.
pub fn build_down_run(start: &Graph, cfg: &WalkConfig, assigner: &BinAssigner) -> Result<WalkBatch, MetricError> {
    if cfg.batch_cap == 0 {
        return Ok(WalkBatch::default());
    }
    let mut rng = rng_from_seed(cfg.seed);
    let mut harvest = Harvest {
        assigner,
        cap: cfg.batch_cap,
        seed: cfg.seed,
        counts: vec![0; assigner.bin_count()],
        seen: DedupIndex::new(),
        entries: Vec::new(),
    };
    let (mut steps, mut swaps_accepted) = (0, 0);

    let mut current = start.clone();
    harvest.offer(&current)?;
    let mut aborts = 0;
    while aborts < cfg.abort_limit && !harvest.all_full() {
        steps += 1;
        let next = match propose_swap(&current, &mut rng).and_then(|p| apply_swap(&current, &p)) {
            Ok(g) => g,
            Err(_) => {
                aborts += 1;
                continue;
            }
        };
        swaps_accepted += 1;
        match harvest.offer(&next)? {
            Outcome::Recorded => {
                aborts = 0;
                current = next;
            }
            Outcome::BinFull => {
                aborts += 1;
                current = next;
            }
            Outcome::Isomorphic => aborts += 1,
        }
    }
    Ok(WalkBatch { entries: harvest.entries, steps, swaps_accepted })
}
