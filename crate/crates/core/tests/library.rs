use kreglib_core::canon::DedupIndex;
use kreglib_core::library::{
    assemble, census, subsample_bin, BinAssigner, BinnedSample, PipelineParams, SampleEntry, Source, SubsampleParams,
};
use kreglib_core::pairing::{uniform_regular, DEFAULT_MAX_ATTEMPTS};
use kreglib_core::seed::rng_from_seed;
use kreglib_core::stats::{sample_moments, CvmNullCache};
use kreglib_core::walk::{build_down_run, WalkConfig};
use kreglib_core::cave_chain;
use rand::Rng;
use rand_distr::Exp1;

#[test]
fn subsampling_a_skewed_bin_improves_normality() {
    let mut rng = rng_from_seed(31);
    let values: Vec<f64> = (0..1000).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let mut cache = CvmNullCache::new(2_000, 5);
    let params = SubsampleParams { draws: 2_000, max_draws: 5_000, ..SubsampleParams::default() };
    let out = subsample_bin(&values, &params, &mut cache, 8);
    let chosen: Vec<f64> = out.selected.iter().map(|&i| values[i]).collect();
    assert_eq!(chosen.len(), 100);
    let before = cache.normality(&values).unwrap();
    let after = cache.normality(&chosen).unwrap();
    assert!(after > before, "p {before} -> {after}");
    let (s0, s1) = (sample_moments(&values).unwrap().skewness, sample_moments(&chosen).unwrap().skewness);
    assert!(s1.abs() < s0.abs(), "skewness {s0} -> {s1}");
}

#[test]
fn census_at_ten_vertices_finds_all_59_classes() {
    let params = PipelineParams { census_window: 200_000, ..PipelineParams::default() };
    let found = census(10, &params, 3, std::iter::empty()).unwrap();
    assert_eq!(found.wm.len() + found.cc.len(), 59);
    let mut idx = DedupIndex::new();
    assert!(found.wm.iter().chain(&found.cc).all(|e| idx.insert(&e.graph)));
}

#[test]
fn uniform_campaign_never_exceeds_59_classes() {
    let mut rng = rng_from_seed(12);
    let mut idx = DedupIndex::new();
    for _ in 0..50_000 {
        idx.insert(&uniform_regular(10, 4, DEFAULT_MAX_ATTEMPTS, &mut rng).unwrap());
    }
    assert!(idx.len() <= 59 && idx.len() > 50, "{} classes", idx.len());
}

#[test]
fn final_bins_are_subsets_of_merged_bins() {
    let n = 15;
    let params = PipelineParams {
        per_bin_target: 150,
        subsample: SubsampleParams { draws: 300, max_draws: 600, ..SubsampleParams::default() },
        null_draws: 1_000,
        ..PipelineParams::default()
    };
    let assigner = params.assigner(n).unwrap();
    let mut rng = rng_from_seed(4);
    let wm: Vec<SampleEntry> = (0..1_500)
        .map(|_| SampleEntry::measure(uniform_regular(n, 4, DEFAULT_MAX_ATTEMPTS, &mut rng).unwrap(), Source::Wm, 4).unwrap())
        .collect();
    let cfg = WalkConfig { batch_cap: 40, seed: 9, ..WalkConfig::default() };
    let cc = build_down_run(&cave_chain(n, 4).unwrap(), &cfg, &assigner).unwrap().entries;
    let mut cache = params.null_cache(1);
    let lib = assemble(n, &params, 1, wm.clone(), cc.clone(), None, &mut cache).unwrap();
    assert_eq!(lib.bins.len(), assigner.bin_count());
    let raw = BinnedSample::from_entries(assigner, wm.into_iter().chain(cc)).unwrap().dedup();
    for b in &lib.bins {
        assert_eq!(b.selected.len(), b.merged.len().min(100));
        assert!(b.selected.windows(2).all(|w| w[0] < w[1]));
        for e in b.final_entries() {
            assert_eq!(assigner.assign(e.chi).unwrap(), b.index);
        }
        assert_eq!(b.counts.merged, b.merged.len());
        assert_eq!(b.counts.merged, b.counts.wm_noniso + b.counts.cc_noniso - b.counts.overlap);
        assert_eq!(b.merged.len(), raw.bins()[b.index].len());
    }
    let again = assemble(n, &params, 1, lib.bins.iter().flat_map(|b| b.merged.clone()).collect(), Vec::new(), None, &mut params.null_cache(1)).unwrap();
    assert_eq!(again.merged_size(), lib.merged_size());
}

#[test]
fn empty_samples_assemble_to_empty_bins() {
    let params = PipelineParams::default();
    let lib = assemble(20, &params, 0, Vec::new(), Vec::new(), None, &mut params.null_cache(0)).unwrap();
    assert_eq!(lib.final_size(), 0);
    assert_eq!(lib.bins.len(), BinAssigner::new(20, 4).unwrap().bin_count());
}
