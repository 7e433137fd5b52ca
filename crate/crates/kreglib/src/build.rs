//! Checkpointed library builds.
//!
//! Raw samples are saved after each (n, source, run) step under
//! `<out>/checkpoints/n<n>/`, one `source seed graph6` line per graph, and
//! reloaded on the next invocation with the same generation parameters.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use kreglib_core::graph6;
use kreglib_core::library::{assemble, census, run_cc, run_wm, Method, SampleEntry, SizeLibrary, Source};
use log::info;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::layout::write_library;

/// Raw samples of one step plus the census attempt count, if any.
struct Checkpoint {
    entries: Vec<SampleEntry>,
    attempts: Option<u64>,
}

fn checkpoint_root(out: &Path) -> PathBuf {
    out.join("checkpoints")
}

fn save(path: &Path, entries: &[SampleEntry], attempts: Option<u64>) -> Result<()> {
    let mut text = String::new();
    if let Some(a) = attempts {
        text.push_str(&format!("# attempts {a}\n"));
    }
    for e in entries {
        let g6 = graph6::encode(&e.graph).ok_or_else(|| anyhow!("graph too large for graph6"))?;
        text.push_str(&format!("{}\t{}\t{}\n", e.source, e.seed, g6));
    }
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).with_context(|| format!("writing {}", tmp.display()))?;
    f.write_all(text.as_bytes())?;
    f.sync_all()?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn load(path: &Path, k: usize) -> Result<Option<Checkpoint>> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e).with_context(|| format!("reading {}", path.display())),
    };
    let mut attempts = None;
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let bad = || anyhow!("{}:{}: malformed checkpoint line", path.display(), i + 1);
        if let Some(a) = line.strip_prefix("# attempts ") {
            attempts = Some(a.parse().map_err(|_| bad())?);
            continue;
        }
        let mut parts = line.split('\t');
        let (Some(src), Some(seed), Some(g6), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
            return Err(bad());
        };
        let source: Source = src.parse().map_err(|_| bad())?;
        let seed = seed.parse().map_err(|_| bad())?;
        let g = graph6::decode(g6, k).with_context(bad)?;
        entries.push(SampleEntry::measure(g, source, seed)?);
    }
    Ok(Some(Checkpoint { entries, attempts }))
}

fn cached<F>(path: &Path, k: usize, make: F) -> Result<Checkpoint>
where
    F: FnOnce() -> Result<Checkpoint>,
{
    if let Some(c) = load(path, k)? {
        info!("reusing {}", path.display());
        return Ok(c);
    }
    let c = make()?;
    save(path, &c.entries, c.attempts)?;
    Ok(c)
}

/// Clears checkpoints written under different generation parameters.
fn prepare_checkpoints(cfg: &RunConfig) -> Result<PathBuf> {
    let root = checkpoint_root(&cfg.out);
    let stamp = root.join("config.json");
    if let Ok(text) = fs::read_to_string(&stamp) {
        let old: Option<RunConfig> = serde_json::from_str(&text).ok();
        if old.is_none_or(|old| !old.same_generation(cfg)) {
            info!("generation parameters changed; discarding {}", root.display());
            fs::remove_dir_all(&root)?;
        }
    }
    fs::create_dir_all(&root)?;
    fs::write(&stamp, cfg.to_json())?;
    Ok(root)
}

/// Generates, merges and subsamples every requested size.
pub fn build_sizes(cfg: &RunConfig) -> Result<Vec<SizeLibrary>> {
    cfg.validate()?;
    let params = cfg.params();
    let root = prepare_checkpoints(cfg)?;
    let mut cache = params.null_cache(cfg.seed);
    let mut out = Vec::with_capacity(cfg.n.len());
    for &n in &cfg.n {
        let dir = root.join(format!("n{n}"));
        fs::create_dir_all(&dir)?;
        info!("n = {n}: sampling");
        let (wm, cc) = rayon::join(
            || {
                cached(&dir.join("wm.tsv"), cfg.k, || {
                    Ok(Checkpoint { entries: run_wm(n, &params, cfg.seed)?, attempts: None })
                })
            },
            || {
                (0..params.cc_run_count())
                    .into_par_iter()
                    .map(|run| {
                        cached(&dir.join(format!("cc_{run:04}.tsv")), cfg.k, || {
                            Ok(Checkpoint { entries: run_cc(n, &params, cfg.seed, run)?.entries, attempts: None })
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            },
        );
        let mut wm = wm?.entries;
        let mut cc: Vec<SampleEntry> = cc?.into_iter().flat_map(|c| c.entries).collect();
        let mut attempts = None;
        if params.method_for(n) == Method::Census {
            info!("n = {n}: census");
            let found = cached(&dir.join("census.tsv"), cfg.k, || {
                let c = census(n, &params, cfg.seed, wm.iter().chain(&cc).map(|e| &e.graph))?;
                let attempts = Some(c.attempts);
                Ok(Checkpoint { entries: c.wm.into_iter().chain(c.cc).collect(), attempts })
            })?;
            attempts = Some(found.attempts.ok_or_else(|| anyhow!("census checkpoint lacks an attempt count"))?);
            for e in found.entries {
                match e.source {
                    Source::Wm => wm.push(e),
                    Source::Cc => cc.push(e),
                }
            }
        }
        info!("n = {n}: merging and subsampling");
        out.push(assemble(n, &params, cfg.seed, wm, cc, attempts, &mut cache)?);
    }
    Ok(out)
}

/// Builds the library described by `cfg` and writes it to `cfg.out`.
pub fn build(cfg: &RunConfig) -> Result<Vec<SizeLibrary>> {
    if cfg.out.exists() && !cfg.out.is_dir() {
        bail!("{} is not a directory", cfg.out.display());
    }
    fs::create_dir_all(&cfg.out)?;
    let libs = build_sizes(cfg)?;
    write_library(&cfg.out, cfg, &libs)?;
    Ok(libs)
}
