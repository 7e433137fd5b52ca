use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use kreglib_core::library::{
    cc_seed, merge_and_dedup, run_cc, subsample_bin, subsample_seed, wm_seed, BinAssigner, BinnedSample,
    PipelineParams, SampleEntry, SubsampleParams,
};
use kreglib_core::metrics::{known_quartic_count, population_estimate_log10, LogBase};
use kreglib_core::pairing::{wm_campaign, DEFAULT_MAX_ATTEMPTS};
use kreglib_core::stats::{describe, CvmNullCache};
use kreglib::records::{read_sample, write_edgelist, write_sample, write_sample_to};
use kreglib::{archive, report, ConfigError, RunConfig};

#[derive(Parser)]
#[command(name = "kreglib", version, about = "Generate and curate libraries of connected k-regular graphs")]
struct Cli {
    /// Log progress to standard error.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build-down walks from the cave chain.
    GenCc(GenCc),
    /// Uniform pairing-model campaign.
    GenUniform(GenUniform),
    /// Drop isomorphic duplicates from a sample file.
    Dedup {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Merge a WM and a CC sample, printing per-bin class counts.
    Merge {
        #[arg(long)]
        wm: PathBuf,
        #[arg(long)]
        cc: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Normality-driven subsampling of every bin of a sample file.
    Subsample(Subsample),
    /// Full pipeline into a library directory.
    Build(Build),
    /// Figure and table CSVs from a library directory.
    Report {
        #[arg(long)]
        lib: PathBuf,
        /// Defaults to <lib>/report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check every invariant of a library directory.
    Verify {
        #[arg(long)]
        lib: PathBuf,
    },
    /// Estimated number of non-isomorphic 4-regular graphs.
    Estimate {
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        n: Vec<usize>,
        #[arg(long, value_enum, default_value_t = Base::Natural)]
        base: Base,
    },
    /// Zip a library directory.
    Export {
        #[arg(long)]
        lib: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Unpack an exported archive.
    Import {
        #[arg(long)]
        archive: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Base {
    Natural,
    Ten,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Csv,
    Edgelist,
}

#[derive(Args)]
struct Output {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct GenCc {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Defaults to ceil(target / batch-cap).
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long, default_value_t = 20)]
    batch_cap: usize,
    #[arg(long, default_value_t = 500)]
    abort_limit: usize,
    #[arg(long, default_value_t = 1000)]
    target: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct GenUniform {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Defaults to per-bin-cap times the bin count.
    #[arg(long)]
    draws: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    per_bin_cap: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_ATTEMPTS)]
    max_attempts: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct Subsample {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 100)]
    batch_size: usize,
    #[arg(long, default_value_t = 10_000)]
    draws: usize,
    #[arg(long, default_value_t = 100_000)]
    max_draws: usize,
    #[arg(long, default_value_t = 0.999)]
    p_threshold: f64,
    #[arg(long, default_value_t = 10_000)]
    null_draws: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct Build {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    per_bin_target: Option<usize>,
    #[arg(long)]
    batch_cap: Option<usize>,
    #[arg(long)]
    abort_limit: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    draws: Option<usize>,
    #[arg(long)]
    max_draws: Option<usize>,
    #[arg(long)]
    p_threshold: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    wm_draws: Option<usize>,
    #[arg(long)]
    cc_runs: Option<usize>,
    #[arg(long)]
    null_draws: Option<usize>,
    #[arg(long)]
    pairing_attempts: Option<usize>,
    #[arg(long)]
    census_limit: Option<f64>,
    #[arg(long)]
    census_window: Option<u64>,
}

impl Build {
    fn config(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f.clone() { c.$f = v; } )* };
        }
        set!(n, k, per_bin_target, batch_cap, abort_limit, batch_size, draws, max_draws, p_threshold, seed, out);
        set!(null_draws, pairing_attempts, census_limit, census_window);
        if self.wm_draws.is_some() {
            c.wm_draws = self.wm_draws;
        }
        if self.cc_runs.is_some() {
            c.cc_runs = self.cc_runs;
        }
        c.validate()?;
        Ok(c)
    }
}

/// Failures that are the caller's fault exit with status 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct Usage(String);

/// A check that ran and failed; exit status 1.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct Invalid(String);

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn emit(output: &Output, entries: &[SampleEntry], assigner: &BinAssigner) -> Result<()> {
    match (&output.out, output.format) {
        (Some(p), Format::Csv) => write_sample(p, entries, assigner),
        (Some(p), Format::Edgelist) => Ok(write_edgelist(io::BufWriter::new(fs::File::create(p)?), entries)?),
        (None, Format::Edgelist) => Ok(write_edgelist(io::stdout().lock(), entries)?),
        (None, Format::Csv) => write_sample_to(io::stdout().lock(), entries, assigner),
    }
}

fn assigner_for(n: usize, k: usize) -> Result<BinAssigner> {
    if n <= k || (n * k) % 2 == 1 || k < 2 {
        return Err(usage(format!("no connected simple {k}-regular graph on {n} vertices")));
    }
    Ok(BinAssigner::new(n, k)?)
}

fn sample_of(path: &Path) -> Result<(BinAssigner, Vec<SampleEntry>)> {
    match read_sample(path)? {
        (Some((n, k)), entries) => Ok((BinAssigner::new(n, k)?, entries)),
        (None, _) => bail!("{} holds no graphs", path.display()),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenCc(a) => {
            let assigner = assigner_for(a.n, a.k)?;
            if a.batch_cap == 0 || a.batch_cap > a.target {
                return Err(usage("batch-cap must lie in 1..=target"));
            }
            let params = PipelineParams {
                k: a.k,
                per_bin_target: a.target,
                batch_cap: a.batch_cap,
                abort_limit: a.abort_limit,
                cc_runs: a.runs,
                ..PipelineParams::default()
            };
            let mut entries = Vec::new();
            for r in 0..params.cc_run_count() {
                log::info!("run {r} seed {}", cc_seed(a.seed, a.n, r));
                entries.extend(run_cc(a.n, &params, a.seed, r).map_err(|e| usage(e.to_string()))?.entries);
            }
            emit(&a.output, &entries, &assigner)
        }
        Command::GenUniform(a) => {
            let assigner = assigner_for(a.n, a.k)?;
            let draws = a.draws.unwrap_or(a.per_bin_cap * assigner.bin_count());
            let entries = wm_campaign(&assigner, draws, a.per_bin_cap, a.max_attempts, wm_seed(a.seed, a.n))?;
            emit(&a.output, &entries, &assigner)
        }
        Command::Dedup { input, out } => {
            let (assigner, entries) = sample_of(&input)?;
            let deduped = BinnedSample::from_entries(assigner, entries)?.dedup();
            let flat: Vec<SampleEntry> = deduped.into_bins().into_iter().flatten().collect();
            write_sample(&out, &flat, &assigner)
        }
        Command::Merge { wm, cc, out } => {
            let (a, wm) = sample_of(&wm)?;
            let (b, cc) = sample_of(&cc)?;
            let (merged, counts) = merge_and_dedup(&BinnedSample::from_entries(a, wm)?, &BinnedSample::from_entries(b, cc)?)
                .map_err(|e| usage(e.to_string()))?;
            let mut stdout = io::stdout().lock();
            writeln!(stdout, "bin_index,wm_noniso,cc_noniso,overlap,merged")?;
            for (i, c) in counts.iter().enumerate() {
                writeln!(stdout, "{i},{},{},{},{}", c.wm_noniso, c.cc_noniso, c.overlap, c.merged)?;
            }
            let flat: Vec<SampleEntry> = merged.into_bins().into_iter().flatten().collect();
            write_sample(&out, &flat, &a)
        }
        Command::Subsample(a) => {
            if a.batch_size == 0 || a.max_draws < a.draws || !(a.p_threshold > 0.0 && a.p_threshold <= 1.0) {
                return Err(usage("need batch-size > 0, max-draws >= draws and p-threshold in (0, 1]"));
            }
            let (assigner, entries) = sample_of(&a.input)?;
            let binned = BinnedSample::from_entries(assigner, entries)?;
            let params = SubsampleParams { batch_size: a.batch_size, draws: a.draws, max_draws: a.max_draws, p_threshold: a.p_threshold };
            let mut cache = PipelineParams { null_draws: a.null_draws, ..PipelineParams::default() }.null_cache(a.seed);
            let mut kept = Vec::new();
            let mut stdout = io::stdout().lock();
            writeln!(stdout, "bin_index,merged,final,draws,merged_cvm_p,final_cvm_p")?;
            for (i, bin) in binned.bins().iter().enumerate() {
                if bin.is_empty() {
                    continue;
                }
                let values: Vec<f64> = bin.iter().map(|e| e.mean_distance).collect();
                let out = subsample_bin(&values, &params, &mut cache, subsample_seed(a.seed, assigner.n(), i));
                let chosen: Vec<f64> = out.selected.iter().map(|&j| values[j]).collect();
                let p = |v: &[f64], c: &mut CvmNullCache| describe(v, c).ok().and_then(|m| m.cvm_p).map_or(String::new(), |p| format!("{p:.4}"));
                let (before, after) = (p(&values, &mut cache), p(&chosen, &mut cache));
                writeln!(stdout, "{i},{},{},{},{before},{after}", bin.len(), chosen.len(), out.draws)?;
                kept.extend(out.selected.iter().map(|&j| bin[j].clone()));
            }
            write_sample(&a.out, &kept, &assigner)
        }
        Command::Build(b) => {
            let cfg = b.config().map_err(|e| usage(format!("{e:#}")))?;
            let libs = kreglib::build(&cfg)?;
            let mut stdout = io::stdout().lock();
            writeln!(stdout, "n,bins,occupied,merged,final,overlap")?;
            for l in &libs {
                writeln!(stdout, "{},{},{},{},{},{}", l.n, l.assigner.bin_count(), l.occupied_bins(), l.merged_size(), l.final_size(), l.overlap())?;
            }
            Ok(())
        }
        Command::Report { lib, out } => {
            let out = out.unwrap_or_else(|| lib.join("report"));
            for p in report::write_report(&lib, &out)? {
                println!("{}", p.display());
            }
            Ok(())
        }
        Command::Verify { lib } => {
            let f = kreglib::verify_library(&lib)?;
            for p in &f.problems {
                eprintln!("{p}");
            }
            if !f.ok() {
                return Err(Invalid(format!("{} problem(s) in {}", f.problems.len(), lib.display())).into());
            }
            println!("ok: {} graphs", f.graphs);
            Ok(())
        }
        Command::Estimate { n, base } => {
            let base = match base {
                Base::Natural => LogBase::Natural,
                Base::Ten => LogBase::Ten,
            };
            let ns = if n.is_empty() { (6..=50).collect() } else { n };
            let mut stdout = io::stdout().lock();
            writeln!(stdout, "n,log10_estimate,estimate,known")?;
            for n in ns {
                if n < 6 {
                    return Err(usage(format!("the estimate needs n >= 6, got {n}")));
                }
                let l = population_estimate_log10(n, base);
                let known = known_quartic_count(n).map_or(String::new(), |c| c.to_string());
                writeln!(stdout, "{n},{l:.3},{:.3e},{known}", 10f64.powf(l))?;
            }
            Ok(())
        }
        Command::Export { lib, out } => {
            let count = archive::export_library(&lib, &out)?;
            println!("{count} files written to {}", out.display());
            Ok(())
        }
        Command::Import { archive: a, out } => {
            let files = archive::import_library(&a, &out)?;
            println!("{} files extracted to {}", files.len(), out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<Usage>() || e.is::<ConfigError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
