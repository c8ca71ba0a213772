//! Resumable scan over a range of family primes, one record per line.
//!
//! Records already in `out` or `out.partial` are reused when they were made
//! with the same seed, effort, precision and congruence cutoff. Lines that
//! fail to parse, were made under other settings, or lie outside the range
//! are moved to `out.quarantine`. The rest is computed on a worker pool and
//! written in increasing `p` by a single writer into `out.partial`, which is
//! renamed to `out` at the end. Output is byte-identical for equal inputs.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;

use cubesum::arith::family_primes;
use cubesum::{compute_period, PeriodData};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::CliError;
use crate::record::{compute_record, RecordConfig, ResultRecord};

#[derive(Clone, Debug)]
pub struct ScanOptions {
    pub min: u64,
    pub max: u64,
    pub out: PathBuf,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
    pub config: RecordConfig,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ClassStats {
    pub residue: u8,
    pub primes: usize,
    /// Primes with `k ≥ 2`.
    pub two_rank_at_least_2: usize,
    pub fraction: f64,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ScanSummary {
    pub min: u64,
    pub max: u64,
    pub primes: usize,
    pub computed: usize,
    pub reused: usize,
    pub quarantined: usize,
    pub congruence_failures: Vec<u64>,
    pub errors: Vec<(u64, String)>,
    pub classes: Vec<ClassStats>,
}

impl ScanSummary {
    pub fn fraction(&self, residue: u8) -> Option<f64> {
        self.classes.iter().find(|c| c.residue == residue).map(|c| c.fraction)
    }
}

pub fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

struct Cache {
    records: HashMap<u64, ResultRecord>,
    quarantine: Vec<String>,
}

fn load_cache(paths: &[PathBuf], wanted: &HashSet<u64>, cfg: &RecordConfig) -> Result<Cache, CliError> {
    let mut cache = Cache { records: HashMap::new(), quarantine: Vec::new() };
    for path in paths {
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => continue,
            Err(e) => return Err(CliError::io(path, e)),
        };
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let reason = match ResultRecord::from_line(line) {
                Err(e) => Some(format!("unparseable ({e})")),
                Ok(r) if !wanted.contains(&r.p) => Some(format!("p = {} outside the scan range", r.p)),
                Ok(r) if !cfg.produced(&r) => Some(format!("p = {} made with other settings", r.p)),
                Ok(r) => {
                    cache.records.insert(r.p, r);
                    None
                }
            };
            if let Some(reason) = reason {
                eprintln!("warning: {}:{}: {reason}; quarantined", path.display(), i + 1);
                cache.quarantine.push(line.to_string());
            }
        }
    }
    Ok(cache)
}

fn summarize(records: &[ResultRecord]) -> Vec<ClassStats> {
    [2u8, 5]
        .iter()
        .map(|&residue| {
            let in_class: Vec<_> = records.iter().filter(|r| r.family_class == residue).collect();
            let hits = in_class.iter().filter(|r| r.two_rank >= 2).count();
            ClassStats {
                residue,
                primes: in_class.len(),
                two_rank_at_least_2: hits,
                fraction: if in_class.is_empty() { 0.0 } else { hits as f64 / in_class.len() as f64 },
            }
        })
        .collect()
}

pub fn run_scan(opts: &ScanOptions) -> Result<ScanSummary, CliError> {
    if !(3 < opts.min && opts.min < opts.max) {
        return Err(CliError::Usage(format!("scan range needs 3 < min < max, got {}..{}", opts.min, opts.max)));
    }
    let primes = family_primes(opts.min, opts.max);
    let wanted: HashSet<u64> = primes.iter().copied().collect();
    let partial = sibling(&opts.out, ".partial");
    let quarantine_path = sibling(&opts.out, ".quarantine");
    let cfg = &opts.config;

    let Cache { records: mut cached, quarantine } = load_cache(&[opts.out.clone(), partial.clone()], &wanted, cfg)?;
    if !quarantine.is_empty() {
        let mut q = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&quarantine_path)
            .map_err(|e| CliError::io(&quarantine_path, e))?;
        for line in &quarantine {
            writeln!(q, "{line}").map_err(|e| CliError::io(&quarantine_path, e))?;
        }
    }

    let missing: Vec<u64> = primes.iter().copied().filter(|p| !cached.contains_key(p)).collect();
    let reused = primes.len() - missing.len();
    let period: Option<PeriodData> = if missing.iter().any(|&p| p <= cfg.congruence_max) {
        Some(compute_period(cfg.precision_bits)?)
    } else {
        None
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("worker pool: {e}")))?;

    let file = File::create(&partial).map_err(|e| CliError::io(&partial, e))?;
    let mut writer = BufWriter::new(file);
    let mut written = Vec::with_capacity(primes.len());
    let mut errors = Vec::new();

    let (tx, rx) = mpsc::channel::<(u64, Result<ResultRecord, CliError>)>();
    std::thread::scope(|s| -> Result<(), CliError> {
        let period = period.as_ref();
        let missing = &missing;
        let pool = &pool;
        s.spawn(move || {
            pool.install(|| {
                missing.par_iter().for_each_with(tx, |tx, &p| {
                    let _ = tx.send((p, compute_record(p, cfg, period)));
                });
            });
        });

        // results arrive in any order; hold them until every smaller p is out
        let mut pending: BTreeMap<u64, Result<ResultRecord, CliError>> = BTreeMap::new();
        for &p in &primes {
            let result = match cached.remove(&p) {
                Some(r) => Ok(r),
                None => loop {
                    if let Some(r) = pending.remove(&p) {
                        break r;
                    }
                    match rx.recv() {
                        Ok((q, r)) => {
                            pending.insert(q, r);
                        }
                        Err(_) => break Err(CliError::Precision(format!("worker for p = {p} vanished"))),
                    }
                },
            };
            match result {
                Ok(r) => {
                    writeln!(writer, "{}", r.to_line()).map_err(|e| CliError::io(&partial, e))?;
                    writer.flush().map_err(|e| CliError::io(&partial, e))?;
                    written.push(r);
                }
                Err(e) => {
                    eprintln!("error: p = {p}: {e}");
                    errors.push((p, e.to_string()));
                }
            }
        }
        Ok(())
    })?;

    let file = writer.into_inner().map_err(|e| CliError::io(&partial, e.into_error()))?;
    file.sync_all().map_err(|e| CliError::io(&partial, e))?;
    drop(file);
    fs::rename(&partial, &opts.out).map_err(|e| CliError::io(&opts.out, e))?;

    Ok(ScanSummary {
        min: opts.min,
        max: opts.max,
        primes: primes.len(),
        computed: missing.len() - errors.len(),
        reused,
        quarantined: quarantine.len(),
        congruence_failures: written.iter().filter(|r| !r.passes()).map(|r| r.p).collect(),
        errors,
        classes: summarize(&written),
    })
}
