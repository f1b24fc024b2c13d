//! Randomized counterexample search for the weighted conjecture: seeded
//! sweeps over (dimension, t) cells plus gradient-free local refinement of
//! the worst candidates, with an append-only JSONL record stream that makes
//! interrupted runs resumable.
//!
//! Determinism contract: trial `i` of cell `(n, t)` draws from a ChaCha
//! stream derived from `(seed, n-index, t-index, i)`, so a split run
//! evaluates exactly the same instances as a single run with the same total
//! budget, regardless of scheduling.

use std::collections::{BTreeMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generate::{derive_rng, random_pair_from_rng};
use crate::linalg::{identity, psd_sqrt, scale_mat, HermitianMatrix, Mat, PsdMatrix};
use crate::matfile::MatrixFile;
use crate::suite::{check_conjecture, InequalityInstance};

/// Near-violation margins below `1e-3 * scale` are persisted for study even
/// when nonnegative.
const NEAR_MISS_FACTOR: f64 = 1e-3;

/// Stream id namespace for refinement walks, disjoint from trial streams.
const REFINE_STREAM_BASE: u64 = 1 << 63;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchConfig {
    pub dims: Vec<usize>,
    pub t_grid: Vec<f64>,
    pub trials_per_cell: u64,
    pub refine_steps: usize,
    /// How many of the worst cell minima get a refinement walk.
    pub refine_top: usize,
    pub step_scale: f64,
    pub seed: u64,
    /// Violation threshold factor: a margin below `-tol_factor * scale` is a
    /// candidate violation.
    pub tol_factor: f64,
    pub out_path: Option<PathBuf>,
}

impl SearchConfig {
    /// The default acceptance budget: n in 2..=8, the 11-point t-grid,
    /// 500 trials per cell, 200 refinement steps on the 10 worst candidates.
    pub fn default_budget(seed: u64) -> Self {
        Self {
            dims: (2..=8).collect(),
            t_grid: default_t_grid(),
            trials_per_cell: 500,
            refine_steps: 200,
            refine_top: 10,
            step_scale: 0.05,
            seed,
            tol_factor: 1e-9,
            out_path: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.t_grid.is_empty() {
            return Err(Error::InvalidArgument(
                "search needs at least one dimension and one t value".into(),
            ));
        }
        if self.dims.iter().any(|&n| n == 0) {
            return Err(Error::InvalidArgument("dimensions must be >= 1".into()));
        }
        if self.t_grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::InvalidArgument(
                "t grid must lie inside [0, 1]".into(),
            ));
        }
        if self.dims.len() > 255 || self.t_grid.len() > 255 {
            return Err(Error::InvalidArgument(
                "at most 255 dimensions and t values are supported".into(),
            ));
        }
        Ok(())
    }
}

/// `{0, 0.1, ..., 1.0}`; always contains 0.5.
pub fn default_t_grid() -> Vec<f64> {
    (0..=10).map(|k| k as f64 / 10.0).collect()
}

/// Normalizes a user grid to the sweep convention: sorted, deduplicated,
/// 0.5 always included.
pub fn normalize_t_grid(mut grid: Vec<f64>) -> Vec<f64> {
    if !grid.iter().any(|&t| t == 0.5) {
        grid.push(0.5);
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    grid
}

#[derive(Debug, Clone)]
pub struct Candidate {
    pub n: usize,
    pub t: f64,
    /// 1-based index of the worst margin.
    pub j: usize,
    pub margin: f64,
    /// Stream id that regenerates (or seeded the walk towards) the instance.
    pub seed: u64,
    pub refined: bool,
    pub a: Mat,
    pub b: Mat,
}

impl Candidate {
    pub fn record(&self) -> CandidateRecord {
        CandidateRecord {
            n: self.n,
            t: self.t,
            j: self.j,
            margin: self.margin,
            seed: self.seed,
            refined: self.refined,
            a: MatrixFile::from_matrix(&self.a),
            b: MatrixFile::from_matrix(&self.b),
        }
    }

    /// Re-evaluates the conjecture margin at the stored index.
    pub fn recompute_margin(&self) -> Result<f64> {
        let inst = InequalityInstance::new(
            PsdMatrix::from_matrix(self.a.clone())?,
            PsdMatrix::from_matrix(self.b.clone())?,
            self.t,
        )?;
        let r = check_conjecture(&inst)?;
        Ok(r.margins[self.j - 1])
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CandidateRecord {
    pub n: usize,
    pub t: f64,
    pub j: usize,
    pub margin: f64,
    pub seed: u64,
    pub refined: bool,
    pub a: MatrixFile,
    pub b: MatrixFile,
}

impl CandidateRecord {
    pub fn to_candidate(&self) -> Result<Candidate> {
        Ok(Candidate {
            n: self.n,
            t: self.t,
            j: self.j,
            margin: self.margin,
            seed: self.seed,
            refined: self.refined,
            a: self.a.to_matrix()?,
            b: self.b.to_matrix()?,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellSummary {
    pub n: usize,
    pub t: f64,
    pub trials: u64,
    pub min_margin: f64,
    /// 1-based worst index at the minimum.
    pub min_j: usize,
    /// Trial that achieved the minimum (for regeneration).
    pub min_trial: u64,
    pub skipped: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchReport {
    pub seed: u64,
    pub cells_run: usize,
    pub trials_total: u64,
    pub min_margin_overall: f64,
    pub cells: Vec<CellSummary>,
    /// Candidates below `-tol_factor * scale`: actual conjecture violations.
    pub violations: Vec<CandidateRecord>,
    /// All persisted candidates (near misses and refined walks included).
    pub candidates: Vec<CandidateRecord>,
    pub wall_time_secs: f64,
}

impl SearchReport {
    /// Content equality ignoring wall time, for reproducibility checks.
    pub fn same_results(&self, other: &Self) -> bool {
        self.seed == other.seed
            && self.cells_run == other.cells_run
            && self.trials_total == other.trials_total
            && self.min_margin_overall == other.min_margin_overall
            && serde_json::to_string(&self.cells).unwrap()
                == serde_json::to_string(&other.cells).unwrap()
            && serde_json::to_string(&self.violations).unwrap()
                == serde_json::to_string(&other.violations).unwrap()
            && serde_json::to_string(&self.candidates).unwrap()
                == serde_json::to_string(&other.candidates).unwrap()
    }
}

// ---------------------------------------------------------------------------
// Record stream
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Record {
    Meta {
        seed: u64,
        dims: Vec<usize>,
        t_grid: Vec<f64>,
        tol_factor: f64,
        refine_steps: usize,
        refine_top: usize,
        step_scale: f64,
    },
    Cell {
        n: usize,
        n_index: usize,
        t: f64,
        t_index: usize,
        trials_done: u64,
        min_margin: f64,
        min_j: usize,
        min_trial: u64,
        skipped: u64,
    },
    Candidate(CandidateRecord),
}

struct Appender {
    file: Option<File>,
}

impl Appender {
    fn create(path: Option<&Path>) -> Result<Self> {
        let file = match path {
            Some(p) => Some(File::create(p)?),
            None => None,
        };
        Ok(Self { file })
    }

    fn append(path: Option<&Path>) -> Result<Self> {
        let file = match path {
            Some(p) => Some(OpenOptions::new().create(true).append(true).open(p)?),
            None => None,
        };
        Ok(Self { file })
    }

    fn write(&mut self, record: &Record) -> Result<()> {
        if let Some(f) = &mut self.file {
            let line =
                serde_json::to_string(record).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

fn read_records(path: &Path, salvage: bool) -> Result<Vec<Record>> {
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Record>(&line) {
            Ok(r) => out.push(r),
            Err(e) => {
                if salvage {
                    break;
                }
                return Err(Error::CorruptRecord {
                    line: idx + 1,
                    detail: e.to_string(),
                });
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Sweep
// ---------------------------------------------------------------------------

fn trial_stream(n_index: usize, t_index: usize, trial: u64) -> u64 {
    ((n_index as u64 + 1) << 48) | ((t_index as u64) << 40) | trial
}

struct CellProgress {
    trials_done: u64,
    min_margin: f64,
    min_j: usize,
    min_trial: u64,
    skipped: u64,
}

struct TrialOutcome {
    margin: f64,
    j: usize,
    scale: f64,
    skipped: bool,
}

fn run_trial(cfg: &SearchConfig, n: usize, t: f64, stream: u64) -> TrialOutcome {
    let mut rng = derive_rng(cfg.seed, stream);
    let evaluated = random_pair_from_rng(n, &mut rng, true).and_then(|(a, b)| {
        let inst = InequalityInstance::new(a, b, t)?;
        let result = check_conjecture(&inst)?;
        Ok((inst, result))
    });
    match evaluated {
        Ok((inst, result)) => {
            let (j0, &margin) = result
                .margins
                .iter()
                .enumerate()
                .min_by(|x, y| x.1.partial_cmp(y.1).unwrap())
                .expect("nonempty margins");
            TrialOutcome {
                margin,
                j: j0 + 1,
                scale: inst.scale(),
                skipped: false,
            }
        }
        Err(_) => TrialOutcome {
            margin: f64::INFINITY,
            j: 1,
            scale: 1.0,
            skipped: true,
        },
    }
}

/// Rebuilds the candidate evaluated at `(cell, trial)` from its stream.
fn regenerate_candidate(
    cfg: &SearchConfig,
    n: usize,
    t: f64,
    stream: u64,
    margin: f64,
    j: usize,
) -> Result<Candidate> {
    let mut rng = derive_rng(cfg.seed, stream);
    let (a, b) = random_pair_from_rng(n, &mut rng, true)?;
    Ok(Candidate {
        n,
        t,
        j,
        margin,
        seed: stream,
        refined: false,
        a: a.matrix().clone(),
        b: b.matrix().clone(),
    })
}

fn is_violation(cfg: &SearchConfig, c: &Candidate) -> bool {
    let scale = 1.0
        + c.a.iter().map(|z| z.norm()).fold(0.0f64, f64::max)
        + c.b.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    // Entry max underestimates the spectral norm; recompute properly from
    // the certificate when the margin is at all close.
    if c.margin >= 0.0 {
        return false;
    }
    let exact_scale = match (
        PsdMatrix::from_matrix(c.a.clone()),
        PsdMatrix::from_matrix(c.b.clone()),
    ) {
        (Ok(a), Ok(b)) => 1.0 + a.norm2() + b.norm2(),
        _ => scale,
    };
    c.margin < -cfg.tol_factor * exact_scale
}

/// Fresh randomized sweep over all `(n, t)` cells; truncates and rewrites
/// the record stream when an output path is configured.
pub fn random_sweep(cfg: &SearchConfig) -> Result<SearchReport> {
    cfg.validate()?;
    let mut appender = Appender::create(cfg.out_path.as_deref())?;
    appender.write(&meta_record(cfg))?;
    sweep_from(cfg, BTreeMap::new(), Vec::new(), appender)
}

/// Continues a previous sweep from the record stream at `cfg.out_path`,
/// evaluating only the trials beyond each cell's recorded progress. The
/// union equals a single run with the same total budget.
pub fn resume_sweep(cfg: &SearchConfig) -> Result<SearchReport> {
    cfg.validate()?;
    let path = cfg.out_path.as_deref().ok_or_else(|| {
        Error::InvalidArgument("resume requires an output path".into())
    })?;
    if !path.exists() {
        return random_sweep(cfg);
    }
    let records = read_records(path, false)?;
    if records.is_empty() {
        let mut appender = Appender::append(Some(path))?;
        appender.write(&meta_record(cfg))?;
        return sweep_from(cfg, BTreeMap::new(), Vec::new(), appender);
    }
    let (progress, candidates) = replay(cfg, &records)?;
    let appender = Appender::append(Some(path))?;
    sweep_from(cfg, progress, candidates, appender)
}

/// Reconstructs a report from a record stream without running any trials.
/// With `salvage` set, a corrupt record truncates the stream to its valid
/// prefix instead of failing.
pub fn load_report(path: &Path, salvage: bool) -> Result<SearchReport> {
    let records = read_records(path, salvage)?;
    let meta = records
        .iter()
        .find_map(|r| match r {
            Record::Meta {
                seed,
                dims,
                t_grid,
                tol_factor,
                refine_steps,
                refine_top,
                step_scale,
            } => Some(SearchConfig {
                dims: dims.clone(),
                t_grid: t_grid.clone(),
                trials_per_cell: 0,
                refine_steps: *refine_steps,
                refine_top: *refine_top,
                step_scale: *step_scale,
                seed: *seed,
                tol_factor: *tol_factor,
                out_path: None,
            }),
            _ => None,
        })
        .ok_or_else(|| Error::InvalidArgument("record stream has no meta record".into()))?;
    let (progress, candidates) = replay(&meta, &records)?;
    assemble_report(&meta, &progress, candidates, 0.0)
}

/// Writes a complete record stream for an already-computed report.
pub fn persist_report(cfg: &SearchConfig, report: &SearchReport, path: &Path) -> Result<()> {
    let mut appender = Appender::create(Some(path))?;
    appender.write(&meta_record(cfg))?;
    for (idx, cell) in report.cells.iter().enumerate() {
        let n_index = cfg.dims.iter().position(|&n| n == cell.n).unwrap_or(idx);
        let t_index = cfg
            .t_grid
            .iter()
            .position(|&t| t == cell.t)
            .unwrap_or(idx);
        appender.write(&Record::Cell {
            n: cell.n,
            n_index,
            t: cell.t,
            t_index,
            trials_done: cell.trials,
            min_margin: cell.min_margin,
            min_j: cell.min_j,
            min_trial: cell.min_trial,
            skipped: cell.skipped,
        })?;
    }
    for c in &report.candidates {
        if !c.refined {
            appender.write(&Record::Candidate(c.clone()))?;
        }
    }
    Ok(())
}

fn meta_record(cfg: &SearchConfig) -> Record {
    Record::Meta {
        seed: cfg.seed,
        dims: cfg.dims.clone(),
        t_grid: cfg.t_grid.clone(),
        tol_factor: cfg.tol_factor,
        refine_steps: cfg.refine_steps,
        refine_top: cfg.refine_top,
        step_scale: cfg.step_scale,
    }
}

/// Replays a record stream into per-cell progress plus the recorded sweep
/// candidates; validates stream/config compatibility.
fn replay(
    cfg: &SearchConfig,
    records: &[Record],
) -> Result<(BTreeMap<(usize, usize), CellProgress>, Vec<CandidateRecord>)> {
    let mut progress: BTreeMap<(usize, usize), CellProgress> = BTreeMap::new();
    let mut candidates: Vec<CandidateRecord> = Vec::new();
    let mut seen = HashSet::new();
    for record in records {
        match record {
            Record::Meta {
                seed,
                dims,
                t_grid,
                ..
            } => {
                if *seed != cfg.seed || dims != &cfg.dims || t_grid != &cfg.t_grid {
                    return Err(Error::InvalidArgument(
                        "record stream was produced with a different seed or grid".into(),
                    ));
                }
            }
            Record::Cell {
                n_index,
                t_index,
                trials_done,
                min_margin,
                min_j,
                min_trial,
                skipped,
                ..
            } => {
                let entry = progress.entry((*n_index, *t_index));
                let cp = CellProgress {
                    trials_done: *trials_done,
                    min_margin: *min_margin,
                    min_j: *min_j,
                    min_trial: *min_trial,
                    skipped: *skipped,
                };
                match entry {
                    std::collections::btree_map::Entry::Vacant(v) => {
                        v.insert(cp);
                    }
                    std::collections::btree_map::Entry::Occupied(mut o) => {
                        if cp.trials_done >= o.get().trials_done {
                            o.insert(cp);
                        }
                    }
                }
            }
            Record::Candidate(c) => {
                if c.refined {
                    continue;
                }
                let key = serde_json::to_string(c)
                    .map_err(|e| Error::InvalidArgument(e.to_string()))?;
                if seen.insert(key) {
                    candidates.push(c.clone());
                }
            }
        }
    }
    Ok((progress, candidates))
}

fn sweep_from(
    cfg: &SearchConfig,
    mut progress: BTreeMap<(usize, usize), CellProgress>,
    mut candidates: Vec<CandidateRecord>,
    mut appender: Appender,
) -> Result<SearchReport> {
    let start = Instant::now();
    let mut seen: HashSet<String> = candidates
        .iter()
        .map(|c| serde_json::to_string(c).unwrap())
        .collect();

    for (n_index, &n) in cfg.dims.iter().enumerate() {
        for (t_index, &t) in cfg.t_grid.iter().enumerate() {
            let key = (n_index, t_index);
            let existing = progress.get(&key);
            let done = existing.map(|p| p.trials_done).unwrap_or(0);
            if done >= cfg.trials_per_cell {
                continue;
            }
            let mut min_margin = existing.map(|p| p.min_margin).unwrap_or(f64::INFINITY);
            let mut min_j = existing.map(|p| p.min_j).unwrap_or(1);
            let mut min_trial = existing.map(|p| p.min_trial).unwrap_or(0);
            let mut skipped = existing.map(|p| p.skipped).unwrap_or(0);
            let mut violations: Vec<(u64, f64, usize)> = Vec::new();

            for trial in done..cfg.trials_per_cell {
                let stream = trial_stream(n_index, t_index, trial);
                let outcome = run_trial(cfg, n, t, stream);
                if outcome.skipped {
                    skipped += 1;
                    continue;
                }
                if outcome.margin < min_margin {
                    min_margin = outcome.margin;
                    min_j = outcome.j;
                    min_trial = trial;
                }
                if outcome.margin < -cfg.tol_factor * outcome.scale {
                    violations.push((trial, outcome.margin, outcome.j));
                }
            }

            // Only outright violations enter the stream: the violation set
            // grows monotonically with the budget, so split runs and single
            // runs persist identical records. Near misses are derived from
            // the final cell minima at report time.
            for (trial, margin, j) in violations {
                let stream = trial_stream(n_index, t_index, trial);
                let cand = regenerate_candidate(cfg, n, t, stream, margin, j)?;
                let rec = cand.record();
                let k = serde_json::to_string(&rec)
                    .map_err(|e| Error::InvalidArgument(e.to_string()))?;
                if seen.insert(k) {
                    appender.write(&Record::Candidate(rec.clone()))?;
                    candidates.push(rec);
                }
            }

            appender.write(&Record::Cell {
                n,
                n_index,
                t,
                t_index,
                trials_done: cfg.trials_per_cell,
                min_margin,
                min_j,
                min_trial,
                skipped,
            })?;
            progress.insert(
                key,
                CellProgress {
                    trials_done: cfg.trials_per_cell,
                    min_margin,
                    min_j,
                    min_trial,
                    skipped,
                },
            );
        }
    }

    assemble_report(cfg, &progress, candidates, start.elapsed().as_secs_f64())
}

/// Builds the final report: cell table, refinement of the worst minima, and
/// the violation list.
fn assemble_report(
    cfg: &SearchConfig,
    progress: &BTreeMap<(usize, usize), CellProgress>,
    sweep_candidates: Vec<CandidateRecord>,
    wall_time_secs: f64,
) -> Result<SearchReport> {
    let mut cells = Vec::new();
    for (&(n_index, t_index), p) in progress {
        let n = cfg.dims.get(n_index).copied().unwrap_or(0);
        let t = cfg.t_grid.get(t_index).copied().unwrap_or(0.0);
        cells.push(CellSummary {
            n,
            t,
            trials: p.trials_done,
            min_margin: p.min_margin,
            min_j: p.min_j,
            min_trial: p.min_trial,
            skipped: p.skipped,
        });
    }

    let mut candidates = sweep_candidates;
    let mut seen: HashSet<String> = candidates
        .iter()
        .map(|c| serde_json::to_string(c).unwrap())
        .collect();

    // Near misses: each cell whose minimum margin falls below the
    // `1e-3 * scale` study threshold contributes its worst instance,
    // regenerated from the trial stream.
    let mut near_misses = Vec::new();
    for cell in &cells {
        if cell.trials == 0 || !cell.min_margin.is_finite() {
            continue;
        }
        let n_index = match cfg.dims.iter().position(|&n| n == cell.n) {
            Some(i) => i,
            None => continue,
        };
        let t_index = match cfg.t_grid.iter().position(|&t| t == cell.t) {
            Some(i) => i,
            None => continue,
        };
        let stream = trial_stream(n_index, t_index, cell.min_trial);
        let cand = regenerate_candidate(cfg, cell.n, cell.t, stream, cell.min_margin, cell.min_j)?;
        let scale = 1.0
            + PsdMatrix::from_matrix(cand.a.clone())?.norm2()
            + PsdMatrix::from_matrix(cand.b.clone())?.norm2();
        if cand.margin < NEAR_MISS_FACTOR * scale {
            let rec = cand.record();
            let key =
                serde_json::to_string(&rec).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            if seen.insert(key) {
                near_misses.push(rec);
            }
        }
    }
    candidates.extend(near_misses);

    // Refinement walks on the worst cell minima, in deterministic order.
    if cfg.refine_steps > 0 && cfg.refine_top > 0 {
        let mut order: Vec<usize> = (0..cells.len())
            .filter(|&i| cells[i].min_margin.is_finite() && cells[i].trials > 0)
            .collect();
        order.sort_by(|&x, &y| {
            cells[x]
                .min_margin
                .partial_cmp(&cells[y].min_margin)
                .unwrap()
        });
        for (rank, &ci) in order.iter().take(cfg.refine_top).enumerate() {
            let cell = &cells[ci];
            let n_index = cfg.dims.iter().position(|&n| n == cell.n).unwrap();
            let t_index = cfg
                .t_grid
                .iter()
                .position(|&t| t == cell.t)
                .unwrap();
            let stream = trial_stream(n_index, t_index, cell.min_trial);
            let mut rng = derive_rng(cfg.seed, stream);
            let (a, b) = random_pair_from_rng(cell.n, &mut rng, true)?;
            let base = Candidate {
                n: cell.n,
                t: cell.t,
                j: cell.min_j,
                margin: cell.min_margin,
                seed: stream,
                refined: false,
                a: a.matrix().clone(),
                b: b.matrix().clone(),
            };
            let refined = refine(
                &base,
                cfg.refine_steps,
                cfg.step_scale,
                REFINE_STREAM_BASE | rank as u64,
            )?;
            if refined.refined {
                candidates.push(refined.record());
            }
        }
    }

    let mut min_margin_overall = cells
        .iter()
        .map(|c| c.min_margin)
        .fold(f64::INFINITY, f64::min);
    for c in &candidates {
        min_margin_overall = min_margin_overall.min(c.margin);
    }

    let violations: Vec<CandidateRecord> = candidates
        .iter()
        .filter(|c| {
            c.to_candidate()
                .map(|cand| is_violation(cfg, &cand))
                .unwrap_or(false)
        })
        .cloned()
        .collect();

    Ok(SearchReport {
        seed: cfg.seed,
        cells_run: cells.len(),
        trials_total: cells.iter().map(|c| c.trials).sum(),
        min_margin_overall,
        cells,
        violations,
        candidates,
        wall_time_secs,
    })
}

// ---------------------------------------------------------------------------
// Refinement
// ---------------------------------------------------------------------------

/// Gradient-free local minimization of the worst conjecture margin.
///
/// The pair is reparameterized as `A = G_A G_A* + delta I` (always PD), and
/// Gaussian perturbations of `(G_A, G_B, t)` with geometrically decaying
/// step size are accepted when the minimum margin decreases. The returned
/// margin is never above the input margin; a walk that finds nothing better
/// returns the input unchanged.
pub fn refine(candidate: &Candidate, steps: usize, step_scale: f64, seed: u64) -> Result<Candidate> {
    if steps == 0 {
        return Ok(candidate.clone());
    }
    let a0 = PsdMatrix::from_matrix(candidate.a.clone())?;
    let b0 = PsdMatrix::from_matrix(candidate.b.clone())?;
    let scale = 1.0 + a0.norm2() + b0.norm2();
    let delta = 1e-10 * scale;

    let mut ga = psd_sqrt(&a0)?.matrix().clone();
    let mut gb = psd_sqrt(&b0)?.matrix().clone();
    let mut t = candidate.t;

    let evaluate = |ga: &Mat, gb: &Mat, t: f64| -> Result<(f64, usize, Mat, Mat)> {
        let n = ga.nrows();
        let shift = scale_mat(&identity(n), delta);
        let a = HermitianMatrix::new(ga * ga.adjoint() + &shift)?;
        let b = HermitianMatrix::new(gb * gb.adjoint() + &shift)?;
        let inst = InequalityInstance::new(PsdMatrix::new(a)?, PsdMatrix::new(b)?, t)?;
        let result = check_conjecture(&inst)?;
        let (j0, &margin) = result
            .margins
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.partial_cmp(y.1).unwrap())
            .expect("nonempty margins");
        Ok((
            margin,
            j0 + 1,
            inst.a().matrix().clone(),
            inst.b().matrix().clone(),
        ))
    };

    let mut best = candidate.clone();
    let (mut walk_margin, ..) = evaluate(&ga, &gb, t)?;
    let mut rng = derive_rng(seed, 0);

    for step in 0..steps {
        let decay = 0.95f64.powi(step as i32);
        let magnitude = step_scale * decay;
        let which: u8 = rng.gen_range(0..3);
        let (cand_ga, cand_gb, cand_t) = match which {
            0 => (perturb(&ga, magnitude, &mut rng), gb.clone(), t),
            1 => (ga.clone(), perturb(&gb, magnitude, &mut rng), t),
            _ => {
                let dt: f64 = StandardNormal.sample(&mut rng);
                (ga.clone(), gb.clone(), (t + dt * magnitude).clamp(0.0, 1.0))
            }
        };
        let (margin, j, a_mat, b_mat) = match evaluate(&cand_ga, &cand_gb, cand_t) {
            Ok(v) => v,
            Err(_) => continue,
        };
        if margin < walk_margin {
            walk_margin = margin;
            ga = cand_ga;
            gb = cand_gb;
            t = cand_t;
            if margin < best.margin {
                best = Candidate {
                    n: candidate.n,
                    t: cand_t,
                    j,
                    margin,
                    seed: candidate.seed,
                    refined: true,
                    a: a_mat,
                    b: b_mat,
                };
            }
        }
    }

    Ok(best)
}

fn perturb(g: &Mat, magnitude: f64, rng: &mut ChaCha8Rng) -> Mat {
    let (rows, cols) = g.shape();
    let base = 1.0 + g.norm() / (rows.max(1) as f64);
    let sd = magnitude * base;
    let mut out = g.clone();
    for i in 0..rows {
        for j in 0..cols {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            out[(i, j)] += num_complex::Complex64::new(re * sd, im * sd);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::diag_real;

    fn tiny_config(seed: u64, out: Option<PathBuf>) -> SearchConfig {
        SearchConfig {
            dims: vec![2, 3],
            t_grid: vec![0.0, 0.5, 1.0],
            trials_per_cell: 6,
            refine_steps: 5,
            refine_top: 2,
            step_scale: 0.05,
            seed,
            tol_factor: 1e-9,
            out_path: out,
        }
    }

    #[test]
    fn sweep_is_deterministic() {
        let cfg = tiny_config(7, None);
        let r1 = random_sweep(&cfg).unwrap();
        let r2 = random_sweep(&cfg).unwrap();
        assert!(r1.same_results(&r2));
        assert_eq!(r1.cells_run, 6);
        assert_eq!(r1.trials_total, 36);
        assert!(r1.min_margin_overall >= -1e-9 * 100.0);
    }

    #[test]
    fn t_zero_grid_has_zero_margins() {
        let cfg = SearchConfig {
            t_grid: vec![0.0],
            ..tiny_config(3, None)
        };
        let report = random_sweep(&cfg).unwrap();
        assert!(report.violations.is_empty());
        for cell in &report.cells {
            assert!(cell.min_margin.abs() < 1e-8, "cell margin {}", cell.min_margin);
        }
    }

    #[test]
    fn split_resume_matches_single_run() {
        let dir = std::env::temp_dir().join(format!("matineq-search-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("stream.jsonl");

        let full = random_sweep(&tiny_config(11, None)).unwrap();

        let mut part = tiny_config(11, Some(path.clone()));
        part.trials_per_cell = 4;
        random_sweep(&part).unwrap();
        let mut rest = tiny_config(11, Some(path.clone()));
        rest.trials_per_cell = 6;
        let resumed = resume_sweep(&rest).unwrap();

        assert!(full.same_results(&resumed));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn resume_with_no_new_trials_is_identical() {
        let dir = std::env::temp_dir().join(format!("matineq-search2-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("stream.jsonl");

        let cfg = tiny_config(13, Some(path.clone()));
        let first = random_sweep(&cfg).unwrap();
        let second = resume_sweep(&cfg).unwrap();
        assert!(first.same_results(&second));

        let loaded = load_report(&path, false).unwrap();
        assert!(first.same_results(&loaded));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn resume_empty_file_is_fresh() {
        let dir = std::env::temp_dir().join(format!("matineq-search3-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("stream.jsonl");
        std::fs::write(&path, "").unwrap();

        let cfg = tiny_config(17, Some(path.clone()));
        let resumed = resume_sweep(&cfg).unwrap();
        let fresh = random_sweep(&tiny_config(17, None)).unwrap();
        assert!(resumed.same_results(&fresh));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn corrupt_record_is_positioned_and_salvageable() {
        let dir = std::env::temp_dir().join(format!("matineq-search4-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("stream.jsonl");

        let cfg = tiny_config(19, Some(path.clone()));
        random_sweep(&cfg).unwrap();
        let mut text = std::fs::read_to_string(&path).unwrap();
        text.push_str("{ this is not json\n");
        std::fs::write(&path, &text).unwrap();

        match load_report(&path, false) {
            Err(Error::CorruptRecord { line, .. }) => {
                assert!(line > 1);
            }
            other => panic!("expected corrupt record error, got {other:?}"),
        }
        let salvaged = load_report(&path, true).unwrap();
        assert_eq!(salvaged.cells_run, 6);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn refine_is_monotone_and_deterministic() {
        let a = diag_real(&[1.0, 2.0]);
        let b = diag_real(&[2.0, 1.0]);
        let base = Candidate {
            n: 2,
            t: 0.5,
            j: 1,
            margin: 1.0,
            seed: 0,
            refined: false,
            a,
            b,
        };
        let r1 = refine(&base, 30, 0.1, 5).unwrap();
        let r2 = refine(&base, 30, 0.1, 5).unwrap();
        assert!(r1.margin <= base.margin);
        assert!((0.0..=1.0).contains(&r1.t));
        assert_eq!(r1.margin, r2.margin);
        assert_eq!(r1.a, r2.a);

        let none = refine(&base, 0, 0.1, 5).unwrap();
        assert_eq!(none.margin, base.margin);
        assert!(!none.refined || none.margin < base.margin);
    }

    #[test]
    fn candidate_margins_recompute() {
        let cfg = tiny_config(23, None);
        let report = random_sweep(&cfg).unwrap();
        for rec in report.candidates.iter().take(3) {
            let cand = rec.to_candidate().unwrap();
            let again = cand.recompute_margin().unwrap();
            assert!((again - cand.margin).abs() <= 1e-12 * (1.0 + cand.margin.abs()));
        }
    }
}
