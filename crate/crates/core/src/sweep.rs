// Copyright 2026 The spinstar Authors
// SPDX-License-Identifier: Apache-2.0

//! Experiment harness: (A, T) grids, the NM-vs-fidelity protocol family,
//! matched-NM coupling search, and CSV/JSON emission.
//!
//! Every point gets its own seed derived from the base seed and the point's
//! lattice key, so results do not depend on scheduling or thread count.
//! Records are always written in lattice order (or NM order for the family).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::control::{optimize, OptimizationConfig};
use crate::error::{Error, Result};
use crate::nonmarkov::{blp_measure, DEFAULT_NM_SAMPLES};
use crate::spinstar::{
    target_state, CouplingMode, Representation, SpinStarModel, TargetKind, DEFAULT_OMEGA0,
};

/// Largest grid axis accepted by [`SweepSpec::validate`].
pub const MAX_GRID_AXIS: usize = 20;

/// Fixed CSV column order.
pub const CSV_HEADER: [&str; 10] = [
    "m",
    "n",
    "coupling",
    "coupling_mode",
    "total_time",
    "target",
    "nm",
    "fidelity",
    "iterations",
    "wall_time_s",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Grid,
    NmFamily,
    MatchedNm,
    Single,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::InvalidArgument(format!("unknown output format '{other}'"))),
        }
    }
}

/// One curve of the NM family: every combination of `n` and `couplings`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub label: String,
    pub n: Vec<usize>,
    pub couplings: Vec<f64>,
    #[serde(default)]
    pub coupling_mode: CouplingMode,
}

/// Reference configuration whose NM the search at `n` must reproduce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatchedSpec {
    pub reference_n: usize,
    pub reference_coupling: f64,
    pub reference_mode: CouplingMode,
    pub n: usize,
    pub bracket: [f64; 2],
    pub tolerance: f64,
}

impl Default for MatchedSpec {
    fn default() -> Self {
        Self {
            reference_n: 8,
            reference_coupling: 0.2,
            reference_mode: CouplingMode::Scaled,
            n: 5,
            bracket: [0.1, 0.2],
            tolerance: MATCH_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSpec {
    pub experiment: Experiment,
    pub m: usize,
    /// Total spins for grid and single runs.
    pub n: usize,
    /// Coupling axis (grid) or the single coupling (single).
    pub couplings: Vec<f64>,
    pub coupling_mode: CouplingMode,
    /// Time axis (grid); the first entry is used by the other experiments.
    pub times: Vec<f64>,
    pub omega0: f64,
    pub target: TargetKind,
    pub nm_samples: usize,
    pub optimization: OptimizationConfig,
    pub series: Vec<Series>,
    pub matched: MatchedSpec,
    pub representation: Representation,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub parallelism: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self::single()
    }
}

impl SweepSpec {
    fn base(experiment: Experiment) -> Self {
        Self {
            experiment,
            m: 2,
            n: 3,
            couplings: vec![0.2],
            coupling_mode: CouplingMode::Unscaled,
            times: vec![10.0],
            omega0: DEFAULT_OMEGA0,
            target: TargetKind::Bell,
            nm_samples: DEFAULT_NM_SAMPLES,
            optimization: OptimizationConfig::default(),
            series: Vec::new(),
            matched: MatchedSpec::default(),
            representation: Representation::Collective,
            output: None,
            format: OutputFormat::Csv,
            parallelism: 1,
        }
    }

    /// One optimization: m=2, n=3, A=0.2, T=10, Bell target.
    pub fn single() -> Self {
        Self::base(Experiment::Single)
    }

    /// GHZ target on a 4x4 (A, T) lattice with three central and two bath spins.
    pub fn grid() -> Self {
        Self {
            m: 3,
            n: 5,
            couplings: vec![0.05, 0.1, 0.15, 0.2],
            times: vec![2.5, 5.0, 7.5, 10.0],
            target: TargetKind::Ghz,
            ..Self::base(Experiment::Grid)
        }
    }

    /// Seven protocols at T=10 with a Bell target: couplings 0..0.2 at n=5,
    /// and n = 3..8 at three scaled and three unscaled fixed couplings.
    /// The fixed couplings are arbitrary picks from weak to strong memory.
    pub fn nm_family() -> Self {
        let ns: Vec<usize> = (3..=8).collect();
        let mut series = vec![Series {
            label: "n=5, A in [0, 0.2], illustrative grid".into(),
            n: vec![5],
            couplings: (0..=8).map(|k| 0.025 * k as f64).collect(),
            coupling_mode: CouplingMode::Unscaled,
        }];
        for (a, mode) in [
            (0.2, CouplingMode::Scaled),
            (0.15, CouplingMode::Scaled),
            (0.1, CouplingMode::Scaled),
            (0.1, CouplingMode::Unscaled),
            (0.075, CouplingMode::Unscaled),
            (0.05, CouplingMode::Unscaled),
        ] {
            series.push(Series {
                label: if a == 0.2 && mode == CouplingMode::Scaled {
                    format!("A={a} ({mode}), reference series")
                } else {
                    format!("A={a} ({mode}), illustrative value")
                },
                n: ns.clone(),
                couplings: vec![a],
                coupling_mode: mode,
            });
        }
        Self {
            series,
            ..Self::base(Experiment::NmFamily)
        }
    }

    /// Smaller family for a single core: the lattice n in {3..6} x
    /// A in {0.05, 0.1, 0.15, 0.2} (unscaled) plus the decoupled point,
    /// with 5 restarts.
    pub fn nm_family_desk() -> Self {
        let mut series = vec![Series {
            label: "decoupled".into(),
            n: vec![3],
            couplings: vec![0.0],
            coupling_mode: CouplingMode::Unscaled,
        }];
        for n in 3..=6 {
            series.push(Series {
                label: format!("n={n}"),
                n: vec![n],
                couplings: vec![0.05, 0.1, 0.15, 0.2],
                coupling_mode: CouplingMode::Unscaled,
            });
        }
        Self {
            series,
            optimization: OptimizationConfig {
                restarts: 5,
                ..OptimizationConfig::default()
            },
            ..Self::base(Experiment::NmFamily)
        }
    }

    /// NM-matched coupling search: n=8 with scaled A=0.2 as the reference,
    /// solved at n=5.
    pub fn matched_nm() -> Self {
        Self::base(Experiment::MatchedNm)
    }

    pub fn for_experiment(experiment: Experiment) -> Self {
        match experiment {
            Experiment::Grid => Self::grid(),
            Experiment::NmFamily => Self::nm_family(),
            Experiment::MatchedNm => Self::matched_nm(),
            Experiment::Single => Self::single(),
        }
    }

    pub fn total_time(&self) -> f64 {
        self.times.first().copied().unwrap_or(f64::NAN)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.times.is_empty() || self.times.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return bad("times must be non-empty and positive".into());
        }
        if self.nm_samples < crate::nonmarkov::MIN_NM_SAMPLES {
            return bad(format!("nm_samples must be >= {}", crate::nonmarkov::MIN_NM_SAMPLES));
        }
        if self.parallelism == 0 {
            return bad("parallelism must be >= 1".into());
        }
        self.optimization.validate()?;
        target_state(self.target, self.m)?;
        match self.experiment {
            Experiment::Grid | Experiment::Single => {
                if self.couplings.is_empty() {
                    return bad("couplings must be non-empty".into());
                }
                if self.experiment == Experiment::Grid
                    && (self.couplings.len() > MAX_GRID_AXIS || self.times.len() > MAX_GRID_AXIS)
                {
                    return bad(format!("grid axes are capped at {MAX_GRID_AXIS}"));
                }
                for &a in &self.couplings {
                    self.model(self.n, a, self.coupling_mode)?;
                }
            }
            Experiment::NmFamily => {
                if self.series.is_empty() {
                    return bad("nm_family needs at least one series".into());
                }
                for s in &self.series {
                    if s.n.is_empty() || s.couplings.is_empty() {
                        return bad(format!("series '{}' has an empty range", s.label));
                    }
                }
            }
            Experiment::MatchedNm => {
                let ms = &self.matched;
                self.model(ms.reference_n, ms.reference_coupling, ms.reference_mode)?;
                self.model(ms.n, ms.bracket[0], CouplingMode::Unscaled)?;
                self.model(ms.n, ms.bracket[1], CouplingMode::Unscaled)?;
                if !(ms.bracket[0] < ms.bracket[1]) || !(ms.tolerance > 0.0) {
                    return bad("matched search needs bracket[0] < bracket[1] and tolerance > 0".into());
                }
            }
        }
        Ok(())
    }

    fn model(&self, n: usize, coupling: f64, mode: CouplingMode) -> Result<SpinStarModel> {
        let model = SpinStarModel {
            m: self.m,
            n,
            omega0: self.omega0,
            coupling,
            coupling_mode: mode,
            representation: self.representation,
        };
        model.validate()?;
        Ok(model)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub m: usize,
    pub n: usize,
    pub coupling: f64,
    pub coupling_mode: CouplingMode,
    pub total_time: f64,
    pub target: TargetKind,
    pub nm: f64,
    pub fidelity: f64,
    pub iterations: usize,
    pub wall_time_s: f64,
}

impl SweepRecord {
    /// Same record with the timing column zeroed, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        Self {
            wall_time_s: 0.0,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub index: usize,
    pub point: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedSummary {
    pub reference_nm: f64,
    pub matched_coupling: f64,
    pub matched_nm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub records: Vec<SweepRecord>,
    pub failures: Vec<PointFailure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matched: Option<MatchedSummary>,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// `seed XOR hash(i, j)`
pub fn point_seed(seed: u64, i: usize, j: usize) -> u64 {
    seed ^ splitmix64(((i as u64) << 32) ^ j as u64)
}

struct Point {
    model: SpinStarModel,
    total_time: f64,
    seed: u64,
}

impl Point {
    fn describe(&self) -> String {
        format!(
            "m={} n={} A={} ({}) T={}",
            self.model.m, self.model.n, self.model.coupling, self.model.coupling_mode, self.total_time
        )
    }
}

fn evaluate(spec: &SweepSpec, point: &Point) -> Result<SweepRecord> {
    let start = Instant::now();
    let nm = blp_measure(&point.model, point.total_time, spec.nm_samples)?.value;
    let target = target_state(spec.target, spec.m)?;
    let config = OptimizationConfig {
        seed: point.seed,
        ..spec.optimization.clone()
    };
    let r = optimize(&point.model, &target, point.total_time, &config)?;
    let (fidelity, iterations) = (r.best_fidelity, r.iterations_used);
    Ok(SweepRecord {
        m: point.model.m,
        n: point.model.n,
        coupling: point.model.coupling,
        coupling_mode: point.model.coupling_mode,
        total_time: point.total_time,
        target: spec.target,
        nm,
        fidelity,
        iterations,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

fn run_points(spec: &SweepSpec, points: Vec<std::result::Result<Point, PointFailure>>) -> Result<SweepOutcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.parallelism)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let results: Vec<std::result::Result<SweepRecord, PointFailure>> = pool.install(|| {
        points
            .into_par_iter()
            .enumerate()
            .map(|(index, point)| {
                let point = point?;
                evaluate(spec, &point).map_err(|e| PointFailure {
                    index,
                    point: point.describe(),
                    error: e.to_string(),
                })
            })
            .collect()
    });
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(f) => failures.push(f),
        }
    }
    Ok(SweepOutcome {
        records,
        failures,
        matched: None,
    })
}

fn expect_experiment(spec: &SweepSpec, experiment: Experiment) -> Result<()> {
    if spec.experiment != experiment {
        return Err(Error::InvalidArgument(format!(
            "spec is for {:?}, not {:?}",
            spec.experiment, experiment
        )));
    }
    spec.validate()
}

/// NM of the free evolution and optimized fidelity at every `(A_i, T_j)`,
/// records ordered by `i` then `j`.
pub fn run_grid(spec: &SweepSpec) -> Result<SweepOutcome> {
    expect_experiment(spec, Experiment::Grid)?;
    let seed = spec.optimization.seed;
    let mut points = Vec::new();
    for (i, &a) in spec.couplings.iter().enumerate() {
        for (j, &t) in spec.times.iter().enumerate() {
            points.push(Ok(Point {
                model: spec.model(spec.n, a, spec.coupling_mode)?,
                total_time: t,
                seed: point_seed(seed, i, j),
            }));
        }
    }
    run_points(spec, points)
}

/// Every configuration of every series at `T = times[0]`, sorted by NM.
pub fn run_nm_family(spec: &SweepSpec) -> Result<SweepOutcome> {
    expect_experiment(spec, Experiment::NmFamily)?;
    let seed = spec.optimization.seed;
    let t = spec.total_time();
    let mut points = Vec::new();
    for (s, series) in spec.series.iter().enumerate() {
        let mut p = 0;
        for &n in &series.n {
            for &a in &series.couplings {
                let index = points.len();
                points.push(spec.model(n, a, series.coupling_mode).map(|model| Point {
                    model,
                    total_time: t,
                    seed: point_seed(seed, s, p),
                }).map_err(|e| PointFailure {
                    index,
                    point: format!("series '{}' n={n} A={a}", series.label),
                    error: e.to_string(),
                }));
                p += 1;
            }
        }
    }
    let mut outcome = run_points(spec, points)?;
    outcome.records.sort_by(|a, b| a.nm.total_cmp(&b.nm));
    Ok(outcome)
}

/// A single optimization at `couplings[0]`, `times[0]`.
pub fn run_single(spec: &SweepSpec) -> Result<SweepOutcome> {
    expect_experiment(spec, Experiment::Single)?;
    let point = Point {
        model: spec.model(spec.n, spec.couplings[0], spec.coupling_mode)?,
        total_time: spec.total_time(),
        seed: point_seed(spec.optimization.seed, 0, 0),
    };
    run_points(spec, vec![Ok(point)])
}

/// Finds the coupling at `n` whose NM matches the reference configuration,
/// then optimizes both configurations.
pub fn run_matched_nm(spec: &SweepSpec) -> Result<SweepOutcome> {
    expect_experiment(spec, Experiment::MatchedNm)?;
    let ms = &spec.matched;
    let t = spec.total_time();
    let reference = spec.model(ms.reference_n, ms.reference_coupling, ms.reference_mode)?;
    let reference_nm = blp_measure(&reference, t, spec.nm_samples)?.value;
    let template = spec.model(ms.n, ms.bracket[0], CouplingMode::Unscaled)?;
    let search = MatchSearch {
        tolerance: ms.tolerance,
        n_samples: spec.nm_samples,
    };
    let matched_coupling = find_matched_coupling_with(&template, reference_nm, t, (ms.bracket[0], ms.bracket[1]), &search)?;
    let matched_model = template.with_coupling(matched_coupling);

    let points = [
        Point {
            model: reference,
            total_time: t,
            seed: point_seed(spec.optimization.seed, 0, 0),
        },
        Point {
            model: matched_model,
            total_time: t,
            seed: point_seed(spec.optimization.seed, 1, 0),
        },
    ];
    let records = points
        .iter()
        .map(|p| evaluate(spec, p))
        .collect::<Result<Vec<_>>>()?;
    let matched_nm = records[1].nm;
    Ok(SweepOutcome {
        records,
        failures: Vec::new(),
        matched: Some(MatchedSummary {
            reference_nm,
            matched_coupling,
            matched_nm,
        }),
    })
}

/// Dispatches on `spec.experiment`.
pub fn run(spec: &SweepSpec) -> Result<SweepOutcome> {
    match spec.experiment {
        Experiment::Grid => run_grid(spec),
        Experiment::NmFamily => run_nm_family(spec),
        Experiment::MatchedNm => run_matched_nm(spec),
        Experiment::Single => run_single(spec),
    }
}

/// Stopping rule for [`find_matched_coupling_with`].
#[derive(Debug, Clone)]
pub struct MatchSearch {
    /// Stop once `|NM(A) - target| < tolerance`.
    pub tolerance: f64,
    pub n_samples: usize,
}

pub const MATCH_TOLERANCE: f64 = 5e-3;

impl Default for MatchSearch {
    fn default() -> Self {
        Self {
            tolerance: MATCH_TOLERANCE,
            n_samples: DEFAULT_NM_SAMPLES,
        }
    }
}

/// Bisection on the unscaled coupling at `n` until the NM over `[0, T]`
/// is within `5e-3` of `target_nm`.
pub fn find_matched_coupling(m: usize, n: usize, target_nm: f64, total_time: f64, bracket: (f64, f64)) -> Result<f64> {
    let template = SpinStarModel::new(m, n, bracket.0.max(0.0))?;
    find_matched_coupling_with(&template, target_nm, total_time, bracket, &MatchSearch::default())
}

/// Bisection on `template.coupling` (other model fields kept).
pub fn find_matched_coupling_with(
    template: &SpinStarModel,
    target_nm: f64,
    total_time: f64,
    bracket: (f64, f64),
    search: &MatchSearch,
) -> Result<f64> {
    let (mut lo, mut hi) = bracket;
    if !(lo < hi) {
        return Err(Error::InvalidArgument(format!("empty bracket [{lo}, {hi}]")));
    }
    let nm_at = |a: f64| -> Result<f64> {
        Ok(blp_measure(&template.clone().with_coupling(a), total_time, search.n_samples)?.value - target_nm)
    };
    let mut f_lo = nm_at(lo)?;
    if f_lo.abs() < search.tolerance {
        return Ok(lo);
    }
    let f_hi = nm_at(hi)?;
    if f_hi.abs() < search.tolerance {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Bracket {
            lo,
            hi,
            target: target_nm,
            nm_lo: f_lo + target_nm,
            nm_hi: f_hi + target_nm,
        });
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let f_mid = nm_at(mid)?;
        if f_mid.abs() < search.tolerance || hi - lo < 1e-14 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the fixed-header CSV. Floats carry 17 significant digits.
pub fn write_csv<W: Write>(records: &[SweepRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.m.to_string(),
            r.n.to_string(),
            fmt_f64(r.coupling),
            r.coupling_mode.to_string(),
            fmt_f64(r.total_time),
            r.target.to_string(),
            fmt_f64(r.nm),
            fmt_f64(r.fidelity),
            r.iterations.to_string(),
            fmt_f64(r.wall_time_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Records plus the resolved spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonReport {
    pub spec: SweepSpec,
    pub records: Vec<SweepRecord>,
    #[serde(default)]
    pub failures: Vec<PointFailure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matched: Option<MatchedSummary>,
}

pub fn write_json<W: Write>(report: &JsonReport, writer: W) -> Result<()> {
    serde_json::to_writer_pretty(writer, report)?;
    Ok(())
}

/// Writes `outcome` to `path` as CSV or as a JSON report carrying `spec`.
pub fn emit_results(outcome: &SweepOutcome, spec: &SweepSpec, path: &Path, format: OutputFormat) -> Result<()> {
    if outcome.records.is_empty() {
        return Err(Error::InvalidArgument("no records to write".into()));
    }
    let mut out = BufWriter::new(File::create(path)?);
    match format {
        OutputFormat::Csv => write_csv(&outcome.records, &mut out)?,
        OutputFormat::Json => {
            let report = JsonReport {
                spec: spec.clone(),
                records: outcome.records.clone(),
                failures: outcome.failures.clone(),
                matched: outcome.matched.clone(),
            };
            write_json(&report, &mut out)?;
        }
    }
    out.flush()?;
    Ok(())
}
