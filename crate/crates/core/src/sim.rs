//! Reproducible Monte-Carlo experiments over grids of `(N, c, alpha)`.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::forms::LinearForm;
use crate::poisson::{
    certificate_from_moments, mean_count, stein_chen_bounds, tv_standard_error, tv_to_poisson, EmpiricalPmf,
    MomentSource, PoissonError,
};
use crate::sets::{evaluate_image_with, ImageOptions, Kernel, RepresentationCounter, SetError, SubsetBitVector};
use crate::theory::{predict, Exponent, Prediction, RegimeSpec, TheoryError};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("cell {cell_id} is infeasible: {reason}")]
    InfeasibleCell { cell_id: usize, reason: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("at least one trial per cell is required")]
    NoTrials,
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Poisson(#[from] PoissonError),
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const CELL_MULT: u64 = 0xd1b5_4a32_d192_ed03;
const TRIAL_MULT: u64 = 0xaef1_7502_108e_f2d9;

/// The splitmix64 finalizer, a bijection on 64-bit words.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one trial: each input is folded in with an odd multiplier and then
/// mixed, with a final extra round. For fixed master and cell the map from
/// trial index to seed is injective.
pub fn derive_seed(master_seed: u64, cell_id: u64, trial: u64) -> u64 {
    let mut x = mix64(master_seed.wrapping_add(GOLDEN));
    x = mix64(x ^ cell_id.wrapping_mul(CELL_MULT));
    x = mix64(x ^ trial.wrapping_mul(TRIAL_MULT));
    mix64(x.wrapping_add(GOLDEN))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantityRequest {
    ImageSize,
    ComplementSize,
    /// `W_k` at every offset in `k_values`.
    WK,
    TvDiagnostics,
}

/// An offset, either explicit or the midpoint `floor(m N / 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum OffsetSpec {
    At(u64),
    Mid,
}

impl OffsetSpec {
    pub fn resolve(&self, form: &LinearForm, n: u64) -> u64 {
        match self {
            OffsetSpec::At(k) => *k,
            OffsetSpec::Mid => form.max_offset(n) / 2,
        }
    }
}

impl Serialize for OffsetSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            OffsetSpec::At(k) => s.serialize_u64(*k),
            OffsetSpec::Mid => s.serialize_str("mid"),
        }
    }
}

impl<'de> Deserialize<'de> for OffsetSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::String(s) if s == "mid" => Ok(OffsetSpec::Mid),
            v => integral(&v).map(OffsetSpec::At).map_err(serde::de::Error::custom),
        }
    }
}

/// Accepts integers and integral floats such as `1e6`.
fn integral(v: &serde_json::Value) -> Result<u64, String> {
    if let Some(u) = v.as_u64() {
        return Ok(u);
    }
    match v.as_f64() {
        Some(x) if x >= 0.0 && x.fract() == 0.0 && x < 2f64.powi(63) => Ok(x as u64),
        _ => Err(format!("expected a nonnegative integer, got {v}")),
    }
}

fn de_sizes<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u64>, D::Error> {
    let raw = Vec::<serde_json::Value>::deserialize(d)?;
    raw.iter().map(integral).collect::<Result<_, _>>().map_err(serde::de::Error::custom)
}

fn de_form<'de, D: Deserializer<'de>>(d: D) -> Result<LinearForm, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Text(String),
        List(Vec<i64>),
    }
    match Raw::deserialize(d)? {
        Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        Raw::List(v) => LinearForm::new(&v).map_err(serde::de::Error::custom),
    }
}

fn ser_form<S: Serializer>(f: &LinearForm, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(f.original_coeffs())
}

fn default_schema() -> u32 {
    1
}

fn default_memory_cap() -> u64 {
    1 << 30
}

fn default_crossover() -> f64 {
    8.0
}

/// Where results go. Paths are used as given.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputPaths {
    pub trials_csv: Option<PathBuf>,
    pub summary_json: Option<PathBuf>,
}

/// Experiment description, read from JSON (`"schema": 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema")]
    pub schema: u32,
    #[serde(deserialize_with = "de_form", serialize_with = "ser_form")]
    pub form: LinearForm,
    #[serde(deserialize_with = "de_sizes")]
    pub n_values: Vec<u64>,
    pub c_values: Vec<f64>,
    pub alpha_values: Vec<Exponent>,
    pub trials: u64,
    pub master_seed: u64,
    #[serde(default)]
    pub quantities: Vec<QuantityRequest>,
    #[serde(default)]
    pub k_values: Vec<OffsetSpec>,
    #[serde(default)]
    pub output: OutputPaths,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default = "default_memory_cap")]
    pub memory_cap_bytes: u64,
    #[serde(default)]
    pub distinct: bool,
    #[serde(default = "default_crossover")]
    pub crossover: f64,
}

impl ExperimentConfig {
    pub fn new(form: LinearForm, n_values: Vec<u64>, c: f64, alpha: Exponent, trials: u64, master_seed: u64) -> Self {
        ExperimentConfig {
            schema: 1,
            form,
            n_values,
            c_values: vec![c],
            alpha_values: vec![alpha],
            trials,
            master_seed,
            quantities: vec![QuantityRequest::ImageSize, QuantityRequest::ComplementSize],
            k_values: Vec::new(),
            output: OutputPaths::default(),
            workers: None,
            memory_cap_bytes: default_memory_cap(),
            distinct: false,
            crossover: default_crossover(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path).map_err(|source| SimError::Io { path: path.into(), source })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.schema != 1 {
            return Err(SimError::Config(format!("unsupported schema {}", self.schema)));
        }
        if self.trials == 0 {
            return Err(SimError::NoTrials);
        }
        if self.n_values.is_empty() || self.c_values.is_empty() || self.alpha_values.is_empty() {
            return Err(SimError::Config("the (N, c, alpha) grid is empty".into()));
        }
        let wants_w = self.wants(QuantityRequest::WK) || self.wants(QuantityRequest::TvDiagnostics);
        if wants_w && self.k_values.is_empty() {
            return Err(SimError::Config("W_k statistics need at least one entry in k_values".into()));
        }
        Ok(())
    }

    fn wants(&self, q: QuantityRequest) -> bool {
        self.quantities.contains(&q)
    }

    fn wants_image(&self) -> bool {
        self.wants(QuantityRequest::ImageSize) || self.wants(QuantityRequest::ComplementSize)
    }

    /// Cells in grid order: `N` outermost, then `c`, then `alpha`.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &n in &self.n_values {
            for &c in &self.c_values {
                for &alpha in &self.alpha_values {
                    out.push(Cell { id: out.len(), n, c, alpha });
                }
            }
        }
        out
    }

    fn image_options(&self) -> ImageOptions {
        ImageOptions { distinct: self.distinct, kernel: Kernel::Auto, crossover: self.crossover }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub id: usize,
    pub n: u64,
    pub c: f64,
    pub alpha: Exponent,
}

/// One Monte-Carlo observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub cell_id: usize,
    pub trial: u64,
    pub seed: u64,
    pub subset_size: u64,
    pub image_size: Option<u64>,
    pub complement_size: Option<u64>,
    /// `W_k` keyed by resolved offset.
    pub w: BTreeMap<u64, u64>,
}

/// Sample statistics of one quantity against its prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation; absent for a single trial.
    pub sd: Option<f64>,
    /// `mean -/+ 1.96 sd / sqrt(trials)`.
    pub ci95: Option<[f64; 2]>,
    pub predicted: Option<f64>,
    /// Observed over predicted, when the prediction is positive.
    pub ratio: Option<f64>,
}

impl Stat {
    pub fn from_samples(xs: &[f64], predicted: Option<f64>) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let sd = (xs.len() > 1).then(|| (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
        let ci95 = sd.map(|s| {
            let half = 1.96 * s / n.sqrt();
            [mean - half, mean + half]
        });
        let ratio = predicted.filter(|&p| p > 0.0).map(|p| mean / p);
        Stat { mean, sd, ci95, predicted, ratio }
    }

    /// Standard deviation over mean.
    pub fn coefficient_of_variation(&self) -> Option<f64> {
        self.sd.map(|s| s / self.mean)
    }
}

/// Poisson diagnostics for one offset in one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TvRow {
    pub k: u64,
    pub mu: Option<f64>,
    pub tv: Option<f64>,
    pub tv_se: f64,
    pub b1: Option<f64>,
    pub b2: Option<f64>,
    pub upper_bound: Option<f64>,
    pub lower_bound: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub cell: Cell,
    pub p: f64,
    pub regime: RegimeSpec,
    pub trials: u64,
    pub subset_size: Stat,
    pub image_size: Option<Stat>,
    pub complement_size: Option<Stat>,
    pub w: BTreeMap<u64, Stat>,
    pub tv: Vec<TvRow>,
    pub predictions: Vec<Prediction>,
}

fn infeasible(cell: &Cell, reason: impl Into<String>) -> SimError {
    SimError::InfeasibleCell { cell_id: cell.id, reason: reason.into() }
}

/// Runs `trials` independent trials for one cell.
pub fn run_cell(config: &ExperimentConfig, cell: &Cell) -> Result<(CellSummary, Vec<TrialRecord>), SimError> {
    config.validate()?;
    let form = &config.form;
    let regime = RegimeSpec::new(cell.c, cell.alpha, form.arity()).map_err(|e| infeasible(cell, e.to_string()))?;
    let p = regime.p(cell.n).map_err(|e| infeasible(cell, e.to_string()))?;
    if cell.n as f64 * p <= 1.0 {
        return Err(infeasible(cell, format!("N p = {} does not exceed 1", cell.n as f64 * p)));
    }
    let bytes = form.total() * cell.n / 8;
    if config.wants_image() && bytes > config.memory_cap_bytes {
        return Err(infeasible(cell, format!("image vector needs {bytes} bytes, cap is {}", config.memory_cap_bytes)));
    }

    let mut offsets: Vec<u64> = config.k_values.iter().map(|k| k.resolve(form, cell.n)).collect();
    offsets.sort_unstable();
    offsets.dedup();
    if let Some(&k) = offsets.iter().find(|&&k| k > form.max_offset(cell.n)) {
        return Err(infeasible(cell, format!("offset {k} exceeds m N = {}", form.max_offset(cell.n))));
    }
    let wants_w = config.wants(QuantityRequest::WK) || config.wants(QuantityRequest::TvDiagnostics);
    let counters: Vec<RepresentationCounter> = if wants_w {
        offsets
            .iter()
            .map(|&k| RepresentationCounter::new(form, cell.n, k, config.distinct))
            .collect::<Result<_, _>>()?
    } else {
        Vec::new()
    };
    let opts = config.image_options();
    let wants_image = config.wants_image();

    let records: Vec<TrialRecord> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let seed = derive_seed(config.master_seed, cell.id as u64, t);
            let a = SubsetBitVector::sample(cell.n, p, seed)?;
            let (image_size, complement_size) = if wants_image {
                let img = evaluate_image_with(form, &a, &opts);
                (Some(img.len() as u64), Some(img.complement_size()))
            } else {
                (None, None)
            };
            let w = offsets.iter().zip(&counters).map(|(&k, c)| (k, c.count(&a))).collect();
            Ok(TrialRecord {
                cell_id: cell.id,
                trial: t,
                seed,
                subset_size: a.len() as u64,
                image_size,
                complement_size,
                w,
            })
        })
        .collect::<Result<_, SimError>>()?;

    let predictions: Vec<Prediction> = predict(form, &regime, cell.n)?.into_iter().collect();
    let predicted = |tag_prefix: &str| {
        predictions.iter().find(|p| p.tag.ends_with(tag_prefix)).and_then(|p| p.value)
    };
    let column = |f: &dyn Fn(&TrialRecord) -> Option<u64>| -> Option<Vec<f64>> {
        records.iter().map(|r| f(r).map(|v| v as f64)).collect()
    };

    let subset_size = Stat::from_samples(
        &records.iter().map(|r| r.subset_size as f64).collect::<Vec<_>>(),
        Some((cell.n + 1) as f64 * p),
    );
    let image_size = config
        .wants(QuantityRequest::ImageSize)
        .then(|| column(&|r| r.image_size))
        .flatten()
        .map(|xs| Stat::from_samples(&xs, predicted("image")));
    let complement_size = config
        .wants(QuantityRequest::ComplementSize)
        .then(|| column(&|r| r.complement_size))
        .flatten()
        .map(|xs| Stat::from_samples(&xs, predicted("complement")));

    let mut w = BTreeMap::new();
    let mut tv = Vec::new();
    for &k in &offsets {
        let values: Vec<u64> = records.iter().map(|r| r.w[&k]).collect();
        let mu = mean_count(form, cell.n, k, &p).ok();
        if config.wants(QuantityRequest::WK) {
            let xs: Vec<f64> = values.iter().map(|&v| v as f64).collect();
            w.insert(k, Stat::from_samples(&xs, mu));
        }
        if config.wants(QuantityRequest::TvDiagnostics) {
            tv.push(tv_row(form, cell.n, k, p, mu, &EmpiricalPmf::from_values(values)));
        }
    }

    let summary = CellSummary {
        cell: *cell,
        p,
        regime,
        trials: config.trials,
        subset_size,
        image_size,
        complement_size,
        w,
        tv,
        predictions,
    };
    Ok((summary, records))
}

fn tv_row(form: &LinearForm, n: u64, k: u64, p: f64, mu: Option<f64>, pmf: &EmpiricalPmf) -> TvRow {
    let tv_se = tv_standard_error(pmf);
    let mut row = TvRow {
        k,
        mu,
        tv: mu.map(|m| tv_to_poisson(pmf, m)),
        tv_se,
        b1: None,
        b2: None,
        upper_bound: None,
        lower_bound: None,
        note: None,
    };
    match stein_chen_bounds(form, n, k, &p) {
        Ok(acc) => {
            row.b1 = Some(acc.b1);
            row.b2 = Some(acc.b2);
            row.upper_bound = Some(acc.upper_bound());
            let cert = certificate_from_moments(
                acc.mu,
                pmf.moment_about(acc.mu, 2),
                pmf.moment_about(acc.mu, 4),
                acc.sum_p_sq,
                acc.max_p,
                MomentSource::MonteCarlo { trials: pmf.trials },
            );
            match cert {
                Ok(c) => row.lower_bound = Some(c.bound),
                Err(e) => row.note = Some(e.to_string()),
            }
        }
        Err(e) => row.note = Some(e.to_string()),
    }
    row
}

/// Outcome of one cell in a sweep; failures are recorded, not fatal.
#[derive(Debug, Serialize)]
pub struct CellOutcome {
    pub cell: Cell,
    pub summary: Option<CellSummary>,
    pub error: Option<String>,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

#[derive(Debug, Serialize)]
pub struct SweepResult {
    pub schema: u32,
    #[serde(serialize_with = "ser_form")]
    pub form: LinearForm,
    pub master_seed: u64,
    pub cells: Vec<CellOutcome>,
}

impl SweepResult {
    pub fn failures(&self) -> impl Iterator<Item = &CellOutcome> {
        self.cells.iter().filter(|c| c.error.is_some())
    }

    pub fn records(&self) -> impl Iterator<Item = &TrialRecord> {
        self.cells.iter().flat_map(|c| c.records.iter())
    }
}

/// Runs every cell of the grid, in parallel when `workers` allows it.
pub fn sweep(config: &ExperimentConfig) -> Result<SweepResult, SimError> {
    config.validate()?;
    let run = || {
        config
            .cells()
            .par_iter()
            .map(|cell| match run_cell(config, cell) {
                Ok((summary, records)) => CellOutcome { cell: *cell, summary: Some(summary), error: None, records },
                Err(e) => CellOutcome { cell: *cell, summary: None, error: Some(e.to_string()), records: Vec::new() },
            })
            .collect::<Vec<_>>()
    };
    let cells = match config.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| SimError::Config(e.to_string()))?
            .install(run),
        None => run(),
    };
    Ok(SweepResult { schema: 1, form: config.form.clone(), master_seed: config.master_seed, cells })
}

fn opt(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One CSV row per trial, sorted by cell and trial. `W_k` columns are named `w_<k>`.
pub fn write_trials_csv<'a, W: Write, I: IntoIterator<Item = &'a TrialRecord>>(
    records: I,
    cells: &[Cell],
    out: W,
) -> Result<(), SimError> {
    let mut rows: Vec<&TrialRecord> = records.into_iter().collect();
    rows.sort_by_key(|r| (r.cell_id, r.trial));
    let mut ks: Vec<u64> = rows.iter().flat_map(|r| r.w.keys().copied()).collect();
    ks.sort_unstable();
    ks.dedup();
    let by_id: BTreeMap<usize, &Cell> = cells.iter().map(|c| (c.id, c)).collect();

    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> =
        ["cell_id", "n", "c", "alpha", "trial", "seed", "subset_size", "image_size", "complement_size"]
            .iter()
            .map(|s| s.to_string())
            .collect();
    header.extend(ks.iter().map(|k| format!("w_{k}")));
    w.write_record(&header)?;
    for r in rows {
        let cell = by_id.get(&r.cell_id);
        let mut row = vec![
            r.cell_id.to_string(),
            cell.map(|c| c.n.to_string()).unwrap_or_default(),
            cell.map(|c| c.c.to_string()).unwrap_or_default(),
            cell.map(|c| c.alpha.to_string()).unwrap_or_default(),
            r.trial.to_string(),
            r.seed.to_string(),
            r.subset_size.to_string(),
            opt(r.image_size),
            opt(r.complement_size),
        ];
        row.extend(ks.iter().map(|k| opt(r.w.get(k).copied())));
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Writes the configured output files of a sweep.
pub fn write_outputs(config: &ExperimentConfig, result: &SweepResult) -> Result<(), SimError> {
    let create = |path: &Path| std::fs::File::create(path).map_err(|source| SimError::Io { path: path.into(), source });
    if let Some(path) = &config.output.trials_csv {
        let cells: Vec<Cell> = result.cells.iter().map(|c| c.cell).collect();
        write_trials_csv(result.records(), &cells, create(path)?)?;
    }
    if let Some(path) = &config.output.summary_json {
        let mut f = create(path)?;
        serde_json::to_writer_pretty(&mut f, result)?;
        writeln!(f).map_err(|source| SimError::Io { path: path.clone(), source })?;
    }
    Ok(())
}

/// Whether `|A + A| > |A - A|`.
pub fn is_mstd(a: &SubsetBitVector) -> bool {
    let sums = LinearForm::new(&[1, 1]).expect("valid form");
    let diffs = LinearForm::new(&[1, -1]).expect("valid form");
    let opts = ImageOptions { kernel: Kernel::ShiftedUnion, ..Default::default() };
    evaluate_image_with(&sums, a, &opts).len() > evaluate_image_with(&diffs, a, &opts).len()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MstdReport {
    pub n: u64,
    pub p: f64,
    pub trials: u64,
    pub mstd: u64,
    pub fraction: f64,
}

/// Fraction of binomial random sets with more sums than differences.
pub fn mstd_frequency(n: u64, p: f64, trials: u64, master_seed: u64) -> Result<MstdReport, SimError> {
    if trials == 0 {
        return Err(SimError::NoTrials);
    }
    let mstd = (0..trials)
        .into_par_iter()
        .map(|t| SubsetBitVector::sample(n, p, derive_seed(master_seed, 0, t)).map(|a| u64::from(is_mstd(&a))))
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(MstdReport { n, p, trials, mstd, fraction: mstd as f64 / trials as f64 })
}
