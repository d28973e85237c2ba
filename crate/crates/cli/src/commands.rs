use std::io::{self, Write};
use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde_json::{json, Value};
use thiserror::Error;

use linform::enumeration::{count_expressions, for_each_expression, CountTable, EnumerationError};
use linform::poisson::{empirical_count_law, lower_bound_certificate, stein_chen_bounds, tv_standard_error, tv_to_poisson};
use linform::sets::{evaluate_image_with, ImageOptions, RepresentationCounter, SubsetBitVector};
use linform::sim::{self, ExperimentConfig, SweepResult};
use linform::theory::{critical_coefficients, hm_identity_residual, binary_critical_closed_form, predict as predict_all, predict_critical};
use linform::{LinearForm, RegimeSpec};

use crate::{CountArgs, EnumerateArgs, Format, IdentityArgs, MstdArgs, OutputArgs, PoissonArgs, PredictArgs, SimulateArgs, SweepArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("give exactly one of --alpha and --critical-c")]
    AmbiguousRegime,
    #[error("one of --alpha or --critical-c is required")]
    MissingRegime,
    #[error("{0}")]
    Usage(String),
    #[error("{count} expressions exceed the cap of {cap}; use --count-only")]
    TooLarge { count: BigUint, cap: u64 },
    #[error("{failed} of {total} cells failed")]
    CellFailures { failed: usize, total: usize },
    #[error("identity residual above {tol} in {count} case(s)")]
    ResidualTooLarge { tol: f64, count: usize },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Stdout(#[from] io::Error),
    #[error(transparent)]
    Form(#[from] linform::FormError),
    #[error(transparent)]
    Theory(#[from] linform::TheoryError),
    #[error(transparent)]
    Set(#[from] linform::SetError),
    #[error(transparent)]
    Poisson(#[from] linform::PoissonError),
    #[error(transparent)]
    Sim(#[from] linform::SimError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl From<EnumerationError> for CliError {
    fn from(e: EnumerationError) -> Self {
        match e {
            EnumerationError::TooLarge { count, cap } => CliError::TooLarge { count, cap },
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn print_json(v: &impl serde::Serialize) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

/// Exact integers stay numbers while they fit in 64 bits, and become strings beyond.
fn big(v: &BigUint) -> Value {
    match v.to_u64() {
        Some(x) => json!(x),
        None => json!(v.to_string()),
    }
}

/// The given seed, or a fresh one announced on stderr so the run can be repeated.
fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        eprintln!("seed: {s}");
        s
    })
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent().filter(|d| !d.as_os_str().is_empty()) {
        Some(dir) => std::fs::create_dir_all(dir).map_err(io_err(dir)),
        None => Ok(()),
    }
}

pub fn predict(a: PredictArgs) -> Result<()> {
    let form = a.form.form;
    let h = form.arity();
    let out = match (a.alpha, a.critical_c) {
        (Some(_), Some(_)) => return Err(CliError::AmbiguousRegime),
        (None, None) => return Err(CliError::MissingRegime),
        (Some(alpha), None) => {
            let n = a.n.ok_or_else(|| CliError::Usage("--alpha needs --N".into()))?;
            let regime = RegimeSpec::new(a.c, alpha, h)?;
            json!({
                "form": form.original_coeffs(),
                "regime": regime,
                "predictions": predict_all(&form, &regime, n)?,
            })
        }
        (None, Some(c)) => {
            let regime = RegimeSpec::critical(c, h)?;
            let coefficients = critical_coefficients::<f64>(&form, c)?;
            let predictions = match a.n {
                Some(n) => predict_critical(&form, &regime, n)?.to_vec(),
                None => Vec::new(),
            };
            json!({
                "form": form.original_coeffs(),
                "regime": regime,
                "coefficients": coefficients,
                "predictions": predictions,
            })
        }
    };
    print_json(&out)
}

pub fn enumerate(a: EnumerateArgs) -> Result<()> {
    let form = a.form.form;
    let n = a.n;
    match a.k {
        Some(k) => enumerate_one(&form, n, k, a.count_only, a.format.unwrap_or(Format::Json), a.cap),
        None => enumerate_all(&form, n, a.count_only, a.format.unwrap_or(Format::Csv), a.cap),
    }
}

fn class_row(k: u64, c: &linform::ExpressionClass) -> [String; 4] {
    let join = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(" ");
    [k.to_string(), c.target.to_string(), join(&c.rep), join(&c.ground_set)]
}

fn enumerate_one(form: &LinearForm, n: u64, k: u64, count_only: bool, format: Format, cap: u64) -> Result<()> {
    let count = count_expressions(form, n, k);
    if count_only {
        return match format {
            Format::Json => print_json(&json!({ "form": form.original_coeffs(), "n": n, "k": k, "count": big(&count) })),
            Format::Csv => {
                let mut w = csv::Writer::from_writer(io::stdout().lock());
                w.write_record(["k", "count"])?;
                w.write_record([k.to_string(), count.to_string()])?;
                w.flush()?;
                Ok(())
            }
        };
    }
    let classes = linform::enumeration::enumerate_expressions_capped(form, n, k, cap)?;
    match format {
        Format::Json => print_json(&json!({
            "form": form.original_coeffs(),
            "n": n,
            "k": k,
            "count": big(&count),
            "classes": classes,
        })),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(io::stdout().lock());
            w.write_record(["k", "target", "rep", "ground_set"])?;
            for c in &classes {
                w.write_record(class_row(k, c))?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn enumerate_all(form: &LinearForm, n: u64, count_only: bool, format: Format, cap: u64) -> Result<()> {
    let table = CountTable::compute(form, n);
    if count_only {
        return match format {
            Format::Csv => Ok(table.write_csv(io::stdout().lock())?),
            Format::Json => {
                let rows: Vec<Value> = table
                    .counts
                    .iter()
                    .zip(table.scaled_lambdas())
                    .enumerate()
                    .map(|(k, (c, l))| json!({ "k": k, "exact_count": big(c), "lambda_k_scaled": l }))
                    .collect();
                print_json(&json!({
                    "form": form.original_coeffs(),
                    "n": n,
                    "symmetric": table.is_symmetric(),
                    "counts": rows,
                }))
            }
        };
    }
    let total: BigUint = table.counts.iter().sum();
    if total.to_u64().is_none_or(|t| t > cap) {
        return Err(CliError::TooLarge { count: total, cap });
    }
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(io::stdout().lock());
            w.write_record(["k", "target", "rep", "ground_set"])?;
            for k in 0..=form.max_offset(n) {
                let mut err = None;
                for_each_expression(form, n, k, |c| {
                    if err.is_none() {
                        err = w.write_record(class_row(k, &c)).err();
                    }
                });
                if let Some(e) = err {
                    return Err(e.into());
                }
            }
            w.flush()?;
            Ok(())
        }
        Format::Json => {
            let offsets: Vec<Value> = (0..=form.max_offset(n))
                .map(|k| {
                    let mut classes = Vec::new();
                    for_each_expression(form, n, k, |c| classes.push(c));
                    json!({ "k": k, "count": classes.len(), "classes": classes })
                })
                .collect();
            print_json(&json!({ "form": form.original_coeffs(), "n": n, "offsets": offsets }))
        }
    }
}

pub fn count(a: CountArgs) -> Result<()> {
    let form = a.form.form;
    let (subset, seed) = match (a.elements, a.p) {
        (Some(els), _) => (SubsetBitVector::from_elements(a.n, els)?, None),
        (None, Some(p)) => {
            let seed = resolve_seed(a.seed);
            (SubsetBitVector::sample(a.n, p, seed)?, Some(seed))
        }
        (None, None) => return Err(CliError::Usage("give --elements or --p".into())),
    };
    let opts = ImageOptions { distinct: a.distinct, ..Default::default() };
    let image = evaluate_image_with(&form, &subset, &opts);
    let mut w = serde_json::Map::new();
    for spec in &a.k {
        let k = spec.resolve(&form, a.n);
        let counter = RepresentationCounter::new(&form, a.n, k, a.distinct)?;
        w.insert(k.to_string(), json!(counter.count(&subset)));
    }
    if let Some(path) = &a.image_csv {
        let f = std::fs::File::create(path).map_err(io_err(path))?;
        image.write_csv(f)?;
    }
    print_json(&json!({
        "form": form.original_coeffs(),
        "n": a.n,
        "seed": seed,
        "subset_size": subset.len(),
        "image_size": image.len(),
        "complement_size": image.complement_size(),
        "range_size": image.range_size(),
        "w": w,
    }))
}

pub fn simulate(a: SimulateArgs, workers: Option<usize>) -> Result<()> {
    let seed = resolve_seed(a.seed);
    let mut cfg = ExperimentConfig::new(a.form.form, a.n, 1.0, a.alpha[0], a.trials, seed);
    cfg.c_values = a.c;
    cfg.alpha_values = a.alpha;
    cfg.quantities = a.quantities;
    cfg.k_values = a.k;
    cfg.distinct = a.distinct;
    cfg.workers = workers;
    if let Some(path) = &a.save_config {
        let text = serde_json::to_string_pretty(&cfg)?;
        ensure_parent(path)?;
        std::fs::write(path, text + "\n").map_err(io_err(path))?;
    }
    run_experiment(cfg, &a.output)
}

pub fn sweep(a: SweepArgs, workers: Option<usize>) -> Result<()> {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    if workers.is_some() {
        cfg.workers = workers;
    }
    run_experiment(cfg, &a.output)
}

fn run_experiment(mut cfg: ExperimentConfig, out: &OutputArgs) -> Result<()> {
    cfg.validate()?;
    if cfg.output.trials_csv.is_none() {
        cfg.output.trials_csv = Some(out.out_dir.join("trials.csv"));
    }
    if cfg.output.summary_json.is_none() {
        cfg.output.summary_json = Some(out.out_dir.join("summary.json"));
    }
    for path in [&cfg.output.trials_csv, &cfg.output.summary_json].into_iter().flatten() {
        ensure_parent(path)?;
    }
    let result = sim::sweep(&cfg)?;
    sim::write_outputs(&cfg, &result)?;
    print_summary(&result)?;
    if out.emit_plot {
        let csv_path = cfg.output.trials_csv.as_ref().expect("set above");
        let script = crate::plot::write_script(csv_path)?;
        println!("plot script: {}", script.display());
    }
    let failed = result.failures().count();
    for c in result.failures() {
        eprintln!("cell {} (N={}, c={}, alpha={}): {}", c.cell.id, c.cell.n, c.cell.c, c.cell.alpha, c.error.as_deref().unwrap_or(""));
    }
    if failed > 0 {
        return Err(CliError::CellFailures { failed, total: result.cells.len() });
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into())
}

fn print_summary(result: &SweepResult) -> Result<()> {
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "{:>4} {:>10} {:>8} {:>8} {:>13} {:>12} {:>12} {:>10} {:>12} {:>10}",
        "cell", "N", "c", "alpha", "regime", "mean |A|", "mean image", "ratio", "mean compl", "ratio"
    )?;
    for c in &result.cells {
        let cell = &c.cell;
        match &c.summary {
            Some(s) => writeln!(
                out,
                "{:>4} {:>10} {:>8} {:>8} {:>13} {:>12.2} {:>12} {:>10} {:>12} {:>10}",
                cell.id,
                cell.n,
                cell.c,
                cell.alpha.to_string(),
                s.regime.global.to_string(),
                s.subset_size.mean,
                fmt_opt(s.image_size.as_ref().map(|x| x.mean)),
                fmt_opt(s.image_size.as_ref().and_then(|x| x.ratio)),
                fmt_opt(s.complement_size.as_ref().map(|x| x.mean)),
                fmt_opt(s.complement_size.as_ref().and_then(|x| x.ratio)),
            )?,
            None => writeln!(
                out,
                "{:>4} {:>10} {:>8} {:>8} failed: {}",
                cell.id,
                cell.n,
                cell.c,
                cell.alpha.to_string(),
                c.error.as_deref().unwrap_or("")
            )?,
        }
    }
    Ok(())
}

pub fn poisson(a: PoissonArgs) -> Result<()> {
    let form = a.form.form;
    let n = a.n;
    let k = a.k.resolve(&form, n);
    let regime = RegimeSpec::new(a.c, a.alpha, form.arity())?;
    let p = regime.p(n)?;
    let seed = resolve_seed(a.seed);
    let acc = stein_chen_bounds::<f64>(&form, n, k, &p)?;
    let pmf = empirical_count_law(&form, n, k, p, a.trials, seed)?;
    let tv = tv_to_poisson(&pmf, acc.mu);
    let (certificate, note) = if acc.variance > acc.mu {
        match lower_bound_certificate(&form, n, k, p, a.trials, seed) {
            Ok(c) => (Some(c), None),
            Err(e) => (None, Some(e.to_string())),
        }
    } else {
        (None, Some("variance does not exceed the mean; no lower bound".to_string()))
    };
    print_json(&json!({
        "form": form.original_coeffs(),
        "n": n,
        "k": k,
        "p": p,
        "regime": regime,
        "seed": seed,
        "trials": a.trials,
        "classes": acc.classes,
        "mu": acc.mu,
        "variance": acc.variance,
        "b1": acc.b1,
        "b2": acc.b2,
        "upper_bound": acc.upper_bound(),
        "empirical_mean": pmf.mean(),
        "tv": tv,
        "tv_se": tv_standard_error(&pmf),
        "lower_bound": certificate.as_ref().map(|c| c.bound),
        "certificate": certificate,
        "note": note,
    }))
}

pub fn mstd(a: MstdArgs) -> Result<()> {
    let seed = resolve_seed(a.seed);
    let report = sim::mstd_frequency(a.n, a.p, a.trials, seed)?;
    print_json(&json!({ "seed": seed, "report": report }))
}

pub fn identity_check(a: IdentityArgs) -> Result<()> {
    let cases: Vec<(i64, i64, f64)> = match (a.u1, a.u2, a.c) {
        (Some(u1), Some(u2), Some(c)) => vec![(u1, u2, c)],
        _ => {
            let pairs = [(1, -1), (2, 1), (3, -2), (2, -1)];
            pairs.iter().flat_map(|&(u1, u2)| [0.5, 1.0, 2.0].map(|c| (u1, u2, c))).collect()
        }
    };
    let mut rows = Vec::new();
    let mut bad = 0;
    for (u1, u2, c) in cases {
        let residual = hm_identity_residual(u1, u2, c)?;
        if !(residual < a.tol) {
            bad += 1;
        }
        rows.push(json!({
            "u1": u1,
            "u2": u2,
            "c": c,
            "closed_form": binary_critical_closed_form(u1, u2, c),
            "residual": residual,
        }));
    }
    print_json(&rows)?;
    if bad > 0 {
        return Err(CliError::ResidualTooLarge { tol: a.tol, count: bad });
    }
    Ok(())
}
