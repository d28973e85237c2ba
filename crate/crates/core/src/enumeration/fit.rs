//! Exact count tables and their agreement with the leading-order constant.

use std::io::Write;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::burnside::count_all_offsets;
use super::irwin_hall::{lambda_with, ShiftedDensity};
use crate::forms::LinearForm;

/// Exact `|D(N, k)|` for every `k` in `0..=m*N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountTable {
    pub form: LinearForm,
    pub n: u64,
    pub counts: Vec<BigUint>,
}

impl CountTable {
    pub fn compute(form: &LinearForm, n: u64) -> Self {
        CountTable { form: form.clone(), n, counts: count_all_offsets(form, n) }
    }

    pub fn get(&self, k: u64) -> BigUint {
        self.counts.get(k as usize).cloned().unwrap_or_default()
    }

    pub fn is_symmetric(&self) -> bool {
        self.counts.iter().eq(self.counts.iter().rev())
    }

    /// `lambda_k N^(h-1)` for every offset.
    pub fn scaled_lambdas(&self) -> Vec<f64> {
        let shifted = ShiftedDensity::<f64>::new(&self.form);
        let scale = (self.n as f64).powi(self.form.arity() as i32 - 1);
        (0..self.counts.len() as u64)
            .map(|k| lambda_with(&shifted, &self.form, self.n, k) * scale)
            .collect()
    }

    /// CSV with columns `k,exact_count,lambda_k_scaled,rel_error`. The relative
    /// error is blank where the prediction vanishes.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "exact_count", "lambda_k_scaled", "rel_error"])?;
        for (k, (c, pred)) in self.counts.iter().zip(self.scaled_lambdas()).enumerate() {
            let rel = relative_error(c, pred).map(|e| e.to_string()).unwrap_or_default();
            w.write_record([k.to_string(), c.to_string(), pred.to_string(), rel])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn relative_error(count: &BigUint, predicted: f64) -> Option<f64> {
    (predicted > 0.0).then(|| {
        let c = count.to_f64().unwrap_or(f64::INFINITY);
        (c - predicted).abs() / predicted
    })
}

/// Worst relative deviation of counts from `lambda_k N^(h-1)` at one `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub n: u64,
    pub max_rel_error: f64,
    /// Offset attaining the maximum, if the window was nonempty.
    pub worst_k: Option<u64>,
    /// Set when `N < 10`, where the window is empty and the error is reported as 0.
    pub empty_window: bool,
}

/// Fit report over the window `k in [ceil(N/10), floor(m*N/2)]` for each `N`.
pub fn asymptotic_fit_report(form: &LinearForm, n_list: &[u64]) -> Vec<FitRow> {
    n_list.iter().map(|&n| fit_row(form, n)).collect()
}

fn fit_row(form: &LinearForm, n: u64) -> FitRow {
    if n < 10 {
        return FitRow { n, max_rel_error: 0.0, worst_k: None, empty_window: true };
    }
    let table = CountTable::compute(form, n);
    let lambdas = table.scaled_lambdas();
    let lo = n.div_ceil(10);
    let hi = form.max_offset(n) / 2;
    let mut worst: Option<(u64, f64)> = None;
    for k in lo..=hi {
        if let Some(e) = relative_error(&table.counts[k as usize], lambdas[k as usize]) {
            if worst.is_none_or(|(_, w)| e > w) {
                worst = Some((k, e));
            }
        }
    }
    match worst {
        Some((k, e)) => FitRow { n, max_rel_error: e, worst_k: Some(k), empty_window: false },
        None => FitRow { n, max_rel_error: 0.0, worst_k: None, empty_window: true },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sums_of_two_at_k_equal_n() {
        let f = LinearForm::new(&[1, 1]).unwrap();
        for n in [10u64, 11, 37, 100] {
            let t = CountTable::compute(&f, n);
            assert_eq!(t.get(n), BigUint::from(n / 2 + 1));
            let pred = t.scaled_lambdas()[n as usize];
            assert!((pred - n as f64 / 2.0).abs() < 1e-9);
            let rel = relative_error(&t.get(n), pred).unwrap();
            assert!(rel <= 3.0 / n as f64);
        }
    }

    #[test]
    fn small_n_reports_empty_window() {
        let f = LinearForm::new(&[1, 1, -1]).unwrap();
        let rows = asymptotic_fit_report(&f, &[5, 20]);
        assert!(rows[0].empty_window && rows[0].max_rel_error == 0.0);
        assert!(!rows[1].empty_window);
    }

    #[test]
    fn csv_has_one_row_per_offset() {
        let f = LinearForm::new(&[2, 1, -1]).unwrap();
        let t = CountTable::compute(&f, 7);
        assert!(t.is_symmetric());
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 4 * 7 + 1);
        assert!(text.starts_with("k,exact_count,lambda_k_scaled,rel_error\n0,1,0,\n"));
    }
}
