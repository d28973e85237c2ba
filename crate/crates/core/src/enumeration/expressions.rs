//! Canonical enumeration of L-expressions.
//!
//! Each orbit of solution tuples under the redundancy group has exactly one
//! canonical representative: entries are nondecreasing inside every maximal
//! block of equal coefficients, and at a balanced midpoint the tuple is also
//! lexicographically no larger than the block-sorted image of its reversal.

use serde::{Deserialize, Serialize};

use crate::forms::LinearForm;

/// One L-expression: an orbit of tuples with a fixed evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExpressionClass {
    /// Canonical representative.
    pub rep: Vec<u64>,
    /// Distinct entries of `rep`, ascending.
    pub ground_set: Vec<u64>,
    /// Evaluation of the form at `rep`.
    pub target: i64,
}

impl ExpressionClass {
    pub fn from_rep(rep: &[u64], target: i64) -> Self {
        let mut ground_set = rep.to_vec();
        ground_set.sort_unstable();
        ground_set.dedup();
        ExpressionClass { rep: rep.to_vec(), ground_set, target }
    }
}

/// Sort entries inside each block; the canonical form under the coefficient stabilizer.
pub(crate) fn block_sort(tuple: &mut [u64], blocks: &[std::ops::Range<usize>]) {
    for b in blocks {
        tuple[b.clone()].sort_unstable();
    }
}

/// Canonical representative under the full redundancy group.
pub fn canonical_rep(form: &LinearForm, tuple: &[u64], reversal: bool) -> Vec<u64> {
    let blocks = form.blocks();
    let mut t = tuple.to_vec();
    block_sort(&mut t, &blocks);
    if reversal {
        let mut r: Vec<u64> = t.iter().rev().copied().collect();
        block_sort(&mut r, &blocks);
        if r < t {
            return r;
        }
    }
    t
}

/// Depth-first generator of canonical solution tuples over a sorted alphabet.
pub(crate) struct CanonicalSearch<'a> {
    coeffs: &'a [i64],
    blocks: Vec<std::ops::Range<usize>>,
    block_start: Vec<bool>,
    values: &'a [u64],
    target: i64,
    reversal: bool,
    distinct: bool,
    suffix_min: Vec<i64>,
    suffix_max: Vec<i64>,
}

impl<'a> CanonicalSearch<'a> {
    /// `values` must be sorted ascending without duplicates.
    pub(crate) fn new(
        form: &'a LinearForm,
        values: &'a [u64],
        target: i64,
        reversal: bool,
        distinct: bool,
    ) -> Self {
        let coeffs = form.coeffs();
        let h = coeffs.len();
        let blocks = form.blocks();
        let mut block_start = vec![false; h];
        for b in &blocks {
            block_start[b.start] = true;
        }
        let (vmin, vmax) = match (values.first(), values.last()) {
            (Some(&a), Some(&b)) => (a as i64, b as i64),
            _ => (0, 0),
        };
        let mut suffix_min = vec![0i64; h + 1];
        let mut suffix_max = vec![0i64; h + 1];
        for i in (0..h).rev() {
            let (lo, hi) = if coeffs[i] > 0 {
                (coeffs[i] * vmin, coeffs[i] * vmax)
            } else {
                (coeffs[i] * vmax, coeffs[i] * vmin)
            };
            suffix_min[i] = suffix_min[i + 1] + lo;
            suffix_max[i] = suffix_max[i + 1] + hi;
        }
        CanonicalSearch {
            coeffs,
            blocks,
            block_start,
            values,
            target,
            reversal,
            distinct,
            suffix_min,
            suffix_max,
        }
    }

    pub(crate) fn run<F: FnMut(&[u64])>(&self, visit: &mut F) {
        if self.values.is_empty() {
            return;
        }
        let h = self.coeffs.len();
        let mut idx = vec![0usize; h];
        let mut tuple = vec![0u64; h];
        self.descend(0, 0, &mut idx, &mut tuple, visit);
    }

    fn lower_index(&self, pos: usize, idx: &[usize]) -> usize {
        if self.block_start[pos] {
            0
        } else if self.distinct {
            idx[pos - 1] + 1
        } else {
            idx[pos - 1]
        }
    }

    fn used_elsewhere(&self, pos: usize, v: u64, tuple: &[u64]) -> bool {
        tuple[..pos].contains(&v)
    }

    fn descend<F: FnMut(&[u64])>(
        &self,
        pos: usize,
        partial: i64,
        idx: &mut [usize],
        tuple: &mut [u64],
        visit: &mut F,
    ) {
        let h = self.coeffs.len();
        let u = self.coeffs[pos];
        let lo = self.lower_index(pos, idx);
        if pos + 1 == h {
            let rem = self.target - partial;
            if rem % u != 0 {
                return;
            }
            let v = rem / u;
            if v < 0 {
                return;
            }
            let v = v as u64;
            let Ok(i) = self.values.binary_search(&v) else {
                return;
            };
            if i < lo || (self.distinct && self.used_elsewhere(pos, v, tuple)) {
                return;
            }
            idx[pos] = i;
            tuple[pos] = v;
            if !self.reversal || self.reversal_canonical(tuple) {
                visit(tuple);
            }
            return;
        }
        let (smin, smax) = (self.suffix_min[pos + 1], self.suffix_max[pos + 1]);
        for i in lo..self.values.len() {
            let v = self.values[i];
            let rem = self.target - partial - u * v as i64;
            if u > 0 {
                if rem < smin {
                    break;
                }
                if rem > smax {
                    continue;
                }
            } else {
                if rem > smax {
                    break;
                }
                if rem < smin {
                    continue;
                }
            }
            if self.distinct && self.used_elsewhere(pos, v, tuple) {
                continue;
            }
            idx[pos] = i;
            tuple[pos] = v;
            self.descend(pos + 1, partial + u * v as i64, idx, tuple, visit);
        }
    }

    fn reversal_canonical(&self, tuple: &[u64]) -> bool {
        let mut r: Vec<u64> = tuple.iter().rev().copied().collect();
        block_sort(&mut r, &self.blocks);
        tuple <= r.as_slice()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn collect(form: &LinearForm, n: u64, k: u64) -> Vec<Vec<u64>> {
        let values: Vec<u64> = (0..=n).collect();
        let target = form.offset_value(n, k);
        let rev = form.is_balanced_midpoint(n, k);
        let mut out = Vec::new();
        CanonicalSearch::new(form, &values, target, rev, false).run(&mut |t| out.push(t.to_vec()));
        out
    }

    #[test]
    fn sums_of_two() {
        let f = LinearForm::new(&[1, 1]).unwrap();
        assert_eq!(collect(&f, 2, 2), vec![vec![0, 2], vec![1, 1]]);
        assert_eq!(collect(&f, 2, 0), vec![vec![0, 0]]);
    }

    #[test]
    fn reversal_merges_difference_classes() {
        let f = LinearForm::new(&[1, -1]).unwrap();
        assert_eq!(collect(&f, 1, 1), vec![vec![0, 0], vec![1, 1]]);
    }

    #[test]
    fn canonical_rep_is_orbit_minimum() {
        let f = LinearForm::new(&[1, 1, -1, -1]).unwrap();
        assert_eq!(canonical_rep(&f, &[3, 1, 4, 0], true), vec![0, 4, 1, 3]);
        assert_eq!(canonical_rep(&f, &[3, 1, 4, 0], false), vec![1, 3, 0, 4]);
    }
}
