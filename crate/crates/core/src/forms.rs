//! Z-linear forms `u_1 x_1 + ... + u_h x_h` and their structural constants.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported arity. Keeps factorials and symmetry orders inside `u64`.
pub const MAX_ARITY: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormError {
    #[error("coefficient at position {index} is zero")]
    ZeroCoefficient { index: usize },
    #[error("a linear form needs at least two coefficients, got {0}")]
    ArityTooSmall(usize),
    #[error("arity {0} exceeds the supported maximum of {MAX_ARITY}")]
    ArityTooLarge(usize),
    #[error("offset {k} outside [0, {max}]")]
    OffsetOutOfRange { k: u64, max: u64 },
    #[error("cannot parse coefficient list {0:?}")]
    Parse(String),
}

/// A linear form with nonzero integer coefficients.
///
/// Coefficients are stored sorted nonincreasing (positives first, then
/// negatives) and divided by their gcd; the removed factor is kept in
/// [`LinearForm::gcd_factor`] so results can be translated back.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FormRepr", into = "FormRepr")]
pub struct LinearForm {
    coeffs: Vec<i64>,
    gcd_factor: u64,
    positives: usize,
    pos_sum: u64,
    neg_sum: u64,
    theta: u64,
    balanced: bool,
}

#[derive(Serialize, Deserialize)]
struct FormRepr {
    coeffs: Vec<i64>,
    gcd_factor: u64,
}

impl From<LinearForm> for FormRepr {
    fn from(f: LinearForm) -> Self {
        FormRepr { coeffs: f.coeffs, gcd_factor: f.gcd_factor }
    }
}

impl TryFrom<FormRepr> for LinearForm {
    type Error = FormError;

    fn try_from(r: FormRepr) -> Result<Self, FormError> {
        let g = r.gcd_factor.max(1) as i64;
        let raw: Vec<i64> = r.coeffs.iter().map(|&c| c * g).collect();
        LinearForm::new(&raw)
    }
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

impl LinearForm {
    pub fn new(raw: &[i64]) -> Result<Self, FormError> {
        if raw.len() < 2 {
            return Err(FormError::ArityTooSmall(raw.len()));
        }
        if raw.len() > MAX_ARITY {
            return Err(FormError::ArityTooLarge(raw.len()));
        }
        if let Some(index) = raw.iter().position(|&c| c == 0) {
            return Err(FormError::ZeroCoefficient { index });
        }
        let g = raw.iter().fold(0i64, |acc, &c| acc.gcd(&c)) as u64;
        let mut coeffs: Vec<i64> = raw.iter().map(|&c| c / g as i64).collect();
        coeffs.sort_unstable_by(|a, b| b.cmp(a));

        let positives = coeffs.iter().filter(|&&c| c > 0).count();
        let pos_sum = coeffs.iter().filter(|&&c| c > 0).map(|&c| c as u64).sum();
        let neg_sum = coeffs.iter().filter(|&&c| c < 0).map(|&c| c.unsigned_abs()).sum();

        let mut theta = 1u64;
        let mut run = 1usize;
        for w in coeffs.windows(2) {
            if w[0] == w[1] {
                run += 1;
            } else {
                theta *= factorial(run);
                run = 1;
            }
        }
        theta *= factorial(run);

        // sorted nonincreasing, so the multiset is symmetric iff u_i = -u_{h-i+1}
        let h = coeffs.len();
        let balanced = (0..h).all(|i| coeffs[i] == -coeffs[h - 1 - i]);

        Ok(LinearForm { coeffs, gcd_factor: g, positives, pos_sum, neg_sum, theta, balanced })
    }

    /// Normalized coefficients, sorted nonincreasing.
    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn original_coeffs(&self) -> Vec<i64> {
        self.coeffs.iter().map(|&c| c * self.gcd_factor as i64).collect()
    }

    pub fn arity(&self) -> usize {
        self.coeffs.len()
    }

    /// Number of positive coefficients.
    pub fn positives(&self) -> usize {
        self.positives
    }

    /// Sum of the positive coefficients.
    pub fn pos_sum(&self) -> u64 {
        self.pos_sum
    }

    /// Sum of the absolute values of the negative coefficients.
    pub fn neg_sum(&self) -> u64 {
        self.neg_sum
    }

    /// `pos_sum + neg_sum`; the image of `{0..N}` spans `m*N + 1` integers.
    pub fn total(&self) -> u64 {
        self.pos_sum + self.neg_sum
    }

    pub fn gcd_factor(&self) -> u64 {
        self.gcd_factor
    }

    pub fn is_balanced(&self) -> bool {
        self.balanced
    }

    /// Order of the group of coordinate permutations fixing the coefficient vector.
    pub fn symmetry_order(&self) -> u64 {
        self.theta
    }

    /// Product of `|u_i|`.
    pub fn abs_product(&self) -> u64 {
        self.coeffs.iter().map(|c| c.unsigned_abs()).product()
    }

    /// Maximal runs of equal coefficients.
    pub fn blocks(&self) -> Vec<Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.coeffs.len() {
            if i == self.coeffs.len() || self.coeffs[i] != self.coeffs[start] {
                out.push(start..i);
                start = i;
            }
        }
        out
    }

    /// Largest admissible offset `m*N`.
    pub fn max_offset(&self, n: u64) -> u64 {
        self.total() * n
    }

    /// Value range `[-d*N, s*N]` of the form over `{0..N}^h`.
    pub fn value_range(&self, n: u64) -> (i64, i64) {
        (-((self.neg_sum * n) as i64), (self.pos_sum * n) as i64)
    }

    /// The value `-d*N + k` an offset refers to.
    pub fn offset_value(&self, n: u64, k: u64) -> i64 {
        k as i64 - (self.neg_sum * n) as i64
    }

    pub fn check_offset(&self, n: u64, k: u64) -> Result<(), FormError> {
        let max = self.max_offset(n);
        if k > max {
            return Err(FormError::OffsetOutOfRange { k, max });
        }
        Ok(())
    }

    /// True when `(N, k)` is the midpoint of a balanced form, where reversal
    /// joins the redundancy group.
    pub fn is_balanced_midpoint(&self, n: u64, k: u64) -> bool {
        self.balanced && 2 * k == self.max_offset(n)
    }

    pub fn evaluate(&self, xs: &[u64]) -> i64 {
        debug_assert_eq!(xs.len(), self.coeffs.len());
        self.coeffs.iter().zip(xs).map(|(&u, &x)| u * x as i64).sum()
    }

    /// Order of the redundancy group at offset `k`: doubled at a balanced midpoint.
    pub fn redundancy_order(&self, n: u64, k: u64) -> Result<u64, FormError> {
        self.check_offset(n, k)?;
        Ok(if self.is_balanced_midpoint(n, k) { 2 * self.theta } else { self.theta })
    }

    /// `(g - 1) * sum |v_i|` for gcd factor `g` and normalized coefficients `v`.
    ///
    /// Multiplied by `N` this is the number of extra integers the original
    /// form's range contains beyond the normalized one; the images have equal
    /// size, so see [`LinearForm::original_complement_size`].
    pub fn complement_adjustment(&self) -> u64 {
        (self.gcd_factor - 1) * self.total()
    }

    /// Translate a complement size computed for the normalized form back to the
    /// original (unnormalized) coefficients.
    pub fn original_complement_size(&self, normalized_complement: u64, n: u64) -> u64 {
        normalized_complement + self.complement_adjustment() * n
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.original_coeffs().iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for LinearForm {
    type Err = FormError;

    /// Parses a comma separated list such as `1,1,-1`.
    fn from_str(s: &str) -> Result<Self, FormError> {
        let raw: Result<Vec<i64>, _> = s
            .trim()
            .trim_start_matches('[')
            .trim_end_matches(']')
            .split(',')
            .map(|t| t.trim().parse::<i64>())
            .collect();
        let raw = raw.map_err(|_| FormError::Parse(s.to_string()))?;
        LinearForm::new(&raw)
    }
}

/// `theta_L`, the order of the coefficient stabilizer.
pub fn symmetry_order(form: &LinearForm) -> u64 {
    form.symmetry_order()
}

pub fn redundancy_order(form: &LinearForm, n: u64, k: u64) -> Result<u64, FormError> {
    form.redundancy_order(n, k)
}

pub fn complement_adjustment(form: &LinearForm) -> u64 {
    form.complement_adjustment()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn permutations(h: usize) -> Vec<Vec<usize>> {
        if h == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(h - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, h - 1);
                out.push(q);
            }
        }
        out
    }

    fn brute_theta(coeffs: &[i64]) -> u64 {
        permutations(coeffs.len())
            .iter()
            .filter(|s| s.iter().enumerate().all(|(i, &j)| coeffs[j] == coeffs[i]))
            .count() as u64
    }

    #[test]
    fn constants_of_one_one_minus_one() {
        let f = LinearForm::new(&[1, 1, -1]).unwrap();
        assert_eq!(f.arity(), 3);
        assert_eq!(f.positives(), 2);
        assert_eq!(f.pos_sum(), 2);
        assert_eq!(f.neg_sum(), 1);
        assert_eq!(f.total(), 3);
        assert_eq!(f.symmetry_order(), 2);
        assert!(!f.is_balanced());
        assert_eq!(f.gcd_factor(), 1);
    }

    #[test]
    fn gcd_is_divided_out() {
        let f = LinearForm::new(&[2, -2]).unwrap();
        assert_eq!(f.coeffs(), &[1, -1]);
        assert_eq!(f.gcd_factor(), 2);
        assert_eq!(f.symmetry_order(), 1);
        assert!(f.is_balanced());
    }

    #[test]
    fn zero_and_short_rejected() {
        assert_eq!(LinearForm::new(&[0, 1]), Err(FormError::ZeroCoefficient { index: 0 }));
        assert_eq!(LinearForm::new(&[3]), Err(FormError::ArityTooSmall(1)));
        assert!(matches!(LinearForm::new(&[1; 21]), Err(FormError::ArityTooLarge(21))));
    }

    #[test]
    fn symmetry_orders() {
        assert_eq!(symmetry_order(&LinearForm::new(&[1, 1, 1]).unwrap()), 6);
        assert_eq!(symmetry_order(&LinearForm::new(&[2, 2, 2, -1]).unwrap()), 6);
        assert_eq!(symmetry_order(&LinearForm::new(&[3, 1, -2]).unwrap()), 1);
    }

    #[test]
    fn redundancy_doubles_only_at_balanced_midpoint() {
        let diff = LinearForm::new(&[1, -1]).unwrap();
        assert_eq!(redundancy_order(&diff, 10, 10).unwrap(), 2);
        assert_eq!(redundancy_order(&diff, 10, 3).unwrap(), 1);
        let f = LinearForm::new(&[1, 1, -1]).unwrap();
        assert_eq!(redundancy_order(&f, 10, 15).unwrap(), 2);
        assert_eq!(
            redundancy_order(&diff, 10, 21),
            Err(FormError::OffsetOutOfRange { k: 21, max: 20 })
        );
    }

    #[test]
    fn complement_adjustments() {
        assert_eq!(complement_adjustment(&LinearForm::new(&[1, -1]).unwrap()), 0);
        assert_eq!(complement_adjustment(&LinearForm::new(&[2, -2]).unwrap()), 2);
        assert_eq!(complement_adjustment(&LinearForm::new(&[3, 3, -3]).unwrap()), 6);
    }

    #[test]
    fn sorting_and_parsing() {
        let f: LinearForm = "1,-2,3,-1".parse().unwrap();
        assert_eq!(f.coeffs(), &[3, 1, -1, -2]);
        assert_eq!(f.to_string(), "3,1,-1,-2");
        assert!("1,x".parse::<LinearForm>().is_err());
        let g: LinearForm = "[2, -4]".parse().unwrap();
        assert_eq!(g.to_string(), "2,-4");
        assert_eq!(g.coeffs(), &[1, -2]);
    }

    #[test]
    fn json_carries_normalized_coeffs_and_gcd() {
        let f = LinearForm::new(&[3, 3, -3]).unwrap();
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(json, r#"{"coeffs":[1,1,-1],"gcd_factor":3}"#);
        let back: LinearForm = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn blocks_follow_equal_runs() {
        let f = LinearForm::new(&[2, 1, 1, -1, -1, -1]).unwrap();
        assert_eq!(f.blocks(), vec![0..1, 1..3, 3..6]);
    }

    proptest! {
        #[test]
        fn theta_matches_permutation_count(raw in prop::collection::vec(prop_oneof![-3i64..=-1, 1i64..=3], 2..=7)) {
            let f = LinearForm::new(&raw).unwrap();
            prop_assert_eq!(f.symmetry_order(), brute_theta(f.coeffs()));
        }

        #[test]
        fn normalization_is_idempotent(raw in prop::collection::vec(prop_oneof![-6i64..=-1, 1i64..=6], 2..=6)) {
            let f = LinearForm::new(&raw).unwrap();
            let again = LinearForm::new(f.coeffs()).unwrap();
            prop_assert_eq!(again.gcd_factor(), 1);
            prop_assert_eq!(again.coeffs(), f.coeffs());
            prop_assert_eq!(again.symmetry_order(), f.symmetry_order());
            prop_assert_eq!(again.is_balanced(), f.is_balanced());
        }

        #[test]
        fn balanced_forms_are_antisymmetric(half in prop::collection::vec(1i64..=4, 1..=4)) {
            let mut raw = half.clone();
            raw.extend(half.iter().map(|c| -c));
            let f = LinearForm::new(&raw).unwrap();
            prop_assert!(f.is_balanced());
            let h = f.arity();
            prop_assert_eq!(f.positives(), h / 2);
            prop_assert_eq!(f.pos_sum(), f.neg_sum());
            for i in 0..h {
                prop_assert_eq!(f.coeffs()[i], -f.coeffs()[h - 1 - i]);
            }
        }
    }
}
