//! Poisson approximation of `W_k`, the number of classes of `D(N, k)` realized in `A`.
//!
//! Indicator `X_L` of class `L` has mean `p^|S(L)|`. Two indicators are
//! dependent exactly when their ground sets meet, which fixes the Stein-Chen
//! neighbourhoods. Sums over meeting pairs are computed by inclusion-exclusion
//! over subsets `T` of each ground set, with `M(T)` the total weight of classes
//! whose ground set contains `T`, so no pair loop is needed.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::enumeration::{count_expressions, for_each_expression, ExpressionClass};
use crate::forms::{FormError, LinearForm};
use crate::scalar::Field;
use crate::sets::{RepresentationCounter, SetError, SubsetBitVector};
use crate::sim::derive_seed;

/// Largest `|D(N, k)|` for which the Stein-Chen sums are computed.
pub const ACCOUNTING_CAP: u64 = 1_000_000;
/// Largest `|D(N, k)|` streamed by [`mean_count`].
pub const MEAN_CAP: u64 = 100_000_000;
/// Exhaustive moments are used up to this many subsets.
pub const EXHAUSTIVE_MAX_POINTS: u64 = 20;
pub const EXHAUSTIVE_MAX_CLASSES: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PoissonError {
    #[error("{count} expressions exceed the cap of {cap}")]
    TooLarge { count: BigUint, cap: u64 },
    #[error("probability {0} is not in (0, 1]")]
    BadProbability(f64),
    #[error("at least one trial is required")]
    NoTrials,
    #[error("variance does not exceed the mean (epsilon = {epsilon}); the lower bound does not apply")]
    EpsilonNonpositive { epsilon: f64 },
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Set(#[from] SetError),
}

fn check_p<T: Field>(p: &T) -> Result<(), PoissonError> {
    if *p > T::zero() && *p <= T::one() {
        Ok(())
    } else {
        Err(PoissonError::BadProbability(p.to_f64().unwrap_or(f64::NAN)))
    }
}

fn capped_count(form: &LinearForm, n: u64, k: u64, cap: u64) -> Result<u64, PoissonError> {
    let count = count_expressions(form, n, k);
    match count.to_u64() {
        Some(c) if c <= cap => Ok(c),
        _ => Err(PoissonError::TooLarge { count, cap }),
    }
}

/// `mu_k = sum over classes of p^|S|`, exactly in the scalar `T`.
pub fn mean_count<T: Field>(form: &LinearForm, n: u64, k: u64, p: &T) -> Result<T, PoissonError> {
    check_p(p)?;
    form.check_offset(n, k)?;
    capped_count(form, n, k, MEAN_CAP)?;
    let mut by_size = vec![0u64; form.arity() + 1];
    for_each_expression(form, n, k, |c| by_size[c.ground_set.len()] += 1);
    Ok(by_size
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .fold(T::zero(), |acc, (j, &c)| acc + T::from_count(c) * p.ipow(j as u32)))
}

/// Stein-Chen quantities for `W_k` with dependency neighbourhoods given by
/// meeting ground sets. The diagonal pair is counted in `b1` but not in `b2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependencyAccounting<T> {
    pub n: u64,
    pub k: u64,
    pub classes: u64,
    pub mu: T,
    pub b1: T,
    pub b2: T,
    /// Always zero: neighbourhoods are exactly the dependency sets.
    pub b3: T,
    pub sum_p_sq: T,
    pub max_p: T,
    /// `Var(W) = mu + b2 - b1`.
    pub variance: T,
}

impl<T: Field> DependencyAccounting<T> {
    /// `min(1, 1/mu) (b1 + b2)`, bounding the total variation distance to `Po(mu)`.
    pub fn upper_bound(&self) -> T {
        let s = self.b1.clone() + self.b2.clone();
        if self.mu > T::one() {
            s / self.mu.clone()
        } else {
            s
        }
    }
}

/// Packs a sorted set of at most `h` elements of `[0, N]` into one integer.
fn set_key(elems: &[u64], radix: u128) -> Option<u128> {
    let mut key = 0u128;
    for &x in elems.iter().rev() {
        key = key.checked_mul(radix)?.checked_add(x as u128 + 1)?;
    }
    Some(key)
}

/// Calls `f` on every nonempty subset of `elems` (sorted in, sorted out).
fn for_each_subset(elems: &[u64], mut f: impl FnMut(&[u64])) {
    let mut buf = Vec::with_capacity(elems.len());
    for mask in 1u32..(1 << elems.len()) {
        buf.clear();
        buf.extend(elems.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &x)| x));
        f(&buf);
    }
}

pub fn stein_chen_bounds<T: Field>(
    form: &LinearForm,
    n: u64,
    k: u64,
    p: &T,
) -> Result<DependencyAccounting<T>, PoissonError> {
    check_p(p)?;
    form.check_offset(n, k)?;
    let classes = capped_count(form, n, k, ACCOUNTING_CAP)?;
    let radix = n as u128 + 2;
    let too_wide = || PoissonError::TooLarge { count: BigUint::from(classes), cap: ACCOUNTING_CAP };
    if set_key(&vec![n; form.arity()], radix).is_none() {
        return Err(too_wide());
    }
    let key = |s: &[u64]| set_key(s, radix).expect("width checked above");
    let powers: Vec<T> = (0..=form.arity() as u32).map(|j| p.ipow(j)).collect();

    // first pass: M(T), mu, sum of squares, max
    let mut m: HashMap<u128, T> = HashMap::new();
    let mut mu = T::zero();
    let mut sum_p_sq = T::zero();
    let mut max_p = T::zero();
    for_each_expression(form, n, k, |c| {
        let pl = powers[c.ground_set.len()].clone();
        for_each_subset(&c.ground_set, |t| {
            let e = m.entry(key(t)).or_insert_with(T::zero);
            *e = e.clone() + pl.clone();
        });
        mu = mu.clone() + pl.clone();
        sum_p_sq = sum_p_sq.clone() + pl.clone() * pl.clone();
        if pl > max_p {
            max_p = pl;
        }
    });

    // second pass: per class, weight of meeting classes and of joint successes
    let q = T::one() / p.clone() - T::one();
    let q_powers: Vec<T> = (0..=form.arity() as u32).map(|j| q.ipow(j)).collect();
    let mut b1 = T::zero();
    let mut b2 = T::zero();
    for_each_expression(form, n, k, |c| {
        let pl = powers[c.ground_set.len()].clone();
        let mut meeting = T::zero();
        let mut extra = T::zero();
        for_each_subset(&c.ground_set, |t| {
            let mt = m[&key(t)].clone();
            if t.len() % 2 == 1 {
                meeting = meeting.clone() + mt.clone();
            } else {
                meeting = meeting.clone() - mt.clone();
            }
            extra = extra.clone() + q_powers[t.len()].clone() * mt;
        });
        b1 = b1.clone() + pl.clone() * meeting.clone();
        // sum over meeting L' of p^|S u S'| is p_L (meeting + extra); drop L' = L
        b2 = b2.clone() + pl.clone() * (meeting + extra) - pl;
    });
    let variance = mu.clone() + b2.clone() - b1.clone();
    Ok(DependencyAccounting { n, k, classes, mu, b1, b2, b3: T::zero(), sum_p_sq, max_p, variance })
}

/// Empirical law of a nonnegative integer count.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EmpiricalPmf {
    pub trials: u64,
    pub counts: BTreeMap<u64, u64>,
}

impl EmpiricalPmf {
    pub fn from_values<I: IntoIterator<Item = u64>>(values: I) -> Self {
        let mut pmf = EmpiricalPmf::default();
        for v in values {
            pmf.record(v);
        }
        pmf
    }

    /// Exact distribution given as probabilities, for comparisons.
    pub fn record(&mut self, value: u64) {
        *self.counts.entry(value).or_insert(0) += 1;
        self.trials += 1;
    }

    pub fn merge(mut self, other: EmpiricalPmf) -> Self {
        for (v, c) in other.counts {
            *self.counts.entry(v).or_insert(0) += c;
        }
        self.trials += other.trials;
        self
    }

    pub fn prob(&self, value: u64) -> f64 {
        self.counts.get(&value).copied().unwrap_or(0) as f64 / self.trials as f64
    }

    pub fn probabilities(&self) -> BTreeMap<u64, f64> {
        self.counts.keys().map(|&v| (v, self.prob(v))).collect()
    }

    pub fn max_value(&self) -> Option<u64> {
        self.counts.keys().next_back().copied()
    }

    pub fn mean(&self) -> f64 {
        self.counts.iter().map(|(&v, &c)| v as f64 * c as f64).sum::<f64>() / self.trials as f64
    }

    /// `E[(W - center)^r]` under the empirical law.
    pub fn moment_about(&self, center: f64, r: i32) -> f64 {
        self.counts.iter().map(|(&v, &c)| (v as f64 - center).powi(r) * c as f64).sum::<f64>() / self.trials as f64
    }

    /// Standard error of the sample mean.
    pub fn mean_standard_error(&self) -> f64 {
        if self.trials < 2 {
            return f64::NAN;
        }
        let m = self.mean();
        let var = self.moment_about(m, 2) * self.trials as f64 / (self.trials - 1) as f64;
        (var / self.trials as f64).sqrt()
    }
}

/// Law of `W_k` over `trials` independent samples; trial `t` uses the subset
/// seeded by `derive_seed(master_seed, 0, t)`.
pub fn empirical_count_law(
    form: &LinearForm,
    n: u64,
    k: u64,
    p: f64,
    trials: u64,
    master_seed: u64,
) -> Result<EmpiricalPmf, PoissonError> {
    if trials == 0 {
        return Err(PoissonError::NoTrials);
    }
    let counter = RepresentationCounter::new(form, n, k, false)?;
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let a = SubsetBitVector::sample(n, p, derive_seed(master_seed, 0, t))?;
            Ok(EmpiricalPmf::from_values([counter.count(&a)]))
        })
        .try_reduce(EmpiricalPmf::default, |a, b| Ok(a.merge(b)))
}

/// Poisson probabilities `P(Z = j)` for `j = 0..=top`, by a log-space recursion.
fn poisson_pmf(mu: f64, top: u64) -> Vec<f64> {
    if mu == 0.0 {
        let mut v = vec![0.0; top as usize + 1];
        v[0] = 1.0;
        return v;
    }
    let ln_mu = mu.ln();
    let mut log = -mu;
    let mut out = Vec::with_capacity(top as usize + 1);
    for j in 0..=top {
        if j > 0 {
            log += ln_mu - (j as f64).ln();
        }
        out.push(log.exp());
    }
    out
}

/// Poisson mass strictly above `top`, summed until the remainder is below `1e-12`.
fn poisson_tail(mu: f64, top: u64) -> f64 {
    if mu == 0.0 {
        return 0.0;
    }
    let ln_mu = mu.ln();
    let mut log = -mu;
    for j in 1..=top {
        log += ln_mu - (j as f64).ln();
    }
    let mut tail = 0.0;
    let mut j = top;
    loop {
        j += 1;
        log += ln_mu - (j as f64).ln();
        let term = log.exp();
        tail += term;
        // past the mode terms shrink at least geometrically with ratio mu/(j+1)
        if j as f64 > mu {
            let ratio = mu / (j + 1) as f64;
            if term * ratio / (1.0 - ratio) < 1e-12 {
                break;
            }
        }
    }
    tail
}

/// Total variation distance between the empirical law and `Po(mu)`.
pub fn tv_to_poisson(pmf: &EmpiricalPmf, mu: f64) -> f64 {
    assert!(mu >= 0.0, "Poisson mean must be nonnegative");
    let top = pmf.max_value().unwrap_or(0);
    let po = poisson_pmf(mu, top);
    let body: f64 = po.iter().enumerate().map(|(j, &q)| (pmf.prob(j as u64) - q).abs()).sum();
    (0.5 * (body + poisson_tail(mu, top))).min(1.0)
}

/// Plug-in standard error of the empirical total variation distance.
pub fn tv_standard_error(pmf: &EmpiricalPmf) -> f64 {
    let n = pmf.trials as f64;
    0.5 * pmf.probabilities().values().map(|&q| (q * (1.0 - q) / n).sqrt()).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentSource {
    /// Summed over every subset of `{0..N}`.
    Exhaustive,
    /// Fourth moment sampled around the exact mean.
    MonteCarlo { trials: u64 },
}

/// Lower bound on the distance of `W` to `Po(mu)` for positively related indicators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundCertificate {
    pub mu: f64,
    pub variance: f64,
    pub fourth_central: f64,
    pub epsilon: f64,
    pub gamma: f64,
    pub psi: f64,
    pub bound: f64,
    pub source: MomentSource,
}

/// `bound = eps / (11 + 3 psi)` with `eps = Var/mu - 1`, `gamma = m4/mu - 1` and
/// `psi = (gamma/(mu eps))_+ + 3 eps + sum p^2/(mu^2 eps) + 3 Var max p/(mu eps)`.
pub fn certificate_from_moments(
    mu: f64,
    variance: f64,
    fourth_central: f64,
    sum_p_sq: f64,
    max_p: f64,
    source: MomentSource,
) -> Result<LowerBoundCertificate, PoissonError> {
    let epsilon = variance / mu - 1.0;
    if !(epsilon > 0.0) {
        return Err(PoissonError::EpsilonNonpositive { epsilon });
    }
    let gamma = fourth_central / mu - 1.0;
    let psi = (gamma / (mu * epsilon)).max(0.0)
        + 3.0 * epsilon
        + sum_p_sq / (mu * mu * epsilon)
        + 3.0 * variance * max_p / (mu * epsilon);
    Ok(LowerBoundCertificate {
        mu,
        variance,
        fourth_central,
        epsilon,
        gamma,
        psi,
        bound: epsilon / (11.0 + 3.0 * psi),
        source,
    })
}

/// Certificate for `W_k`. Mean and variance are always exact; the fourth
/// central moment is exact when every subset can be visited, otherwise
/// estimated from `trials` samples around the exact mean.
pub fn lower_bound_certificate(
    form: &LinearForm,
    n: u64,
    k: u64,
    p: f64,
    trials: u64,
    master_seed: u64,
) -> Result<LowerBoundCertificate, PoissonError> {
    let acc = stein_chen_bounds(form, n, k, &p)?;
    if n < EXHAUSTIVE_MAX_POINTS && acc.classes <= EXHAUSTIVE_MAX_CLASSES {
        let ex = exhaustive_law(form, n, k, &p)?;
        let mu = ex.mean();
        return certificate_from_moments(
            mu,
            ex.central_moment(2),
            ex.central_moment(4),
            acc.sum_p_sq,
            acc.max_p,
            MomentSource::Exhaustive,
        );
    }
    let pmf = empirical_count_law(form, n, k, p, trials, master_seed)?;
    certificate_from_moments(
        acc.mu,
        acc.variance,
        pmf.moment_about(acc.mu, 4),
        acc.sum_p_sq,
        acc.max_p,
        MomentSource::MonteCarlo { trials },
    )
}

/// Exact law of `W_k` obtained by weighting every subset of `{0..N}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveLaw<T> {
    /// `pmf[j] = P(W_k = j)`.
    pub pmf: Vec<T>,
}

impl<T: Field> ExhaustiveLaw<T> {
    pub fn prob_zero(&self) -> T {
        self.pmf[0].clone()
    }

    fn raw_moment(&self, r: u32) -> T {
        self.pmf
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (j, q)| acc + T::from_count(j as u64).ipow(r) * q.clone())
    }

    pub fn mean(&self) -> T {
        self.raw_moment(1)
    }

    pub fn central_moment(&self, r: u32) -> T {
        let m = self.mean();
        self.pmf.iter().enumerate().fold(T::zero(), |acc, (j, q)| {
            let d = T::from_count(j as u64) - m.clone();
            acc + d.ipow(r) * q.clone()
        })
    }

    pub fn variance(&self) -> T {
        self.central_moment(2)
    }
}

fn ground_masks(form: &LinearForm, n: u64, k: u64) -> Vec<u64> {
    let mut masks = Vec::new();
    for_each_expression(form, n, k, |c: ExpressionClass| {
        masks.push(c.ground_set.iter().fold(0u64, |m, &a| m | 1 << a));
    });
    masks
}

/// Visits all `2^(N+1)` subsets; intended for `N < 20`.
pub fn exhaustive_law<T: Field>(form: &LinearForm, n: u64, k: u64, p: &T) -> Result<ExhaustiveLaw<T>, PoissonError> {
    check_p(p)?;
    form.check_offset(n, k)?;
    assert!(n < 63, "exhaustive enumeration needs N < 63");
    let masks = ground_masks(form, n, k);
    let points = n as u32 + 1;
    let q = T::one() - p.clone();
    let weights: Vec<T> = (0..=points).map(|s| p.ipow(s) * q.ipow(points - s)).collect();
    let mut pmf = vec![T::zero(); masks.len() + 1];
    for a in 0u64..(1 << points) {
        let w = masks.iter().filter(|&&m| m & !a == 0).count();
        pmf[w] = pmf[w].clone() + weights[a.count_ones() as usize].clone();
    }
    Ok(ExhaustiveLaw { pmf })
}

/// `P(W_k = 0)` by inclusion-exclusion over sets of classes; needs at most 24 classes.
pub fn prob_none_realized<T: Field>(form: &LinearForm, n: u64, k: u64, p: &T) -> Result<T, PoissonError> {
    check_p(p)?;
    form.check_offset(n, k)?;
    assert!(n < 64, "ground sets are packed into 64-bit masks");
    let masks = ground_masks(form, n, k);
    assert!(masks.len() <= 24, "inclusion-exclusion over {} classes is too large", masks.len());
    let powers: Vec<T> = (0..=n as u32 + 1).map(|j| p.ipow(j)).collect();
    let mut total = T::zero();
    for pick in 0u32..(1 << masks.len()) {
        let union = masks.iter().enumerate().filter(|(i, _)| pick >> i & 1 == 1).fold(0u64, |u, (_, &m)| u | m);
        let term = powers[union.count_ones() as usize].clone();
        total = if pick.count_ones() % 2 == 0 { total + term } else { total - term };
    }
    Ok(total)
}
