//! Orbit counting for L-expressions.
//!
//! `|D(N, k)|` is the number of orbits of solution tuples under the redundancy
//! group, so by Burnside it is the average number of fixed solutions. A tuple
//! fixed by a permutation is constant on its cycles, so each cycle becomes one
//! variable whose coefficient is the sum of the coefficients it covers.
//!
//! Inside the coefficient stabilizer every cycle stays in one block, giving
//! coefficient `len * u`; fixed-point counts depend only on the cycle type per
//! block, so we sum over cycle types weighted by class sizes.
//!
//! At a balanced midpoint the reversal coset is added. There every cycle
//! alternates between the block of `v` and the block of `-v`, so its signed
//! coefficient sum is zero and each cycle contributes a free factor `N + 1`.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::partitions::{count_weighted_solutions, weighted_solution_table};
use crate::forms::LinearForm;

/// (cycle lengths, number of permutations with those lengths)
type CycleTypes = Vec<(Vec<u64>, u128)>;

/// Cycle types of `S_b`.
fn cycle_types(b: usize) -> CycleTypes {
    fn parts(remaining: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining == 0 {
            out.push(cur.clone());
            return;
        }
        for p in (1..=max.min(remaining)).rev() {
            cur.push(p);
            parts(remaining - p, p, cur, out);
            cur.pop();
        }
    }
    let mut all = Vec::new();
    parts(b, b, &mut Vec::new(), &mut all);
    let b_fact: u128 = (1..=b as u128).product();
    all.into_iter()
        .map(|lens| {
            let mut denom: u128 = 1;
            let mut i = 0;
            while i < lens.len() {
                let l = lens[i];
                let mut mult = 0u128;
                while i < lens.len() && lens[i] == l {
                    mult += 1;
                    i += 1;
                }
                denom *= (l as u128).pow(mult as u32) * (1..=mult).product::<u128>();
            }
            (lens.into_iter().map(|l| l as u64).collect(), b_fact / denom)
        })
        .collect()
}

/// Fixed-point weight vectors of the coefficient stabilizer, with multiplicities.
///
/// Keys are sorted so permutations with the same effective weights share one DP.
fn stabilizer_terms(form: &LinearForm) -> HashMap<Vec<u64>, u128> {
    let coeffs = form.coeffs();
    let per_block: Vec<(u64, CycleTypes)> = form
        .blocks()
        .iter()
        .map(|b| (coeffs[b.start].unsigned_abs(), cycle_types(b.len())))
        .collect();
    let mut terms = HashMap::new();
    collect_terms(&per_block, 0, 1, &mut Vec::new(), &mut terms);
    terms
}

fn collect_terms(
    per_block: &[(u64, CycleTypes)],
    block: usize,
    multiplicity: u128,
    weights: &mut Vec<u64>,
    terms: &mut HashMap<Vec<u64>, u128>,
) {
    if block == per_block.len() {
        let mut key = weights.clone();
        key.sort_unstable();
        *terms.entry(key).or_insert(0) += multiplicity;
        return;
    }
    let (u, types) = &per_block[block];
    for (lens, count) in types {
        let before = weights.len();
        weights.extend(lens.iter().map(|l| l * u));
        collect_terms(per_block, block + 1, multiplicity * count, weights, terms);
        weights.truncate(before);
    }
}

/// Fixed points of the reversal coset at a balanced midpoint.
fn reversal_coset_sum(form: &LinearForm, n: u64) -> BigUint {
    let coeffs = form.coeffs();
    let mut coset = BigUint::one();
    for b in form.blocks().iter().filter(|b| coeffs[b.start] > 0) {
        let len = b.len() as u64;
        // each pair of matched blocks contributes b! * (N+1)(N+2)...(N+b)
        let fact: BigUint = (1..=len).map(BigUint::from).product();
        let rising: BigUint = (0..len).map(|i| BigUint::from(n + 1 + i)).product();
        coset *= fact * rising;
    }
    coset
}

fn orbit_average(form: &LinearForm, n: u64, k: u64, mut total: BigUint) -> BigUint {
    let mut group_order = BigUint::from(form.symmetry_order());
    if form.is_balanced_midpoint(n, k) {
        total += reversal_coset_sum(form, n);
        group_order *= 2u32;
    }
    let (q, r) = total.div_rem(&group_order);
    debug_assert!(r.is_zero(), "Burnside average must be integral");
    q
}

/// Exact `|D(N, k)|`. Offsets beyond `m*N` have no expressions.
pub fn count_expressions(form: &LinearForm, n: u64, k: u64) -> BigUint {
    if k > form.max_offset(n) {
        return BigUint::zero();
    }
    let mut total = BigUint::zero();
    for (weights, mult) in stabilizer_terms(form) {
        let fixed = count_weighted_solutions(&weights, &vec![n; weights.len()], k);
        total += fixed * BigUint::from(mult);
    }
    orbit_average(form, n, k, total)
}

/// Counts for every offset `0..=m*N`, sharing one DP table per weight vector.
pub fn count_all_offsets(form: &LinearForm, n: u64) -> Vec<BigUint> {
    let top = form.max_offset(n);
    let mut totals = vec![BigUint::zero(); top as usize + 1];
    for (weights, mult) in stabilizer_terms(form) {
        let table = weighted_solution_table(&weights, &vec![n; weights.len()], top);
        let mult = BigUint::from(mult);
        for (t, c) in totals.iter_mut().zip(table) {
            *t += c * &mult;
        }
    }
    totals
        .into_iter()
        .enumerate()
        .map(|(k, t)| orbit_average(form, n, k as u64, t))
        .collect()
}
