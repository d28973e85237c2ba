//! Exact counting of bounded partitions and weighted compositions.

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Number of `y` with `0 <= y_i <= bounds[i]` and `sum weights[i] * y_i = target`.
pub fn count_weighted_solutions(weights: &[u64], bounds: &[u64], target: u64) -> BigUint {
    weighted_solution_table(weights, bounds, target).swap_remove(target as usize)
}

/// Solution counts for every target `0..=max_target` at once.
///
/// One sliding-window pass per variable; weights must be positive.
pub fn weighted_solution_table(weights: &[u64], bounds: &[u64], max_target: u64) -> Vec<BigUint> {
    assert_eq!(weights.len(), bounds.len());
    let k = max_target as usize;
    let mut dp = vec![BigUint::zero(); k + 1];
    dp[0] = BigUint::one();
    for (&w, &b) in weights.iter().zip(bounds) {
        assert!(w > 0, "weights must be positive");
        let w = w as usize;
        // span of the window in units of w; saturate so huge bounds never overflow
        let span = (b as usize).saturating_add(1).saturating_mul(w);
        let mut next = vec![BigUint::zero(); k + 1];
        for t in 0..=k {
            let mut acc = dp[t].clone();
            if t >= w {
                acc += &next[t - w];
            }
            if t >= span {
                acc -= &dp[t - span];
            }
            next[t] = acc;
        }
        dp = next;
    }
    dp
}

/// Coefficients of the Gaussian binomial `[n choose j]_q`, lowest degree first.
pub fn gaussian_binomial(n: usize, j: usize) -> Vec<BigUint> {
    if j > n {
        return vec![BigUint::zero()];
    }
    // row[r] holds [m choose r]_q for the current m, r <= j
    let mut row: Vec<Vec<BigUint>> = vec![vec![BigUint::one()]];
    for m in 1..=n {
        let top = m.min(j);
        let mut next: Vec<Vec<BigUint>> = Vec::with_capacity(top + 1);
        for r in 0..=top {
            if r == 0 || r == m {
                next.push(vec![BigUint::one()]);
                continue;
            }
            // [m, r] = [m-1, r-1] + q^r [m-1, r]
            let a = &row[r - 1];
            let b = &row[r];
            let deg = r * (m - r);
            let mut poly = vec![BigUint::zero(); deg + 1];
            for (i, c) in a.iter().enumerate() {
                poly[i] += c;
            }
            for (i, c) in b.iter().enumerate() {
                poly[i + r] += c;
            }
            next.push(poly);
        }
        row = next;
    }
    row.swap_remove(j)
}

/// Number of partitions of `k` into at most `h` parts, each at most `n`:
/// the coefficient of `q^k` in `[n + h choose h]_q`. Zero when `k > h*n`.
pub fn partition_count(h: usize, k: u64, n: u64) -> BigUint {
    assert!(h >= 1, "at least one part");
    if k > h as u64 * n {
        return BigUint::zero();
    }
    let poly = gaussian_binomial(n as usize + h, h);
    poly.get(k as usize).cloned().unwrap_or_default()
}

/// The whole sequence `p_h(0, n), ..., p_h(h*n, n)`.
pub fn partition_sequence(h: usize, n: u64) -> Vec<BigUint> {
    assert!(h >= 1, "at least one part");
    gaussian_binomial(n as usize + h, h)
}

/// Number of tuples `a` in `[0, n]^h` with `sum a_i = k` and `a_i = b_i (mod u_i)`.
pub fn weak_composition_count(u: &[i64], b: &[i64], k: u64, n: u64) -> BigUint {
    assert_eq!(u.len(), b.len(), "coefficient and residue lists differ in length");
    assert!(u.iter().all(|&x| x != 0), "moduli must be nonzero");
    if k > u.len() as u64 * n {
        return BigUint::zero();
    }
    // a_i = r_i + |u_i| y_i with 0 <= y_i <= (n - r_i) / |u_i|
    let mut weights = Vec::with_capacity(u.len());
    let mut bounds = Vec::with_capacity(u.len());
    let mut shift = 0u64;
    for (&ui, &bi) in u.iter().zip(b) {
        let modulus = ui.unsigned_abs();
        let r = bi.rem_euclid(modulus as i64) as u64;
        if r > n {
            return BigUint::zero();
        }
        shift += r;
        weights.push(modulus);
        bounds.push((n - r) / modulus);
    }
    if shift > k {
        return BigUint::zero();
    }
    count_weighted_solutions(&weights, &bounds, k - shift)
}
