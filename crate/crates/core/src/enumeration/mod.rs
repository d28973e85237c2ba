//! L-expressions: enumeration, exact counts, partitions and compositions, and
//! the Irwin-Hall leading constants.

mod burnside;
mod expressions;
mod fit;
mod irwin_hall;
mod partitions;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::forms::LinearForm;

pub use burnside::{count_all_offsets, count_expressions};
pub use expressions::{canonical_rep, ExpressionClass};
pub(crate) use expressions::CanonicalSearch;
pub use fit::{asymptotic_fit_report, CountTable, FitRow};
pub use irwin_hall::{
    digit_sum_weights, irwin_hall_density, lambda_k, IrwinHall, ShiftedDensity, MAX_IRWIN_HALL_ARITY,
};
pub use partitions::{
    count_weighted_solutions, gaussian_binomial, partition_count, partition_sequence,
    weak_composition_count, weighted_solution_table,
};

/// Default ceiling on materialized expression lists.
pub const ENUMERATION_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerationError {
    #[error("{count} expressions exceed the enumeration cap of {cap}; count them instead")]
    TooLarge { count: BigUint, cap: u64 },
}

/// Every class of `D(N, k)`, canonical representatives in lexicographic order.
/// Offsets outside `[0, m*N]` give an empty list.
pub fn enumerate_expressions(
    form: &LinearForm,
    n: u64,
    k: u64,
) -> Result<Vec<ExpressionClass>, EnumerationError> {
    enumerate_expressions_capped(form, n, k, ENUMERATION_CAP)
}

pub fn enumerate_expressions_capped(
    form: &LinearForm,
    n: u64,
    k: u64,
    cap: u64,
) -> Result<Vec<ExpressionClass>, EnumerationError> {
    let count = count_expressions(form, n, k);
    if count.to_u64().is_none_or(|c| c > cap) {
        return Err(EnumerationError::TooLarge { count, cap });
    }
    let mut out = Vec::with_capacity(count.to_usize().unwrap_or(0));
    for_each_expression(form, n, k, |class| out.push(class));
    Ok(out)
}

/// Streams the classes of `D(N, k)` without materializing them.
pub fn for_each_expression<F: FnMut(ExpressionClass)>(form: &LinearForm, n: u64, k: u64, mut visit: F) {
    if k > form.max_offset(n) {
        return;
    }
    let values: Vec<u64> = (0..=n).collect();
    let target = form.offset_value(n, k);
    let reversal = form.is_balanced_midpoint(n, k);
    CanonicalSearch::new(form, &values, target, reversal, false)
        .run(&mut |t| visit(ExpressionClass::from_rep(t, target)));
}

/// `|D(N, k)|` for the form as originally written, before gcd normalization.
/// Only multiples of the gcd are reachable.
pub fn count_expressions_unnormalized(form: &LinearForm, n: u64, k: u64) -> BigUint {
    let g = form.gcd_factor();
    if !k.is_multiple_of(g) {
        return BigUint::zero();
    }
    count_expressions(form, n, k / g)
}
