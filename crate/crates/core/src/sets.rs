//! Random subsets of `{0..N}` and their exact images under a linear form.

use std::io::Write;

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::Bits;
use crate::enumeration::{count_expressions, for_each_expression, CanonicalSearch};
use crate::forms::{FormError, LinearForm};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SetError {
    #[error("inclusion probability {p} is not in (0, 1)")]
    BadProbability { p: f64 },
    #[error("element {element} lies outside [0, {n_max}]")]
    ElementOutOfRange { element: u64, n_max: u64 },
    #[error(transparent)]
    Form(#[from] FormError),
}

/// Membership vector over `{0..N}` with a cached cardinality.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SubsetRepr", into = "SubsetRepr")]
pub struct SubsetBitVector {
    n_max: u64,
    bits: Bits,
    cardinality: usize,
}

#[derive(Serialize, Deserialize)]
struct SubsetRepr {
    n_max: u64,
    elements: Vec<u64>,
}

impl From<SubsetBitVector> for SubsetRepr {
    fn from(s: SubsetBitVector) -> Self {
        SubsetRepr { n_max: s.n_max, elements: s.elements() }
    }
}

impl TryFrom<SubsetRepr> for SubsetBitVector {
    type Error = SetError;
    fn try_from(r: SubsetRepr) -> Result<Self, SetError> {
        SubsetBitVector::from_elements(r.n_max, r.elements)
    }
}

impl SubsetBitVector {
    pub fn empty(n_max: u64) -> Self {
        SubsetBitVector { n_max, bits: Bits::new(n_max as usize + 1), cardinality: 0 }
    }

    pub fn full(n_max: u64) -> Self {
        let mut s = Self::empty(n_max);
        for i in 0..=n_max as usize {
            s.bits.set(i);
        }
        s.cardinality = n_max as usize + 1;
        s
    }

    pub fn from_elements<I: IntoIterator<Item = u64>>(n_max: u64, elements: I) -> Result<Self, SetError> {
        let mut s = Self::empty(n_max);
        for e in elements {
            if e > n_max {
                return Err(SetError::ElementOutOfRange { element: e, n_max });
            }
            s.bits.set(e as usize);
        }
        s.cardinality = s.bits.count_ones();
        Ok(s)
    }

    /// Binomial random subset: position `i` is included when the `i`-th draw of
    /// `gen_bool(p)` from `ChaCha8Rng::seed_from_u64(seed)` succeeds.
    pub fn sample(n_max: u64, p: f64, seed: u64) -> Result<Self, SetError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(SetError::BadProbability { p });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = Self::empty(n_max);
        for i in 0..=n_max as usize {
            if rng.gen_bool(p) {
                s.bits.set(i);
                s.cardinality += 1;
            }
        }
        Ok(s)
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    pub fn len(&self) -> usize {
        self.cardinality
    }

    pub fn is_empty(&self) -> bool {
        self.cardinality == 0
    }

    pub fn contains(&self, x: u64) -> bool {
        self.bits.get(x as usize)
    }

    pub fn bits(&self) -> &Bits {
        &self.bits
    }

    /// Sorted elements.
    pub fn elements(&self) -> Vec<u64> {
        self.bits.iter_ones().map(|i| i as u64).collect()
    }

    /// `{N - a : a in A}`.
    pub fn reflect(&self) -> Self {
        let mut r = Self::empty(self.n_max);
        for i in self.bits.iter_ones() {
            r.bits.set(self.n_max as usize - i);
        }
        r.cardinality = self.cardinality;
        r
    }

    pub fn is_subset_of(&self, other: &SubsetBitVector) -> bool {
        self.n_max <= other.n_max && self.bits.is_subset_of(&other.bits)
    }
}

/// `L(A)` as a membership vector over `[-dN, sN]`; position `j` holds value `j - dN`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageSet {
    form: LinearForm,
    n_max: u64,
    offset: u64,
    bits: Bits,
}

impl ImageSet {
    pub fn form(&self) -> &LinearForm {
        &self.form
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    pub fn offset(&self) -> u64 {
        self.offset
    }

    pub fn bits(&self) -> &Bits {
        &self.bits
    }

    pub fn contains_value(&self, v: i64) -> bool {
        let j = v + self.offset as i64;
        j >= 0 && self.bits.get(j as usize)
    }

    pub fn contains_offset(&self, k: u64) -> bool {
        self.bits.get(k as usize)
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Size of the range `[-dN, sN]`, that is `mN + 1`.
    pub fn range_size(&self) -> u64 {
        self.bits.len() as u64
    }

    pub fn complement_size(&self) -> u64 {
        self.range_size() - self.len() as u64
    }

    pub fn values(&self) -> impl Iterator<Item = i64> + '_ {
        let off = self.offset as i64;
        self.bits.iter_ones().map(move |j| j as i64 - off)
    }

    /// CSV rows `value,present` over the whole range.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["value", "present"])?;
        for j in 0..self.bits.len() {
            let v = j as i64 - self.offset as i64;
            w.write_record([v.to_string(), u8::from(self.bits.get(j)).to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Which kernel computes the image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    #[default]
    Auto,
    /// Loop over `h`-tuples of `A`.
    Tuple,
    /// Iterated Minkowski sums by shifted word unions.
    ShiftedUnion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageOptions {
    /// Require the summands to be pairwise distinct elements of `A`.
    pub distinct: bool,
    pub kernel: Kernel,
    /// `Auto` uses tuples while `|A|^h <= crossover * m * N * |A|`.
    pub crossover: f64,
}

impl Default for ImageOptions {
    fn default() -> Self {
        ImageOptions { distinct: false, kernel: Kernel::Auto, crossover: 8.0 }
    }
}

impl ImageOptions {
    fn use_tuples(&self, form: &LinearForm, subset: &SubsetBitVector) -> bool {
        // distinct summands are not a set operation, so only the tuple loop honours them
        if self.distinct {
            return true;
        }
        match self.kernel {
            Kernel::Tuple => true,
            Kernel::ShiftedUnion => false,
            Kernel::Auto => {
                let a = subset.len() as f64;
                let work = a.powi(form.arity() as i32);
                work <= self.crossover * form.total() as f64 * subset.n_max() as f64 * a
            }
        }
    }
}

/// Exact `L(A)` with the default kernel choice.
pub fn evaluate_image(form: &LinearForm, subset: &SubsetBitVector) -> ImageSet {
    evaluate_image_with(form, subset, &ImageOptions::default())
}

pub fn evaluate_image_with(form: &LinearForm, subset: &SubsetBitVector, opts: &ImageOptions) -> ImageSet {
    let n = subset.n_max();
    let offset = form.neg_sum() * n;
    let len = (form.total() * n) as usize + 1;
    let bits = if subset.is_empty() {
        Bits::new(len)
    } else if opts.use_tuples(form, subset) {
        tuple_image(form, subset, offset, len, opts.distinct)
    } else {
        shifted_union_image(form, subset, offset, len)
    };
    ImageSet { form: form.clone(), n_max: n, offset, bits }
}

fn tuple_image(form: &LinearForm, subset: &SubsetBitVector, offset: u64, len: usize, distinct: bool) -> Bits {
    let coeffs = form.coeffs();
    let elems = subset.elements();
    let blocks = form.blocks();
    let mut block_start = vec![false; coeffs.len()];
    for b in &blocks {
        block_start[b.start] = true;
    }
    let mut out = Bits::new(len);
    let mut idx = vec![0usize; coeffs.len()];

    // summands within a block commute, so nondecreasing indices there suffice
    #[allow(clippy::too_many_arguments)]
    fn go(
        pos: usize,
        acc: i64,
        coeffs: &[i64],
        elems: &[u64],
        block_start: &[bool],
        distinct: bool,
        idx: &mut [usize],
        offset: i64,
        out: &mut Bits,
    ) {
        if pos == coeffs.len() {
            out.set((acc + offset) as usize);
            return;
        }
        let lo = match (block_start[pos], distinct) {
            (true, _) => 0,
            (false, false) => idx[pos - 1],
            (false, true) => idx[pos - 1] + 1,
        };
        for i in lo..elems.len() {
            if distinct && idx[..pos].contains(&i) {
                continue;
            }
            idx[pos] = i;
            go(pos + 1, acc + coeffs[pos] * elems[i] as i64, coeffs, elems, block_start, distinct, idx, offset, out);
        }
    }
    go(0, 0, coeffs, &elems, &block_start, distinct, &mut idx, offset as i64, &mut out);
    out
}

fn shifted_union_image(form: &LinearForm, subset: &SubsetBitVector, offset: u64, len: usize) -> Bits {
    let n = subset.n_max();
    let mut acc = Bits::new(len);
    acc.set(offset as usize);
    for &u in form.coeffs() {
        let w = u.unsigned_abs();
        // dilate A by |u|; for negative u store position |u|(N - a) so value = pos - |u|N
        let mut dilated = Bits::new((w * n) as usize + 1);
        for a in subset.bits().iter_ones() {
            let a = a as u64;
            let pos = if u > 0 { w * a } else { w * (n - a) };
            dilated.set(pos as usize);
        }
        let base: i64 = if u > 0 { 0 } else { -((w * n) as i64) };
        let mut next = Bits::new(len);
        // union over the sparser side
        if acc.count_ones() <= subset.len() {
            for x in acc.iter_ones() {
                next.or_shifted(&dilated, x as i64 + base);
            }
        } else {
            for pos in dilated.iter_ones() {
                next.or_shifted(&acc, pos as i64 + base);
            }
        }
        acc = next;
    }
    acc
}

/// Counts the classes of `D(N, k)` whose ground set lies in `A`.
///
/// Either searches canonical tuples over the elements of `A`, or, when `D(N, k)`
/// is smaller than that search, filters the full class list by membership.
#[derive(Debug, Clone)]
pub struct RepresentationCounter {
    form: LinearForm,
    n: u64,
    k: u64,
    distinct: bool,
    class_count: Option<u64>,
}

/// Largest `|D(N, k)|` that the filtering path will materialize.
pub const FILTER_CAP: u64 = 1_000_000;

impl RepresentationCounter {
    pub fn new(form: &LinearForm, n: u64, k: u64, distinct: bool) -> Result<Self, SetError> {
        form.check_offset(n, k)?;
        let class_count = count_expressions(form, n, k).to_u64().filter(|&c| c <= FILTER_CAP);
        Ok(RepresentationCounter { form: form.clone(), n, k, distinct, class_count })
    }

    pub fn count(&self, subset: &SubsetBitVector) -> u64 {
        assert_eq!(subset.n_max(), self.n, "subset lives on a different interval");
        let search_work = (subset.len() as f64).powi(self.form.arity() as i32 - 1);
        match self.class_count {
            Some(c) if (c as f64) < search_work => self.count_by_filter(subset),
            _ => self.count_by_search(subset),
        }
    }

    fn count_by_search(&self, subset: &SubsetBitVector) -> u64 {
        let values = subset.elements();
        let target = self.form.offset_value(self.n, self.k);
        let reversal = self.form.is_balanced_midpoint(self.n, self.k);
        let mut count = 0u64;
        CanonicalSearch::new(&self.form, &values, target, reversal, self.distinct).run(&mut |_| count += 1);
        count
    }

    fn count_by_filter(&self, subset: &SubsetBitVector) -> u64 {
        let mut count = 0u64;
        for_each_expression(&self.form, self.n, self.k, |c| {
            let fits = c.ground_set.iter().all(|&a| subset.contains(a));
            if fits && (!self.distinct || c.ground_set.len() == c.rep.len()) {
                count += 1;
            }
        });
        count
    }

    #[cfg(test)]
    fn both_paths(&self, subset: &SubsetBitVector) -> (u64, u64) {
        (self.count_by_search(subset), self.count_by_filter(subset))
    }
}

/// `W_k(A)`: number of classes of `D(N, k)` realized inside `A`.
pub fn representation_count(form: &LinearForm, subset: &SubsetBitVector, k: u64) -> Result<u64, SetError> {
    representation_count_with(form, subset, k, false)
}

pub fn representation_count_with(
    form: &LinearForm,
    subset: &SubsetBitVector,
    k: u64,
    distinct: bool,
) -> Result<u64, SetError> {
    Ok(RepresentationCounter::new(form, subset.n_max(), k, distinct)?.count(subset))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn brute_image(coeffs: &[i64], elems: &[u64], distinct: bool) -> BTreeSet<i64> {
        let h = coeffs.len();
        let mut out = BTreeSet::new();
        if elems.is_empty() {
            return out;
        }
        let mut idx = vec![0usize; h];
        loop {
            let ok = !distinct || {
                let s: BTreeSet<_> = idx.iter().collect();
                s.len() == h
            };
            if ok {
                out.insert(idx.iter().zip(coeffs).map(|(&i, &u)| u * elems[i] as i64).sum());
            }
            let mut p = 0;
            while p < h && idx[p] == elems.len() - 1 {
                idx[p] = 0;
                p += 1;
            }
            if p == h {
                break;
            }
            idx[p] += 1;
        }
        out
    }

    fn set(n: u64, e: &[u64]) -> SubsetBitVector {
        SubsetBitVector::from_elements(n, e.iter().copied()).unwrap()
    }

    #[test]
    fn mstd_example() {
        let a = set(14, &[0, 2, 3, 4, 7, 11, 12, 14]);
        let sums = evaluate_image(&LinearForm::new(&[1, 1]).unwrap(), &a);
        let diffs = evaluate_image(&LinearForm::new(&[1, -1]).unwrap(), &a);
        assert_eq!(sums.len(), 26);
        assert_eq!(diffs.len(), 25);
        for kernel in [Kernel::Tuple, Kernel::ShiftedUnion] {
            let opts = ImageOptions { kernel, ..Default::default() };
            assert_eq!(evaluate_image_with(&LinearForm::new(&[1, 1]).unwrap(), &a, &opts).len(), 26);
        }
    }

    #[test]
    fn complement_examples() {
        let sums = LinearForm::new(&[1, 1]).unwrap();
        assert_eq!(evaluate_image(&sums, &SubsetBitVector::full(9)).complement_size(), 0);
        assert_eq!(evaluate_image(&sums, &SubsetBitVector::empty(9)).complement_size(), 19);
        let diff = LinearForm::new(&[1, -1]).unwrap();
        let img = evaluate_image(&diff, &set(2, &[0, 1]));
        assert_eq!(img.values().collect::<Vec<_>>(), vec![-1, 0, 1]);
        assert_eq!(img.complement_size(), 2);
        let single = evaluate_image(&LinearForm::new(&[3, -2, 1]).unwrap(), &set(5, &[0]));
        assert_eq!(single.values().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn sampling_is_reproducible() {
        let a = SubsetBitVector::sample(1000, 0.3, 42).unwrap();
        assert_eq!(a, SubsetBitVector::sample(1000, 0.3, 42).unwrap());
        assert_ne!(a, SubsetBitVector::sample(1000, 0.3, 43).unwrap());
        assert_eq!(SubsetBitVector::sample(0, 0.5, 1).unwrap().n_max(), 0);
        assert!(matches!(SubsetBitVector::sample(10, 1.0, 1), Err(SetError::BadProbability { .. })));
        assert!(matches!(SubsetBitVector::sample(10, 0.0, 1), Err(SetError::BadProbability { .. })));
    }

    #[test]
    fn sampling_frequency() {
        let a = SubsetBitVector::sample(999_999, 0.3, 7).unwrap();
        let freq = a.len() as f64 / 1e6;
        assert!((freq - 0.3).abs() < 0.002, "{freq}");
    }

    #[test]
    fn json_lists_elements() {
        let a = set(6, &[1, 4]);
        let text = serde_json::to_string(&a).unwrap();
        assert_eq!(text, r#"{"n_max":6,"elements":[1,4]}"#);
        let back: SubsetBitVector = serde_json::from_str(&text).unwrap();
        assert_eq!(back, a);
        assert!(serde_json::from_str::<SubsetBitVector>(r#"{"n_max":2,"elements":[3]}"#).is_err());
    }

    #[test]
    fn image_csv() {
        let img = evaluate_image(&LinearForm::new(&[1, -1]).unwrap(), &set(1, &[1]));
        let mut buf = Vec::new();
        img.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "value,present\n-1,0\n0,1\n1,0\n");
    }

    #[test]
    fn representation_examples() {
        let sums = LinearForm::new(&[1, 1]).unwrap();
        assert_eq!(representation_count(&sums, &set(2, &[0, 1, 2]), 2).unwrap(), 2);
        assert_eq!(representation_count(&sums, &set(2, &[0]), 0).unwrap(), 1);
        let diff = LinearForm::new(&[1, -1]).unwrap();
        assert_eq!(representation_count(&diff, &set(1, &[0, 1]), 1).unwrap(), 2);
        assert!(matches!(
            representation_count(&sums, &set(2, &[0]), 5),
            Err(SetError::Form(FormError::OffsetOutOfRange { .. }))
        ));
        assert_eq!(representation_count_with(&sums, &set(2, &[0, 1, 2]), 2, true).unwrap(), 1);
    }

    #[test]
    fn brute_force_panel() {
        let panel: &[&[i64]] = &[&[1, 1], &[1, -1], &[2, -1], &[3, 1, -2], &[1, 1, -1, -1], &[2, 2, 1, -3]];
        let mut seed = 1u64;
        for coeffs in panel {
            let form = LinearForm::new(coeffs).unwrap();
            for n in [1u64, 7, 18, 30] {
                for p in [0.15, 0.5] {
                    seed += 1;
                    let a = SubsetBitVector::sample(n, p, seed).unwrap();
                    let elems = a.elements();
                    for distinct in [false, true] {
                        let expected = brute_image(form.coeffs(), &elems, distinct);
                        let kernels: &[Kernel] = if distinct { &[Kernel::Auto] } else { &[Kernel::Tuple, Kernel::ShiftedUnion] };
                        for &kernel in kernels {
                            let opts = ImageOptions { distinct, kernel, ..Default::default() };
                            let img = evaluate_image_with(&form, &a, &opts);
                            let got: BTreeSet<i64> = img.values().collect();
                            assert_eq!(got, expected, "{coeffs:?} n={n} {kernel:?} distinct={distinct}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn counting_paths_agree() {
        for coeffs in [&[1, 1, -1][..], &[1, -1], &[1, 1, -1, -1], &[2, 1]] {
            let form = LinearForm::new(coeffs).unwrap();
            let a = SubsetBitVector::sample(9, 0.5, 3).unwrap();
            for k in 0..=form.max_offset(9) {
                for distinct in [false, true] {
                    let c = RepresentationCounter::new(&form, 9, k, distinct).unwrap();
                    let (s, f) = c.both_paths(&a);
                    assert_eq!(s, f, "{coeffs:?} k={k} distinct={distinct}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn membership_matches_counts(
            coeffs in prop::sample::select(vec![vec![1i64, 1], vec![1, -1], vec![2, 1, -1], vec![1, 1, 1], vec![1, 1, -1, -1]]),
            n in 1u64..20,
            seed: u64,
        ) {
            let form = LinearForm::new(&coeffs).unwrap();
            let a = SubsetBitVector::sample(n, 0.3, seed).unwrap();
            let img = evaluate_image(&form, &a);
            for k in 0..=form.max_offset(n) {
                let w = representation_count(&form, &a, k).unwrap();
                prop_assert_eq!(img.contains_offset(k), w >= 1);
            }
            prop_assert_eq!(img.len() as u64 + img.complement_size(), form.max_offset(n) + 1);
        }

        #[test]
        fn reflection_mirrors_image(coeffs in prop::sample::select(vec![vec![1i64, 1], vec![2, -1], vec![3, 1, -1]]), n in 1u64..40, seed: u64) {
            let form = LinearForm::new(&coeffs).unwrap();
            let a = SubsetBitVector::sample(n, 0.2, seed).unwrap();
            let img = evaluate_image(&form, &a);
            let refl = evaluate_image(&form, &a.reflect());
            let top = form.max_offset(n);
            for k in 0..=top {
                prop_assert_eq!(img.contains_offset(k), refl.contains_offset(top - k));
            }
        }

        #[test]
        fn image_is_monotone(n in 1u64..40, s1: u64, s2: u64) {
            let form = LinearForm::new(&[2, 1, -1]).unwrap();
            let a = SubsetBitVector::sample(n, 0.2, s1).unwrap();
            let extra = SubsetBitVector::sample(n, 0.2, s2).unwrap();
            let b = SubsetBitVector::from_elements(n, a.elements().into_iter().chain(extra.elements())).unwrap();
            prop_assert!(a.is_subset_of(&b));
            prop_assert!(evaluate_image(&form, &a).bits().is_subset_of(evaluate_image(&form, &b).bits()));
        }
    }
}
