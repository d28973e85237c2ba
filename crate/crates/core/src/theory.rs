//! Leading-order predictions for `|L(A)|` and `|L(A)^c|` when `p = c N^-alpha`.
//!
//! The global threshold sits at `alpha = (h-1)/h`: above it the image is a
//! sparse set of essentially distinct sums, at it both the image and the
//! complement are linear in `N`, and below it only a fringe of width
//! `p^(-h/(h-1))` near each end of the range is missed.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::enumeration::{IrwinHall, ShiftedDensity};
use crate::forms::LinearForm;
use crate::numeric::{gamma, Quadrature, QuadratureError};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TheoryError {
    #[error("prediction needs the {expected} regime but the decay law is {actual}")]
    WrongRegime { expected: Regime, actual: Regime },
    #[error("arities differ: {s1}+{d1} vs {s2}+{d2}")]
    ArityMismatch { s1: u32, d1: u32, s2: u32, d2: u32 },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("decay exponent {0} must lie strictly between 0 and 1")]
    ExponentOutOfRange(String),
    #[error("multiplier c = {0} must be positive and finite")]
    BadMultiplier(f64),
    #[error("p(N) = {p} is not in (0, 1) at N = {n}")]
    InfeasibleProbability { p: f64, n: u64 },
    #[error("cannot parse exponent {0:?}")]
    Parse(String),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Decay exponent, either an exact fraction or a float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Rational(Ratio<i64>),
    Float(f64),
}

impl Exponent {
    pub fn value(&self) -> f64 {
        match self {
            Exponent::Rational(r) => *r.numer() as f64 / *r.denom() as f64,
            Exponent::Float(x) => *x,
        }
    }

    /// Sign of `self - num/den`. Floats within a relative `1e-12` count as equal.
    fn compare(&self, num: i64, den: i64) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match self {
            Exponent::Rational(r) => r.cmp(&Ratio::new(num, den)),
            Exponent::Float(x) => {
                let t = num as f64 / den as f64;
                if (x - t).abs() <= 1e-12 * t.abs().max(1e-300) {
                    log::warn!("floating exponent {x} treated as exactly {num}/{den}; pass a fraction to be explicit");
                    Ordering::Equal
                } else {
                    x.partial_cmp(&t).unwrap_or(Ordering::Equal)
                }
            }
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Exponent::Float(x) => write!(f, "{x}"),
        }
    }
}

impl FromStr for Exponent {
    type Err = TheoryError;
    fn from_str(s: &str) -> Result<Self, TheoryError> {
        let s = s.trim();
        if let Some((a, b)) = s.split_once('/') {
            let num: i64 = a.trim().parse().map_err(|_| TheoryError::Parse(s.into()))?;
            let den: i64 = b.trim().parse().map_err(|_| TheoryError::Parse(s.into()))?;
            if den == 0 {
                return Err(TheoryError::Parse(s.into()));
            }
            return Ok(Exponent::Rational(Ratio::new(num, den)));
        }
        s.parse::<f64>().map(Exponent::Float).map_err(|_| TheoryError::Parse(s.into()))
    }
}

impl Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Exponent::Rational(_) => s.serialize_str(&self.to_string()),
            Exponent::Float(x) => s.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Exponent::Float(x)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Subcritical => "subcritical",
            Regime::Critical => "critical",
            Regime::Supercritical => "supercritical",
        })
    }
}

/// `p(N) = c N^-alpha` for a form of arity `h`, classified against both thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeSpec {
    pub c: f64,
    pub alpha: Exponent,
    pub arity: usize,
    pub global: Regime,
    /// Position relative to the local threshold `(h-2)/(h-1)`; subcritical
    /// here means individual counts `W_k` are asymptotically Poisson.
    pub local: Regime,
}

fn classify(alpha: &Exponent, num: i64, den: i64) -> Regime {
    // smaller exponent means denser sets
    match alpha.compare(num, den) {
        std::cmp::Ordering::Greater => Regime::Subcritical,
        std::cmp::Ordering::Equal => Regime::Critical,
        std::cmp::Ordering::Less => Regime::Supercritical,
    }
}

impl RegimeSpec {
    pub fn new(c: f64, alpha: Exponent, arity: usize) -> Result<Self, TheoryError> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(TheoryError::BadMultiplier(c));
        }
        let a = alpha.value();
        if !(a > 0.0 && a < 1.0) {
            return Err(TheoryError::ExponentOutOfRange(alpha.to_string()));
        }
        assert!(arity >= 2, "forms have arity at least 2");
        let h = arity as i64;
        let global = classify(&alpha, h - 1, h);
        let local = classify(&alpha, h - 2, h - 1);
        Ok(RegimeSpec { c, alpha, arity, global, local })
    }

    /// Decay law sitting exactly on the global threshold.
    pub fn critical(c: f64, arity: usize) -> Result<Self, TheoryError> {
        let h = arity as i64;
        Self::new(c, Exponent::Rational(Ratio::new(h - 1, h)), arity)
    }

    pub fn p(&self, n: u64) -> Result<f64, TheoryError> {
        let p = self.c * (n as f64).powf(-self.alpha.value());
        if p > 0.0 && p < 1.0 {
            Ok(p)
        } else {
            Err(TheoryError::InfeasibleProbability { p, n })
        }
    }

    fn require(&self, expected: Regime) -> Result<(), TheoryError> {
        if self.global == expected {
            Ok(())
        } else {
            Err(TheoryError::WrongRegime { expected, actual: self.global })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    ImageSize,
    ComplementSize,
}

/// One predicted quantity at a concrete `N`. `value` is absent when the regime
/// has no leading-order statement about that quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub quantity: Quantity,
    pub value: Option<f64>,
    pub n: Option<u64>,
    pub regime: Option<RegimeSpec>,
    /// Which formula produced the value.
    pub tag: String,
}

impl Prediction {
    fn not_predicted(quantity: Quantity, n: u64, regime: &RegimeSpec) -> Self {
        Prediction { quantity, value: None, n: Some(n), regime: Some(*regime), tag: "not_predicted".into() }
    }
}

/// `(Np)^h / theta`.
pub fn subcritical_image<T: Real>(form: &LinearForm, n: u64, p: T) -> T {
    (T::from_int(n) * p).powi(form.arity() as i32) / T::from_int(form.symmetry_order())
}

/// Complement size below the threshold:
/// `2 Gamma(1/(h-1)) ((h-1)! theta prod|u|)^(1/(h-1)) / ((h-1) p^(h/(h-1)))`.
pub fn supercritical_complement<T: Real>(form: &LinearForm, p: T) -> T {
    let h1 = T::from_int(form.arity() as u64 - 1);
    let fact = (1..form.arity() as u64).fold(T::one(), |a, i| a * T::from_int(i));
    let inner = fact * T::from_int(form.symmetry_order()) * T::from_int(form.abs_product());
    let root = inner.powf(h1.recip());
    let two = T::lit(2.0);
    two * gamma(h1.recip()) * root / (h1 * p.powf(T::from_int(form.arity() as u64) / h1))
}

/// Leading coefficients of `|L(A)|/N` and `|L(A)^c|/N` at the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalCoefficients<T> {
    pub c: T,
    pub image_coeff: T,
    pub complement_coeff: T,
}

/// Critical coefficients with the default tolerance of `T`.
pub fn critical_coefficients<T: Real>(form: &LinearForm, c: T) -> Result<CriticalCoefficients<T>, TheoryError> {
    critical_coefficients_with(form, c, &Quadrature::default())
}

/// `complement = 2 int_0^(m/2) exp(-c^h S(x) / (theta prod|u|)) dx` with `S` the
/// digit-shifted Irwin-Hall density; `image = m - complement`.
pub fn critical_coefficients_with<T: Real>(
    form: &LinearForm,
    c: T,
    quad: &Quadrature<T>,
) -> Result<CriticalCoefficients<T>, TheoryError> {
    if !(c > T::zero()) {
        return Err(TheoryError::BadMultiplier(c.to_f64().unwrap_or(f64::NAN)));
    }
    let shifted = ShiftedDensity::<T>::new(form);
    let scale = c.powi(form.arity() as i32)
        / (T::from_int(form.symmetry_order()) * T::from_int(form.abs_product()));
    let m = T::from_int(form.total());
    let half = m / T::lit(2.0);
    let integral = quad.integrate(|x| (-scale * shifted.eval(x)).exp(), T::zero(), half, &shifted.knots())?;
    let complement = T::lit(2.0) * integral;
    Ok(CriticalCoefficients { c, image_coeff: m - complement, complement_coeff: complement })
}

/// Generalized sumset `A_{s,d}` at the threshold through a single Irwin-Hall
/// density: `complement = 2 int_0^(h/2) exp(-(c^h/(s!d!)) IH_h(x)) dx`.
pub fn generalized_critical_coefficients<T: Real>(
    s: u32,
    d: u32,
    c: T,
    quad: &Quadrature<T>,
) -> Result<CriticalCoefficients<T>, TheoryError> {
    let h = (s + d) as usize;
    if h < 2 {
        return Err(TheoryError::PreconditionViolated(format!("s + d = {h} must be at least 2")));
    }
    let ih = IrwinHall::<T>::new(h);
    let fact = |k: u32| (1..=k as u64).fold(T::one(), |a, i| a * T::from_int(i));
    let scale = c.powi(h as i32) / (fact(s) * fact(d));
    let hh = T::from_int(h as u64);
    let integral = quad.integrate(|x| (-scale * ih.density(x)).exp(), T::zero(), hh / T::lit(2.0), &ih.knots())?;
    let complement = T::lit(2.0) * integral;
    Ok(CriticalCoefficients { c, image_coeff: hh - complement, complement_coeff: complement })
}

pub fn predict_subcritical(form: &LinearForm, regime: &RegimeSpec, n: u64) -> Result<Prediction, TheoryError> {
    regime.require(Regime::Subcritical)?;
    let p = regime.p(n)?;
    Ok(Prediction {
        quantity: Quantity::ImageSize,
        value: Some(subcritical_image(form, n, p)),
        n: Some(n),
        regime: Some(*regime),
        tag: "subcritical_image".into(),
    })
}

/// Both critical quantities at a concrete `N`, as `coefficient * N`.
pub fn predict_critical(form: &LinearForm, regime: &RegimeSpec, n: u64) -> Result<[Prediction; 2], TheoryError> {
    regime.require(Regime::Critical)?;
    let coeffs = critical_coefficients::<f64>(form, regime.c)?;
    let nf = n as f64;
    Ok([
        Prediction {
            quantity: Quantity::ImageSize,
            value: Some(coeffs.image_coeff * nf),
            n: Some(n),
            regime: Some(*regime),
            tag: "critical_image".into(),
        },
        Prediction {
            quantity: Quantity::ComplementSize,
            value: Some(coeffs.complement_coeff * nf),
            n: Some(n),
            regime: Some(*regime),
            tag: "critical_complement".into(),
        },
    ])
}

pub fn predict_supercritical_complement(
    form: &LinearForm,
    regime: &RegimeSpec,
    n: u64,
) -> Result<Prediction, TheoryError> {
    regime.require(Regime::Supercritical)?;
    let p = regime.p(n)?;
    Ok(Prediction {
        quantity: Quantity::ComplementSize,
        value: Some(supercritical_complement(form, p)),
        n: Some(n),
        regime: Some(*regime),
        tag: "supercritical_complement".into(),
    })
}

/// Image and complement predictions for whatever regime the decay law is in.
pub fn predict(form: &LinearForm, regime: &RegimeSpec, n: u64) -> Result<[Prediction; 2], TheoryError> {
    match regime.global {
        Regime::Subcritical => Ok([
            predict_subcritical(form, regime, n)?,
            Prediction::not_predicted(Quantity::ComplementSize, n, regime),
        ]),
        Regime::Critical => predict_critical(form, regime, n),
        Regime::Supercritical => Ok([
            Prediction::not_predicted(Quantity::ImageSize, n, regime),
            predict_supercritical_complement(form, regime, n)?,
        ]),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioRegime {
    SubcriticalImage,
    SubcriticalComplement,
    SupercriticalImage,
    SupercriticalComplement,
}

/// Limiting ratio of the quantity for `A_{s1,d1}` over that for `A_{s2,d2}`.
pub fn generalized_ratio(s1: u32, d1: u32, s2: u32, d2: u32, regime: RatioRegime) -> Result<f64, TheoryError> {
    let h = s1 + d1;
    if h != s2 + d2 || h < 2 {
        return Err(TheoryError::ArityMismatch { s1, d1, s2, d2 });
    }
    let fact = |k: u32| (1..=k).fold(1.0f64, |a, i| a * i as f64);
    let r = fact(s2) * fact(d2) / (fact(s1) * fact(d1));
    Ok(match regime {
        RatioRegime::SubcriticalImage => r,
        RatioRegime::SubcriticalComplement | RatioRegime::SupercriticalImage => 1.0,
        RatioRegime::SupercriticalComplement => r.recip().powf(1.0 / (h - 1) as f64),
    })
}

/// Closed form of the binary critical complement coefficient:
/// `2|u1 u2| (1 - e^(-c^2/|u1|)) / c^2 + (|u1| - |u2|) e^(-c^2/|u1|)`.
pub fn binary_critical_closed_form(u1: i64, u2: i64, c: f64) -> f64 {
    let (a, b) = (u1.unsigned_abs() as f64, u2.unsigned_abs() as f64);
    let e = (-c * c / a).exp();
    2.0 * a * b * (1.0 - e) / (c * c) + (a - b) * e
}

/// `|quadrature - closed form|` for the binary critical complement.
pub fn hm_identity_residual(u1: i64, u2: i64, c: f64) -> Result<f64, TheoryError> {
    let violated = |m: &str| Err(TheoryError::PreconditionViolated(m.into()));
    if u1 == 0 || u2 == 0 {
        return violated("coefficients must be nonzero");
    }
    if u1.unsigned_abs() < u2.unsigned_abs() {
        return violated("need |u1| >= |u2|");
    }
    if num_integer::gcd(u1, u2) != 1 {
        return violated("coefficients must be coprime");
    }
    if u1 == u2 {
        return violated("equal coefficients carry a symmetry factor the identity omits");
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(TheoryError::BadMultiplier(c));
    }
    let form = LinearForm::new(&[u1, u2]).expect("validated above");
    let quad = Quadrature::with_tolerance(1e-11);
    let lhs = critical_coefficients_with::<f64>(&form, c, &quad)?.complement_coeff;
    Ok((lhs - binary_critical_closed_form(u1, u2, c)).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn form(c: &[i64]) -> LinearForm {
        LinearForm::new(c).unwrap()
    }

    #[test]
    fn classification() {
        let r = RegimeSpec::new(1.0, "3/4".parse().unwrap(), 4).unwrap();
        assert_eq!(r.global, Regime::Critical);
        assert_eq!(r.local, Regime::Subcritical);
        let r = RegimeSpec::new(1.0, "0.75".parse().unwrap(), 3).unwrap();
        assert_eq!(r.global, Regime::Subcritical);
        let r = RegimeSpec::new(1.0, Exponent::Float(0.5 + 1e-15), 2).unwrap();
        assert_eq!(r.global, Regime::Critical);
        let r = RegimeSpec::new(1.0, Exponent::Float(0.4), 3).unwrap();
        assert_eq!((r.global, r.local), (Regime::Supercritical, Regime::Supercritical));
        let r = RegimeSpec::new(1.0, Exponent::Float(0.8), 3).unwrap();
        assert_eq!((r.global, r.local), (Regime::Subcritical, Regime::Subcritical));
        assert!(RegimeSpec::new(1.0, Exponent::Float(1.0), 2).is_err());
        assert!(RegimeSpec::new(-1.0, Exponent::Float(0.5), 2).is_err());
        assert!(matches!(
            RegimeSpec::new(5.0, Exponent::Float(0.1), 2).unwrap().p(2),
            Err(TheoryError::InfeasibleProbability { .. })
        ));
    }

    #[test]
    fn exponent_json() {
        let e: Exponent = serde_json::from_str(r#""1/2""#).unwrap();
        assert_eq!(e, Exponent::Rational(Ratio::new(1, 2)));
        let e: Exponent = serde_json::from_str("0.4").unwrap();
        assert_eq!(e, Exponent::Float(0.4));
        assert_eq!(serde_json::to_string(&Exponent::Rational(Ratio::new(2, 3))).unwrap(), r#""2/3""#);
    }

    #[test]
    fn subcritical_values() {
        assert!((subcritical_image(&form(&[1, 1]), 1000, 0.1f64) - 5000.0).abs() < 1e-9);
        assert!((subcritical_image(&form(&[1, 1, -1]), 100, 0.1f64) - 500.0).abs() < 1e-9);
        let r = subcritical_image(&form(&[1, 1, 1]), 100, 0.1f64) / subcritical_image(&form(&[1, 1, -1]), 100, 0.1);
        assert!((r - 1.0 / 3.0).abs() < 1e-15);
        let wrong = RegimeSpec::new(1.0, Exponent::Float(0.4), 2).unwrap();
        assert!(matches!(predict_subcritical(&form(&[1, 1]), &wrong, 100), Err(TheoryError::WrongRegime { .. })));
    }

    #[test]
    fn supercritical_values() {
        let p = 0.01f64;
        assert!((supercritical_complement(&form(&[1, -1]), p) - 2.0 / (p * p)).abs() < 1e-6);
        assert!((supercritical_complement(&form(&[1, 1]), p) - 4.0 / (p * p)).abs() < 1e-6);
        let expected = std::f64::consts::PI.sqrt() * 12f64.sqrt() / p.powf(1.5);
        assert!((supercritical_complement(&form(&[1, 1, 1]), p) / expected - 1.0).abs() < 1e-12);
        assert!((6.1396 / p.powf(1.5) / expected - 1.0).abs() < 1e-4);
    }

    #[test]
    fn supercritical_scaling_in_c() {
        let f = form(&[2, 1, -1]);
        let n = 10_000;
        let r1 = RegimeSpec::new(1.0, Exponent::Float(0.3), 3).unwrap();
        let r2 = RegimeSpec::new(2.0, Exponent::Float(0.3), 3).unwrap();
        let a = predict_supercritical_complement(&f, &r1, n).unwrap().value.unwrap();
        let b = predict_supercritical_complement(&f, &r2, n).unwrap().value.unwrap();
        assert!((b / a - 2f64.powf(-1.5)).abs() < 1e-12);
    }

    #[test]
    fn critical_examples() {
        let cc = critical_coefficients(&form(&[1, -1]), 1.0f64).unwrap();
        assert!((cc.complement_coeff - 2.0 * (1.0 - (-1.0f64).exp())).abs() < 1e-9);
        assert!((cc.complement_coeff - 1.26424).abs() < 1e-5);
        assert!((cc.image_coeff + cc.complement_coeff - 2.0).abs() < 1e-12);
        let sums = critical_coefficients(&form(&[1, 1]), 1.0f64).unwrap();
        assert!((sums.complement_coeff - 4.0 * (1.0 - (-0.5f64).exp())).abs() < 1e-9);
        let tiny = critical_coefficients(&form(&[2, 1, -1]), 1e-4f64).unwrap();
        assert!((tiny.complement_coeff - 4.0).abs() < 1e-6);
        let f32_val = critical_coefficients(&form(&[1, -1]), 1.0f32).unwrap();
        assert!((f32_val.complement_coeff - 1.264_241).abs() < 1e-4);
    }

    #[test]
    fn critical_complement_decreases_in_c() {
        for coeffs in [&[1, 1][..], &[2, 1, -1], &[1, 1, 1]] {
            let f = form(coeffs);
            let vals: Vec<f64> = (1..=20)
                .map(|i| critical_coefficients(&f, i as f64 * 0.2).unwrap().complement_coeff)
                .collect();
            assert!(vals.windows(2).all(|w| w[1] < w[0]), "{coeffs:?}");
        }
    }

    #[test]
    fn generalized_sumsets_agree_with_general_path() {
        let q = Quadrature::with_tolerance(1e-11);
        for (s, d) in [(2u32, 0u32), (1, 1), (2, 1), (3, 0), (2, 2), (3, 1)] {
            let coeffs: Vec<i64> = std::iter::repeat_n(1, s as usize).chain(std::iter::repeat_n(-1, d as usize)).collect();
            for c in [0.5f64, 1.0, 2.0] {
                let a = critical_coefficients_with(&form(&coeffs), c, &q).unwrap();
                let b = generalized_critical_coefficients(s, d, c, &q).unwrap();
                assert!((a.complement_coeff - b.complement_coeff).abs() < 1e-9, "({s},{d}) c={c}");
            }
        }
    }

    #[test]
    fn ratios() {
        use RatioRegime::*;
        assert!((generalized_ratio(3, 0, 2, 1, SubcriticalImage).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((generalized_ratio(3, 0, 2, 1, SupercriticalComplement).unwrap() - 3f64.sqrt()).abs() < 1e-15);
        for r in [SubcriticalImage, SubcriticalComplement, SupercriticalImage, SupercriticalComplement] {
            assert_eq!(generalized_ratio(2, 2, 2, 2, r).unwrap(), 1.0);
        }
        assert!(matches!(generalized_ratio(3, 0, 1, 1, SubcriticalImage), Err(TheoryError::ArityMismatch { .. })));
        // the binary case matches the sum/difference fringe ratio
        assert_eq!(generalized_ratio(2, 0, 1, 1, SupercriticalComplement).unwrap(), 2.0);
    }

    #[test]
    fn identity_residuals() {
        for (u1, u2) in [(1, -1), (2, 1), (3, -2), (2, -1)] {
            for c in [0.5, 1.0, 2.0] {
                let r = hm_identity_residual(u1, u2, c).unwrap();
                assert!(r < 1e-6, "({u1},{u2}) c={c}: {r}");
            }
        }
        assert!(matches!(hm_identity_residual(1, 1, 1.0), Err(TheoryError::PreconditionViolated(_))));
        assert!(matches!(hm_identity_residual(2, -4, 1.0), Err(TheoryError::PreconditionViolated(_))));
        assert!(matches!(hm_identity_residual(1, 2, 1.0), Err(TheoryError::PreconditionViolated(_))));
    }

    #[test]
    fn predict_labels_missing_quantity() {
        let f = form(&[1, 1]);
        let sub = RegimeSpec::new(1.0, Exponent::Float(0.75), 2).unwrap();
        let [img, comp] = predict(&f, &sub, 10_000).unwrap();
        assert_eq!(img.tag, "subcritical_image");
        assert!(comp.value.is_none());
        let crit = RegimeSpec::critical(1.0, 2).unwrap();
        let [img, comp] = predict(&f, &crit, 100).unwrap();
        assert!((img.value.unwrap() + comp.value.unwrap() - 200.0).abs() < 1e-9);
        assert!(serde_json::to_string(&comp).unwrap().contains("critical_complement"));
    }
}
