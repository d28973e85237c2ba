//! Adaptive quadrature and the Gamma function.

use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("quadrature did not converge within {cap} integrand evaluations")]
    EvaluationCap { cap: usize },
    #[error("integration interval [{a}, {b}] is empty or not finite")]
    BadInterval { a: f64, b: f64 },
}

/// Settings for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Quadrature<T> {
    pub abs_tol: T,
    pub max_evals: usize,
    /// Bisections forced before the error estimate is trusted.
    pub min_depth: u32,
}

impl<T: Real> Default for Quadrature<T> {
    fn default() -> Self {
        Quadrature { abs_tol: T::default_tolerance(), max_evals: 1_000_000, min_depth: 3 }
    }
}

struct Panel<T> {
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: u32,
}

fn simpson<T: Real>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb)
}

impl<T: Real> Quadrature<T> {
    pub fn with_tolerance(abs_tol: T) -> Self {
        Quadrature { abs_tol, ..Default::default() }
    }

    /// Integral of `f` over `[a, b]`, split at every knot inside the interval.
    ///
    /// The tolerance budget is shared between pieces in proportion to length.
    pub fn integrate<F: FnMut(T) -> T>(
        &self,
        mut f: F,
        a: T,
        b: T,
        knots: &[T],
    ) -> Result<T, QuadratureError> {
        if !(a.is_finite() && b.is_finite()) || b < a {
            return Err(QuadratureError::BadInterval {
                a: a.to_f64().unwrap_or(f64::NAN),
                b: b.to_f64().unwrap_or(f64::NAN),
            });
        }
        if b == a {
            return Ok(T::zero());
        }
        let mut cuts: Vec<T> = knots.iter().copied().filter(|&x| x > a && x < b).collect();
        cuts.sort_by(|x, y| x.partial_cmp(y).expect("knots are finite"));
        cuts.dedup();
        let mut edges = Vec::with_capacity(cuts.len() + 2);
        edges.push(a);
        edges.extend(cuts);
        edges.push(b);

        let two = T::lit(2.0);
        let mut evals = 0usize;
        let mut stack = Vec::new();
        for w in edges.windows(2) {
            let (l, r) = (w[0], w[1]);
            let m = (l + r) / two;
            let (fl, fm, fr) = (f(l), f(m), f(r));
            evals += 3;
            stack.push(Panel {
                a: l,
                b: r,
                fa: fl,
                fm,
                fb: fr,
                whole: simpson(l, r, fl, fm, fr),
                tol: self.abs_tol * (r - l) / (b - a),
                depth: 0,
            });
        }

        let mut pieces = Vec::new();
        while let Some(p) = stack.pop() {
            let m = (p.a + p.b) / two;
            let lm = (p.a + m) / two;
            let rm = (m + p.b) / two;
            let (flm, frm) = (f(lm), f(rm));
            evals += 2;
            if evals > self.max_evals {
                return Err(QuadratureError::EvaluationCap { cap: self.max_evals });
            }
            let left = simpson(p.a, m, p.fa, flm, p.fm);
            let right = simpson(m, p.b, p.fm, frm, p.fb);
            let diff = left + right - p.whole;
            let converged = diff.abs() <= T::lit(15.0) * p.tol;
            // stop refining once the panel is below float resolution
            let tiny = (p.b - p.a) <= T::epsilon() * (p.a.abs() + p.b.abs()).max(T::one());
            if (p.depth >= self.min_depth && converged) || tiny {
                pieces.push(left + right + diff / T::lit(15.0));
            } else {
                let tol = p.tol / two;
                stack.push(Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left, tol, depth: p.depth + 1 });
                stack.push(Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right, tol, depth: p.depth + 1 });
            }
        }
        Ok(crate::scalar::compensated_sum(pieces))
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function by the Lanczos approximation (g = 7, nine terms), with
/// reflection below one half.
pub fn gamma<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        let pi = T::PI();
        return pi / ((pi * x).sin() * gamma(T::one() - x));
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (x + T::from_int(i as u64));
    }
    let t = x + T::lit(LANCZOS_G) + half;
    (T::lit(2.0) * T::PI()).sqrt() * t.powf(x + half) * (-t).exp() * acc
}
