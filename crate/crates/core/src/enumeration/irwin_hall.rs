//! Irwin-Hall density and the leading constant of expression counts.

use crate::forms::LinearForm;
use crate::scalar::{compensated_sum, Real};

/// Largest arity whose alternating sum is still trustworthy in double precision.
pub const MAX_IRWIN_HALL_ARITY: usize = 30;

/// Density of the sum of `h` independent uniforms on `[0, 1]`.
///
/// Closed form `sum_j (-1)^j C(h, j) (x - j)_+^(h-1) / (h-1)!`, evaluated on the
/// left half of the support and reflected, so the result is exactly symmetric.
#[derive(Debug, Clone)]
pub struct IrwinHall<T> {
    h: usize,
    binom: Vec<T>,
    inv_fact: T,
}

impl<T: Real> IrwinHall<T> {
    pub fn new(h: usize) -> Self {
        assert!(h >= 1, "Irwin-Hall needs at least one summand");
        assert!(h <= MAX_IRWIN_HALL_ARITY, "arity {h} is beyond the supported range");
        let mut binom = vec![T::one(); h + 1];
        for j in 1..=h {
            binom[j] = binom[j - 1] * T::from_int((h + 1 - j) as u64) / T::from_int(j as u64);
        }
        let fact = (1..h).fold(T::one(), |acc, i| acc * T::from_int(i as u64));
        IrwinHall { h, binom, inv_fact: fact.recip() }
    }

    pub fn arity(&self) -> usize {
        self.h
    }

    pub fn density(&self, x: T) -> T {
        let hh = T::from_int(self.h as u64);
        if self.h == 1 {
            return if x >= T::zero() && x <= T::one() { T::one() } else { T::zero() };
        }
        if x <= T::zero() || x >= hh {
            return T::zero();
        }
        let x = if x + x > hh { hh - x } else { x };
        let top = x.floor().to_usize().unwrap_or(0).min(self.h);
        let p = (self.h - 1) as i32;
        let terms = (0..=top).map(|j| {
            let t = self.binom[j] * (x - T::from_int(j as u64)).powi(p);
            if j % 2 == 0 { t } else { -t }
        });
        (compensated_sum(terms) * self.inv_fact).max(T::zero())
    }

    /// Integer points where the density stops being polynomial.
    pub fn knots(&self) -> Vec<T> {
        (0..=self.h).map(|j| T::from_int(j as u64)).collect()
    }
}

/// `IH_h(x)` in double precision.
pub fn irwin_hall_density(h: usize, x: f64) -> f64 {
    IrwinHall::<f64>::new(h).density(x)
}

/// Number of digit tuples `t_i in [0, |u_i| - 1]` with each possible sum.
pub fn digit_sum_weights(form: &LinearForm) -> Vec<u64> {
    let mut w = vec![1u64];
    for &u in form.coeffs() {
        let span = u.unsigned_abs() as usize;
        let mut next = vec![0u64; w.len() + span - 1];
        for (s, &c) in w.iter().enumerate() {
            for t in 0..span {
                next[s + t] += c;
            }
        }
        w = next;
    }
    w
}

/// The shifted density `sum_s w_s IH_h(x - s)`, shared by the leading count
/// constant and the critical predictor.
#[derive(Debug, Clone)]
pub struct ShiftedDensity<T> {
    ih: IrwinHall<T>,
    weights: Vec<T>,
}

impl<T: Real> ShiftedDensity<T> {
    pub fn new(form: &LinearForm) -> Self {
        let weights = digit_sum_weights(form).into_iter().map(T::from_int).collect();
        ShiftedDensity { ih: IrwinHall::new(form.arity()), weights }
    }

    pub fn eval(&self, x: T) -> T {
        compensated_sum(
            self.weights
                .iter()
                .enumerate()
                .filter(|(_, &w)| w > T::zero())
                .map(|(s, &w)| w * self.ih.density(x - T::from_int(s as u64))),
        )
    }

    /// Kinks of the shifted density: every integer up to the support end.
    pub fn knots(&self) -> Vec<T> {
        let top = self.weights.len() + self.ih.arity();
        (0..=top).map(|j| T::from_int(j as u64)).collect()
    }
}

/// `lambda_k`, the leading constant in `|D(N, k)| ~ lambda_k N^(h-1)`.
pub fn lambda_k<T: Real>(form: &LinearForm, n: u64, k: u64) -> T {
    if n == 0 || k > form.max_offset(n) {
        return T::zero();
    }
    let shifted = ShiftedDensity::<T>::new(form);
    lambda_with(&shifted, form, n, k)
}

pub(crate) fn lambda_with<T: Real>(shifted: &ShiftedDensity<T>, form: &LinearForm, n: u64, k: u64) -> T {
    let x = T::from_int(k) / T::from_int(n);
    let mut denom = T::from_int(form.symmetry_order()) * T::from_int(form.abs_product());
    if form.is_balanced_midpoint(n, k) {
        denom = denom * T::lit(2.0);
    }
    shifted.eval(x) / denom
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Quadrature;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn spec_points() {
        assert_eq!(irwin_hall_density(2, 1.0), 1.0);
        assert_eq!(irwin_hall_density(3, -0.5), 0.0);
        assert_eq!(irwin_hall_density(3, 3.1), 0.0);
        assert!((irwin_hall_density(3, 1.5) - 0.75).abs() < 1e-12);
        assert_eq!(irwin_hall_density(1, 0.3), 1.0);
        assert!((IrwinHall::<f32>::new(3).density(1.5) - 0.75).abs() < 1e-6);
    }

    #[test]
    fn convolution_oracle() {
        // IH_3 = IH_2 * U[0,1], integrated numerically
        let ih2 = IrwinHall::<f64>::new(2);
        let ih3 = IrwinHall::<f64>::new(3);
        let q = Quadrature::<f64>::with_tolerance(1e-12);
        for &x in &[0.3, 1.0, 1.7, 2.5] {
            let conv = q.integrate(|t| ih2.density(x - t), 0.0, 1.0, &[x - 2.0, x - 1.0, x]).unwrap();
            assert!((conv - ih3.density(x)).abs() < 1e-10, "x={x}");
        }
    }

    #[test]
    fn monte_carlo_density_near_center() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let samples = 400_000;
        let hits = (0..samples)
            .filter(|_| {
                let s: f64 = (0..3).map(|_| rng.gen::<f64>()).sum();
                (s - 1.5).abs() < 0.05
            })
            .count();
        let est = hits as f64 / samples as f64 / 0.1;
        assert!((est - 0.75).abs() < 0.02, "estimate {est}");
    }

    #[test]
    fn normalized_and_symmetric() {
        let q = Quadrature::<f64>::with_tolerance(1e-11);
        for h in 2..=8 {
            let ih = IrwinHall::<f64>::new(h);
            let total = q.integrate(|x| ih.density(x), 0.0, h as f64, &ih.knots()).unwrap();
            assert!((total - 1.0).abs() < 1e-9, "h={h}: {total}");
            for i in 0..=100 {
                let x = h as f64 * i as f64 / 100.0;
                assert!((ih.density(x) - ih.density(h as f64 - x)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn digit_weights() {
        let f = LinearForm::new(&[2, 3, -1]).unwrap();
        assert_eq!(digit_sum_weights(&f), vec![1, 2, 2, 1]);
        let g = LinearForm::new(&[1, 1]).unwrap();
        assert_eq!(digit_sum_weights(&g), vec![1]);
    }

    #[test]
    fn lambda_examples() {
        let sums = LinearForm::new(&[1, 1]).unwrap();
        assert!((lambda_k::<f64>(&sums, 100, 100) - 0.5).abs() < 1e-15);
        let diff = LinearForm::new(&[1, -1]).unwrap();
        assert!((lambda_k::<f64>(&diff, 100, 100) - 0.5).abs() < 1e-15);
        assert_eq!(lambda_k::<f64>(&diff, 100, 0), 0.0);
        let f = LinearForm::new(&[2, 1, -1]).unwrap();
        assert_eq!(lambda_k::<f64>(&f, 100, 0), 0.0);
    }
}
