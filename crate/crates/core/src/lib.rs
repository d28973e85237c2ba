//! Images of random subsets of `{0, ..., N}` under integer linear forms.
//!
//! `forms` normalizes coefficient vectors, `sets` computes `L(A)` and
//! representation counts, `enumeration` counts L-expressions exactly,
//! `theory` evaluates the leading-order predictions, `poisson` handles the
//! local count law and `sim` drives seeded experiments.

pub mod bits;
pub mod enumeration;
pub mod forms;
pub mod numeric;
pub mod poisson;
pub mod scalar;
pub mod sets;
pub mod sim;
pub mod theory;

pub use enumeration::{
    count_all_offsets, count_expressions, enumerate_expressions, CountTable, EnumerationError, ExpressionClass,
    IrwinHall,
};
pub use forms::{FormError, LinearForm};
pub use poisson::{DependencyAccounting, LowerBoundCertificate, PoissonError};
pub use sets::{evaluate_image, ImageSet, SetError, SubsetBitVector};
pub use sim::{ExperimentConfig, SimError};
pub use theory::{CriticalCoefficients, Exponent, Prediction, Regime, RegimeSpec, TheoryError};

use num_rational::BigRational;

pub type IrwinHall64 = IrwinHall<f64>;
pub type Accounting = DependencyAccounting<f64>;
/// Stein-Chen sums in exact rational arithmetic.
pub type ExactAccounting = DependencyAccounting<BigRational>;
pub type CriticalCoefficients64 = CriticalCoefficients<f64>;
