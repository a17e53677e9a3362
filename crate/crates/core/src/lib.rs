//! Exact enumeration of PGL₂(ℤ)-orbits of integral binary quartic forms by
//! height, with the local weights (ℓ_p, m_p), local densities, exponential
//! sums and archimedean constants that govern their counting functions.

pub mod arch;
pub mod arith;
pub mod count;
pub mod error;
pub mod expsums;
pub mod forms;
pub mod fp_poly;
pub mod localp;
pub mod reduce;
pub mod roots;
pub mod scalar;

use num_bigint::BigInt;
use num_rational::BigRational;

pub use error::{QuarticError, Result};
pub use forms::{act, act_integral, try_act, InvariantPair, QuarticForm, ScaledMap, SignatureClass};
pub use scalar::{HpFloat, IntScalar, Real};

/// Forms with 128-bit coefficients (the fast path).
pub type Form = QuarticForm<i128>;
/// Forms with unbounded coefficients.
pub type BigForm = QuarticForm<BigInt>;
/// Forms with exact rational coefficients (results of the twisted action).
pub type RationalForm = QuarticForm<BigRational>;
/// Invariants of [`Form`].
pub type Invariants = InvariantPair<i128>;
/// Integer 2×2 maps on [`Form`].
pub type Map = ScaledMap<i128>;
