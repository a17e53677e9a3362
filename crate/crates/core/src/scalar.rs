//! Scalar abstractions shared by the exact and floating-point code paths.
//!
//! Integer forms are generic over [`IntScalar`] (i64, i128, `BigInt`);
//! archimedean code is generic over [`Real`] (f32, f64, [`HpFloat`]).

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::ops::{Add, Div, Mul, Neg, Sub};

use dashu_float::{round::mode::HalfEven, FBig};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, FromPrimitive, One, Signed, ToPrimitive, Zero};

/// Exact integer coefficient type.
pub trait IntScalar:
    Clone
    + Debug
    + Display
    + Ord
    + Hash
    + Integer
    + Signed
    + FromPrimitive
    + ToPrimitive
    + CheckedAdd
    + CheckedSub
    + CheckedMul
    + Send
    + Sync
    + 'static
{
    fn to_big(&self) -> BigInt;
    fn from_big(b: &BigInt) -> Option<Self>;
}

macro_rules! impl_int_scalar {
    ($($t:ty),*) => {$(
        impl IntScalar for $t {
            fn to_big(&self) -> BigInt {
                BigInt::from(*self)
            }
            fn from_big(b: &BigInt) -> Option<Self> {
                <$t>::try_from(b).ok()
            }
        }
    )*};
}
impl_int_scalar!(i64, i128);

impl IntScalar for BigInt {
    fn to_big(&self) -> BigInt {
        self.clone()
    }
    fn from_big(b: &BigInt) -> Option<Self> {
        Some(b.clone())
    }
}

/// Checked-arithmetic wrapper: `None` once any intermediate overflows.
///
/// Lets polynomial formulas be written once and evaluated either in a fixed
/// width type (detecting overflow) or in `BigInt` (never failing).
#[derive(Clone, Debug, PartialEq)]
pub struct Ck<T>(pub Option<T>);

impl<T: IntScalar> Ck<T> {
    pub fn new(v: T) -> Self {
        Ck(Some(v))
    }
    pub fn int(v: i64) -> Self {
        Ck(T::from_i64(v))
    }
}

impl<T: IntScalar> Add for Ck<T> {
    type Output = Ck<T>;
    fn add(self, o: Ck<T>) -> Ck<T> {
        Ck(match (self.0, o.0) {
            (Some(a), Some(b)) => a.checked_add(&b),
            _ => None,
        })
    }
}
impl<T: IntScalar> Sub for Ck<T> {
    type Output = Ck<T>;
    fn sub(self, o: Ck<T>) -> Ck<T> {
        Ck(match (self.0, o.0) {
            (Some(a), Some(b)) => a.checked_sub(&b),
            _ => None,
        })
    }
}
impl<T: IntScalar> Mul for Ck<T> {
    type Output = Ck<T>;
    fn mul(self, o: Ck<T>) -> Ck<T> {
        Ck(match (self.0, o.0) {
            (Some(a), Some(b)) => a.checked_mul(&b),
            _ => None,
        })
    }
}
impl<T: IntScalar> Neg for Ck<T> {
    type Output = Ck<T>;
    fn neg(self) -> Ck<T> {
        Ck(self.0.and_then(|a| T::zero().checked_sub(&a)))
    }
}

/// Real scalar for period and constant computations.
pub trait Real:
    Clone
    + Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
    + Send
    + Sync
{
    /// Number of significant decimal digits carried.
    const DIGITS: u32;
    fn from_f64(x: f64) -> Self;
    fn from_i64(x: i64) -> Self;
    fn to_f64(&self) -> f64;
    fn sqrt(&self) -> Self;
    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }
    /// Unit roundoff of the type, as an f64.
    fn epsilon() -> f64 {
        10f64.powi(-(Self::DIGITS as i32))
    }
    /// π, computed by the Gauss–Legendre AGM iteration unless overridden.
    fn pi() -> Self {
        let two = Self::from_i64(2);
        let mut a = Self::one();
        let mut b = Self::one() / two.clone().sqrt();
        let mut t = Self::from_f64(0.25);
        let mut p = Self::one();
        for _ in 0..12 {
            let an = (a.clone() + b.clone()) / two.clone();
            b = (a.clone() * b).sqrt();
            let d = a - an.clone();
            t = t - p.clone() * d.clone() * d;
            p = p * two.clone();
            a = an;
        }
        let s = a + b;
        s.clone() * s / (Self::from_i64(4) * t)
    }
}

macro_rules! impl_real_prim {
    ($t:ty, $digits:expr, $pi:expr) => {
        impl Real for $t {
            const DIGITS: u32 = $digits;
            fn from_f64(x: f64) -> Self {
                x as $t
            }
            fn from_i64(x: i64) -> Self {
                x as $t
            }
            fn to_f64(&self) -> f64 {
                *self as f64
            }
            fn sqrt(&self) -> Self {
                <$t>::sqrt(*self)
            }
            fn epsilon() -> f64 {
                <$t>::EPSILON as f64
            }
            fn pi() -> Self {
                $pi
            }
        }
    };
}
impl_real_prim!(f32, 7, std::f32::consts::PI);
impl_real_prim!(f64, 15, std::f64::consts::PI);

/// Binary precision of [`HpFloat`] in bits (≈ 72 significant decimal digits).
pub const HP_BITS: usize = 240;

/// Multiprecision real with a fixed working precision of [`HP_BITS`] bits.
#[derive(Clone, Debug, PartialEq, PartialOrd)]
pub struct HpFloat(pub FBig<HalfEven>);

impl HpFloat {
    fn wrap(x: FBig<HalfEven>) -> Self {
        HpFloat(x.with_precision(HP_BITS).value())
    }
}

impl Display for HpFloat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let dec = self.0.clone().with_base_and_precision::<10>(HP_BITS * 3 / 10).value();
        write!(f, "{dec}")
    }
}

macro_rules! hp_binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr for HpFloat {
            type Output = HpFloat;
            fn $m(self, o: HpFloat) -> HpFloat {
                HpFloat::wrap(self.0 $op o.0)
            }
        }
    };
}
hp_binop!(Add, add, +);
hp_binop!(Sub, sub, -);
hp_binop!(Mul, mul, *);
hp_binop!(Div, div, /);

impl Neg for HpFloat {
    type Output = HpFloat;
    fn neg(self) -> HpFloat {
        HpFloat(-self.0)
    }
}
impl Zero for HpFloat {
    fn zero() -> Self {
        HpFloat::wrap(FBig::ZERO)
    }
    fn is_zero(&self) -> bool {
        self.0 == FBig::<HalfEven>::ZERO
    }
}
impl One for HpFloat {
    fn one() -> Self {
        HpFloat::wrap(FBig::ONE)
    }
}

impl Real for HpFloat {
    const DIGITS: u32 = (HP_BITS as u32 * 3) / 10;
    fn from_f64(x: f64) -> Self {
        HpFloat::wrap(FBig::try_from(x).expect("finite f64"))
    }
    fn from_i64(x: i64) -> Self {
        HpFloat::wrap(FBig::from(x))
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }
    fn sqrt(&self) -> Self {
        HpFloat::wrap(self.0.sqrt())
    }
}

/// Convert any exact integer to the nearest `Real` (through its decimal digits
/// for big values, so no precision is lost for `HpFloat`).
pub fn real_from_big<R: Real>(x: &BigInt) -> R {
    if let Some(v) = x.to_i64() {
        return R::from_i64(v);
    }
    let (sign, digits) = x.to_u32_digits();
    let mut acc = R::zero();
    let b32 = R::from_i64(1 << 32);
    for d in digits.iter().rev() {
        acc = acc * b32.clone() + R::from_i64(*d as i64);
    }
    if sign == num_bigint::Sign::Minus {
        -acc
    } else {
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ck_detects_overflow() {
        let big = Ck::<i64>::new(i64::MAX);
        assert_eq!((big.clone() + Ck::int(1)).0, None);
        assert_eq!((Ck::<i64>::int(6) * Ck::int(7)).0, Some(42));
        assert_eq!((-Ck::<i64>::int(5)).0, Some(-5));
    }

    #[test]
    fn hp_pi_has_many_digits() {
        let pi = HpFloat::pi();
        let s = pi.to_string();
        assert!(s.starts_with("3.14159265358979323846264338327950288419716939937510"), "{s}");
        assert!((f64::pi() - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn hp_sqrt_and_conversion() {
        let two = HpFloat::from_i64(2);
        let r = two.sqrt();
        let back = r.clone() * r;
        assert!((back.to_f64() - 2.0).abs() < 1e-15);
        let big: BigInt = "123456789012345678901234567890".parse().unwrap();
        let x: HpFloat = real_from_big(&big);
        assert!(x.to_string().starts_with("123456789012345678901234567890"));
    }
}
