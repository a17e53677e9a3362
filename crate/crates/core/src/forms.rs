//! Binary quartic forms, their invariants, the twisted PGL₂ action, real
//! signature and genericity.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith;
use crate::error::{QuarticError, Result};
use crate::scalar::{Ck, IntScalar};

/// Commutative ring with small integer constants; lets the invariant formulas
/// be written once for checked fixed-width, big, rational and float scalars.
pub trait Ring: Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {
    fn of(n: i64) -> Self;
}

impl<T: IntScalar> Ring for Ck<T> {
    fn of(n: i64) -> Self {
        Ck::int(n)
    }
}

macro_rules! impl_ring {
    ($($t:ty),*) => {$(
        impl Ring for $t {
            fn of(n: i64) -> Self {
                n as $t
            }
        }
    )*};
}
impl_ring!(i64, i128, f64);

impl Ring for BigInt {
    fn of(n: i64) -> Self {
        BigInt::from(n)
    }
}

impl<T: Clone + Integer + IntScalar> Ring for Ratio<T> {
    fn of(n: i64) -> Self {
        Ratio::from_integer(T::from_i64(n).expect("small constant"))
    }
}

/// I = 12ae − 3bd + c².
pub fn invariant_i<R: Ring>(f: &[R; 5]) -> R {
    let [a, b, c, d, e] = f.clone();
    R::of(12) * a * e - R::of(3) * b * d + c.clone() * c
}

/// J = 72ace + 9bcd − 27ad² − 27eb² − 2c³.
pub fn invariant_j<R: Ring>(f: &[R; 5]) -> R {
    let [a, b, c, d, e] = f.clone();
    R::of(72) * a.clone() * c.clone() * e.clone() + R::of(9) * b.clone() * c.clone() * d.clone()
        - R::of(27) * a * d.clone() * d
        - R::of(27) * e * b.clone() * b
        - R::of(2) * c.clone() * c.clone() * c
}

/// The sixteen-term discriminant expansion.
pub fn discriminant_expanded<R: Ring>(f: &[R; 5]) -> R {
    let [a, b, c, d, e] = f.clone();
    let m = |k: i64, xs: &[(&R, u32)]| {
        let mut acc = R::of(k);
        for (x, n) in xs {
            for _ in 0..*n {
                acc = acc * (*x).clone();
            }
        }
        acc
    };
    let pos = m(256, &[(&a, 3), (&e, 3)])
        + m(144, &[(&a, 2), (&c, 1), (&d, 2), (&e, 1)])
        + m(144, &[(&a, 1), (&b, 2), (&c, 1), (&e, 2)])
        + m(18, &[(&a, 1), (&b, 1), (&c, 1), (&d, 3)])
        + m(16, &[(&a, 1), (&c, 4), (&e, 1)])
        + m(18, &[(&b, 3), (&c, 1), (&d, 1), (&e, 1)])
        + m(1, &[(&b, 2), (&c, 2), (&d, 2)]);
    let neg = m(192, &[(&a, 2), (&b, 1), (&d, 1), (&e, 2)])
        + m(128, &[(&a, 2), (&c, 2), (&e, 2)])
        + m(27, &[(&a, 2), (&d, 4)])
        + m(6, &[(&a, 1), (&b, 2), (&d, 2), (&e, 1)])
        + m(80, &[(&a, 1), (&b, 1), (&c, 2), (&d, 1), (&e, 1)])
        + m(4, &[(&a, 1), (&c, 3), (&d, 2)])
        + m(27, &[(&b, 4), (&e, 2)])
        + m(4, &[(&b, 3), (&d, 3)])
        + m(4, &[(&b, 2), (&c, 3), (&e, 1)]);
    pos - neg
}

/// Coefficients of f((x,y)·N) for a 2×2 matrix N acting on row vectors:
/// x ↦ n11·x + n21·y, y ↦ n12·x + n22·y.
pub fn substitute<R: Ring>(f: &[R; 5], n: &[[R; 2]; 2]) -> [R; 5] {
    let (p, q) = (n[0][0].clone(), n[1][0].clone());
    let (r, s) = (n[0][1].clone(), n[1][1].clone());
    let powers = |u: R, v: R| {
        let mut pw: Vec<Vec<R>> = vec![vec![R::of(1)]];
        for k in 1..=4 {
            let prev = &pw[k - 1];
            let mut next = vec![R::of(0); k + 1];
            for (i, c) in prev.iter().enumerate() {
                next[i] = next[i].clone() + c.clone() * u.clone();
                next[i + 1] = next[i + 1].clone() + c.clone() * v.clone();
            }
            pw.push(next);
        }
        pw
    };
    let xp = powers(p, q);
    let yp = powers(r, s);
    let mut out: [R; 5] = std::array::from_fn(|_| R::of(0));
    for (k, coef) in f.iter().enumerate() {
        let xs = &xp[4 - k];
        let ys = &yp[k];
        for (i, xv) in xs.iter().enumerate() {
            for (j, yv) in ys.iter().enumerate() {
                out[i + j] = out[i + j].clone() + coef.clone() * xv.clone() * yv.clone();
            }
        }
    }
    out
}

/// Binary quartic form a·x⁴ + b·x³y + c·x²y² + d·xy³ + e·y⁴.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuarticForm<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
    pub e: T,
}

impl<T: Clone> QuarticForm<T> {
    pub fn new(a: T, b: T, c: T, d: T, e: T) -> Self {
        QuarticForm { a, b, c, d, e }
    }

    pub fn from_coeffs(c: [T; 5]) -> Self {
        let [a, b, c, d, e] = c;
        QuarticForm { a, b, c, d, e }
    }

    pub fn coeffs(&self) -> [T; 5] {
        [self.a.clone(), self.b.clone(), self.c.clone(), self.d.clone(), self.e.clone()]
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> QuarticForm<U> {
        QuarticForm::new(f(&self.a), f(&self.b), f(&self.c), f(&self.d), f(&self.e))
    }

    /// The form with coefficients reversed, f(y, x).
    pub fn swapped(&self) -> Self {
        QuarticForm::new(self.e.clone(), self.d.clone(), self.c.clone(), self.b.clone(), self.a.clone())
    }
}

impl<T: fmt::Display> fmt::Display for QuarticForm<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{},{}", self.a, self.b, self.c, self.d, self.e)
    }
}

impl<T: FromStr + Clone> FromStr for QuarticForm<T> {
    type Err = QuarticError;
    fn from_str(s: &str) -> Result<Self> {
        let cleaned = s.replace('−', "-");
        let parts: Vec<&str> = cleaned.split(',').map(str::trim).collect();
        if parts.len() != 5 {
            return Err(QuarticError::Parse(format!("expected 5 comma-separated integers, got {s:?}")));
        }
        let mut v = Vec::with_capacity(5);
        for p in parts {
            v.push(p.parse::<T>().map_err(|_| QuarticError::Parse(format!("bad integer {p:?}")))?);
        }
        Ok(QuarticForm::from_coeffs([v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone(), v[4].clone()]))
    }
}

/// Invariants (I, J) with Δ = (4I³ − J²)/27 and height max(|I|³, J²/4).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InvariantPair<T: Clone + Integer> {
    pub i: T,
    pub j: T,
    pub delta: Ratio<T>,
    pub height: Ratio<T>,
}

impl<T: IntScalar> InvariantPair<T> {
    /// Build from (I, J); fails only if Δ or H overflow `T`.
    pub fn from_ij(i: T, j: T) -> Result<Self> {
        let ci = Ck::new(i.clone());
        let cj = Ck::new(j.clone());
        let i3 = ci.clone() * ci.clone() * ci;
        let j2 = cj.clone() * cj;
        let num = (Ck::int(4) * i3.clone() - j2.clone()).0.ok_or(QuarticError::Overflow)?;
        let i3 = i3.0.ok_or(QuarticError::Overflow)?;
        let j2 = j2.0.ok_or(QuarticError::Overflow)?;
        let t = |n: i64| T::from_i64(n).unwrap();
        let delta = Ratio::new(num, t(27));
        let a = Ratio::from_integer(i3.abs());
        let b = Ratio::new(j2, t(4));
        let height = if a >= b { a } else { b };
        Ok(InvariantPair { i, j, delta, height })
    }

    /// Δ as an integer (it always is one for invariants of integral forms).
    pub fn delta_integer(&self) -> Option<T> {
        self.delta.is_integer().then(|| self.delta.to_integer())
    }

    pub fn delta_sign(&self) -> i32 {
        if self.delta.is_positive() {
            1
        } else if self.delta.is_negative() {
            -1
        } else {
            0
        }
    }

    /// Strict height test H(I,J) < X.
    pub fn height_below(&self, x: &Ratio<T>) -> bool {
        self.height < *x
    }

    pub fn height_f64(&self) -> f64 {
        let n = self.height.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = self.height.denom().to_f64().unwrap_or(1.0);
        n / d
    }

    /// Monic integral resolvent g(x) = x³ − 3I·x − J, highest degree first.
    pub fn resolvent_cubic(&self) -> Result<[T; 4]> {
        let three_i = (Ck::int(3) * Ck::new(self.i.clone())).0.ok_or(QuarticError::Overflow)?;
        Ok([T::one(), T::zero(), -three_i, -self.j.clone()])
    }

    pub fn promote(&self) -> InvariantPair<BigInt> {
        InvariantPair {
            i: self.i.to_big(),
            j: self.j.to_big(),
            delta: Ratio::new(self.delta.numer().to_big(), self.delta.denom().to_big()),
            height: Ratio::new(self.height.numer().to_big(), self.height.denom().to_big()),
        }
    }
}

impl<T: IntScalar> fmt::Display for InvariantPair<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "I={} J={} disc={} height={}", self.i, self.j, self.delta, self.height)
    }
}

/// Discriminant of a cubic given highest degree first.
pub fn cubic_discriminant<R: Ring>(g: &[R; 4]) -> R {
    let [a, b, c, d] = g.clone();
    b.clone() * b.clone() * c.clone() * c.clone()
        - R::of(4) * a.clone() * c.clone() * c.clone() * c.clone()
        - R::of(4) * b.clone() * b.clone() * b.clone() * d.clone()
        - R::of(27) * a.clone() * a.clone() * d.clone() * d.clone()
        + R::of(18) * a * b * c * d
}

/// Whether the monic cubic x³ − 3I·x − J is irreducible over ℚ.
///
/// Rational roots of a monic integer cubic are integers; the cubic is monotone
/// on each of (−∞, −s−1], [−s, s], [s+1, ∞) with s = ⌊√I⌋ (or on all of ℤ when
/// I ≤ 0), so exact integer bisection on each piece decides it.
pub fn resolvent_is_irreducible(i: &BigInt, j: &BigInt) -> bool {
    let g = |x: &BigInt| x * x * x - BigInt::from(3) * i * x - j;
    let bound = j.abs() + BigInt::from(3) * i.abs() + BigInt::from(2);
    let has_root = |lo: BigInt, hi: BigInt, increasing: bool| -> bool {
        if lo > hi {
            return false;
        }
        let (mut lo, mut hi) = (lo, hi);
        while lo <= hi {
            let mid: BigInt = (&lo + &hi).div_floor(&BigInt::from(2));
            let v = g(&mid);
            if v.is_zero() {
                return true;
            }
            if (v.is_positive()) == increasing {
                hi = mid - 1;
            } else {
                lo = mid + 1;
            }
        }
        false
    };
    if !i.is_positive() {
        return !has_root(-bound.clone(), bound, true);
    }
    let s = i.sqrt();
    let one = BigInt::one();
    !(has_root(-bound.clone(), -&s - &one, true)
        || has_root(-s.clone(), s.clone(), false)
        || has_root(&s + &one, bound, true))
}

/// 2×2 integer matrix acting on forms by the twisted action
/// (g·f)(x,y) = f((x,y)·JgJ)/det(g)², J the coordinate swap. This is a left
/// action with diag(p,1)·(a,b,c,d,e) = (a/p², b/p, c, dp, ep²).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScaledMap<T> {
    pub m11: T,
    pub m12: T,
    pub m21: T,
    pub m22: T,
}

impl<T: IntScalar> ScaledMap<T> {
    pub fn new(m11: T, m12: T, m21: T, m22: T) -> Self {
        ScaledMap { m11, m12, m21, m22 }
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn swap() -> Self {
        Self::new(T::zero(), T::one(), T::one(), T::zero())
    }

    pub fn det(&self) -> T {
        self.m11.clone() * self.m22.clone() - self.m12.clone() * self.m21.clone()
    }

    pub fn is_unimodular(&self) -> bool {
        self.det().abs().is_one()
    }

    /// Matrix product self·other.
    pub fn compose(&self, o: &Self) -> Self {
        let (a, b, c, d) = (&self.m11, &self.m12, &self.m21, &self.m22);
        Self::new(
            a.clone() * o.m11.clone() + b.clone() * o.m21.clone(),
            a.clone() * o.m12.clone() + b.clone() * o.m22.clone(),
            c.clone() * o.m11.clone() + d.clone() * o.m21.clone(),
            c.clone() * o.m12.clone() + d.clone() * o.m22.clone(),
        )
    }

    /// Transpose (the dual action on forms under the invariant pairing).
    pub fn transpose(&self) -> Self {
        Self::new(self.m11.clone(), self.m21.clone(), self.m12.clone(), self.m22.clone())
    }

    /// The row-vector substitution matrix N = JgJ.
    pub fn substitution_matrix(&self) -> [[T; 2]; 2] {
        [[self.m22.clone(), self.m21.clone()], [self.m12.clone(), self.m11.clone()]]
    }

    /// The map g with substitution matrix N (inverse of [`Self::substitution_matrix`]).
    pub fn from_substitution(n: [[T; 2]; 2]) -> Self {
        let [[n11, n12], [n21, n22]] = n;
        Self::new(n22, n21, n12, n11)
    }

    pub fn promote(&self) -> ScaledMap<BigInt> {
        ScaledMap::new(self.m11.to_big(), self.m12.to_big(), self.m21.to_big(), self.m22.to_big())
    }
}

/// The twisted action, with exact rational result. Fails only if the result
/// overflows `T` (never for `BigInt`).
pub fn try_act<T: IntScalar>(g: &ScaledMap<T>, f: &QuarticForm<T>) -> Result<QuarticForm<Ratio<T>>> {
    let det = g.det();
    assert!(!det.is_zero(), "act: singular matrix");
    let n = g.substitution_matrix().map(|row| row.map(Ck::new));
    let sub = substitute(&f.coeffs().map(Ck::new), &n);
    let det2 = (Ck::new(det.clone()) * Ck::new(det)).0.ok_or(QuarticError::Overflow)?;
    let mut out = Vec::with_capacity(5);
    for c in sub {
        out.push(Ratio::new(c.0.ok_or(QuarticError::Overflow)?, det2.clone()));
    }
    Ok(QuarticForm::new(out[0].clone(), out[1].clone(), out[2].clone(), out[3].clone(), out[4].clone()))
}

/// The twisted action g·f = f((x,y)·JgJ)/det(g)².
///
/// Panics if the result overflows `T`; use `BigInt` forms for unbounded inputs.
pub fn act<T: IntScalar>(g: &ScaledMap<T>, f: &QuarticForm<T>) -> QuarticForm<Ratio<T>> {
    try_act(g, f).expect("act: fixed-width overflow; promote to BigInt")
}

/// g·f when it is integral, `None` otherwise (big-integer arithmetic).
pub fn act_integral(g: &ScaledMap<BigInt>, f: &QuarticForm<BigInt>) -> Option<QuarticForm<BigInt>> {
    let det = g.det();
    let det2 = &det * &det;
    let n = g.substitution_matrix();
    let sub = substitute(&f.coeffs(), &n);
    let mut out = Vec::with_capacity(5);
    for c in sub {
        let (q, r) = c.div_rem(&det2);
        if !r.is_zero() {
            return None;
        }
        out.push(q);
    }
    Some(QuarticForm::from_coeffs([out[0].clone(), out[1].clone(), out[2].clone(), out[3].clone(), out[4].clone()]))
}

/// Real signature class of a form with Δ ≠ 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SignatureClass {
    Class0,
    Class1,
    Class2Plus,
    Class2Minus,
}

impl SignatureClass {
    pub const ALL: [SignatureClass; 4] =
        [SignatureClass::Class0, SignatureClass::Class1, SignatureClass::Class2Plus, SignatureClass::Class2Minus];

    /// Number of distinct real roots in ℙ¹(ℝ).
    pub fn real_roots(self) -> u32 {
        match self {
            SignatureClass::Class0 => 4,
            SignatureClass::Class1 => 2,
            _ => 0,
        }
    }

    /// σ_i: 4 for classes 0 and 2±, 2 for class 1.
    pub fn sigma(self) -> u32 {
        match self {
            SignatureClass::Class1 => 2,
            _ => 4,
        }
    }

    pub fn disc_positive(self) -> bool {
        self != SignatureClass::Class1
    }

    /// Class of −f.
    pub fn negated(self) -> Self {
        match self {
            SignatureClass::Class2Plus => SignatureClass::Class2Minus,
            SignatureClass::Class2Minus => SignatureClass::Class2Plus,
            c => c,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SignatureClass::Class0 => "0",
            SignatureClass::Class1 => "1",
            SignatureClass::Class2Plus => "2+",
            SignatureClass::Class2Minus => "2-",
        }
    }
}

impl fmt::Display for SignatureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SignatureClass {
    type Err = QuarticError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().trim_start_matches("class") {
            "0" => Ok(SignatureClass::Class0),
            "1" => Ok(SignatureClass::Class1),
            "2+" | "2plus" | "2p" => Ok(SignatureClass::Class2Plus),
            "2-" | "2minus" | "2m" => Ok(SignatureClass::Class2Minus),
            other => Err(QuarticError::Parse(format!("unknown signature class {other:?}"))),
        }
    }
}

fn poly_trim(p: &mut Vec<BigRational>) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

/// Remainder of polynomial division (coefficients lowest degree first).
fn poly_rem(num: &[BigRational], den: &[BigRational]) -> Vec<BigRational> {
    let mut r = num.to_vec();
    poly_trim(&mut r);
    let dd = den.len() - 1;
    let lead = den[dd].clone();
    while r.len() > dd {
        let k = r.len() - 1;
        let q = &r[k] / &lead;
        let shift = k - dd;
        for (i, c) in den.iter().enumerate() {
            r[shift + i] = &r[shift + i] - &q * c;
        }
        r.pop();
        poly_trim(&mut r);
    }
    r
}

/// Number of distinct real roots of a squarefree polynomial via Sturm's theorem.
fn sturm_real_roots(p: &[BigRational]) -> u32 {
    let mut p0 = p.to_vec();
    poly_trim(&mut p0);
    if p0.len() <= 1 {
        return 0;
    }
    let p1: Vec<BigRational> =
        p0.iter().enumerate().skip(1).map(|(i, c)| c * BigRational::from_integer(BigInt::from(i))).collect();
    let mut chain = vec![p0, p1];
    loop {
        let n = chain.len();
        let r = poly_rem(&chain[n - 2], &chain[n - 1]);
        if r.is_empty() {
            break;
        }
        chain.push(r.into_iter().map(|c| -c).collect());
    }
    let changes = |at_plus: bool| {
        let signs: Vec<i32> = chain
            .iter()
            .map(|q| {
                let lc = q.last().unwrap();
                let s = if lc.is_positive() { 1 } else { -1 };
                let deg = q.len() - 1;
                if at_plus || deg % 2 == 0 {
                    s
                } else {
                    -s
                }
            })
            .collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count() as u32
    };
    changes(false) - changes(true)
}

impl<T: IntScalar> QuarticForm<T> {
    pub fn promote(&self) -> QuarticForm<BigInt> {
        self.map(|c| c.to_big())
    }

    /// Narrow to another integer type, if every coefficient fits.
    pub fn narrow<U: IntScalar>(&self) -> Option<QuarticForm<U>> {
        Some(QuarticForm::new(
            U::from_big(&self.a.to_big())?,
            U::from_big(&self.b.to_big())?,
            U::from_big(&self.c.to_big())?,
            U::from_big(&self.d.to_big())?,
            U::from_big(&self.e.to_big())?,
        ))
    }

    pub fn neg(&self) -> Self {
        self.map(|c| -c.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs().iter().all(|c| c.is_zero())
    }

    pub fn eval(&self, x: &T, y: &T) -> T {
        let [a, b, c, d, e] = self.coeffs();
        let (x2, y2) = (x.clone() * x.clone(), y.clone() * y.clone());
        a * x2.clone() * x2.clone() + b * x2.clone() * x.clone() * y.clone() + c * x2 * y2.clone()
            + d * x.clone() * y2.clone() * y.clone()
            + e * y2.clone() * y2
    }

    /// Exact invariants; fixed-width arithmetic is checked and falls back to
    /// big integers, failing only if the results do not fit `T`.
    pub fn invariants(&self) -> Result<InvariantPair<T>> {
        let ck = self.coeffs().map(Ck::new);
        let (i, j) = match (invariant_i(&ck).0, invariant_j(&ck).0) {
            (Some(i), Some(j)) => (i, j),
            _ => {
                let big = self.promote().coeffs();
                let i = T::from_big(&invariant_i(&big)).ok_or(QuarticError::Overflow)?;
                let j = T::from_big(&invariant_j(&big)).ok_or(QuarticError::Overflow)?;
                (i, j)
            }
        };
        let ij = InvariantPair::from_ij(i, j)?;
        assert!(ij.delta.is_integer(), "Δ of an integral form must be integral");
        Ok(ij)
    }

    /// The sixteen-term discriminant.
    pub fn disc_direct(&self) -> Result<T> {
        let ck = self.coeffs().map(Ck::new);
        if let Some(d) = discriminant_expanded(&ck).0 {
            return Ok(d);
        }
        T::from_big(&discriminant_expanded(&self.promote().coeffs())).ok_or(QuarticError::Overflow)
    }

    /// Real signature class (exact Sturm count on f(x,1), root at ∞ if a = 0).
    pub fn signature(&self) -> Result<SignatureClass> {
        let big = self.promote();
        if discriminant_expanded(&big.coeffs()).is_zero() {
            return Err(QuarticError::DegenerateDiscriminant);
        }
        let poly: Vec<BigRational> =
            [&big.e, &big.d, &big.c, &big.b, &big.a].iter().map(|c| BigRational::from_integer((*c).clone())).collect();
        let mut roots = sturm_real_roots(&poly);
        if big.a.is_zero() {
            roots += 1;
        }
        Ok(match roots {
            4 => SignatureClass::Class0,
            2 => SignatureClass::Class1,
            0 if big.a.is_positive() => SignatureClass::Class2Plus,
            0 => SignatureClass::Class2Minus,
            n => unreachable!("a binary quartic with Δ ≠ 0 has 0, 2 or 4 real roots, found {n}"),
        })
    }

    /// Irreducibility over ℚ: no root in ℙ¹(ℚ) and no factorization into two
    /// integral quadratics (exact divisor enumeration).
    pub fn is_irreducible(&self) -> Result<bool> {
        let f = self.promote();
        if discriminant_expanded(&f.coeffs()).is_zero() {
            return Err(QuarticError::DegenerateDiscriminant);
        }
        if f.a.is_zero() || f.e.is_zero() {
            return Ok(false);
        }
        let da = arith::positive_divisors(&f.a)?;
        let de = arith::positive_divisors(&f.e)?;
        let signed_de: Vec<BigInt> = de.iter().flat_map(|d| [d.clone(), -d.clone()]).collect();
        for v in &da {
            for u in &signed_de {
                if f.eval(u, v).is_zero() {
                    return Ok(false);
                }
            }
        }
        for p1 in &da {
            let p2 = &f.a / p1;
            for r1 in &signed_de {
                let r2 = &f.e / r1;
                if quadratic_pair_fits(&f, p1, &p2, r1, &r2) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Generic: irreducible with irreducible resolvent cubic.
    pub fn is_generic(&self) -> Result<bool> {
        if !self.is_irreducible()? {
            return Ok(false);
        }
        let f = self.promote();
        let c = f.coeffs();
        Ok(resolvent_is_irreducible(&invariant_i(&c), &invariant_j(&c)))
    }
}

/// Whether f = (p1x² + q1xy + r1y²)(p2x² + q2xy + r2y²) for some integers q1, q2.
fn quadratic_pair_fits(f: &QuarticForm<BigInt>, p1: &BigInt, p2: &BigInt, r1: &BigInt, r2: &BigInt) -> bool {
    let check = |q1: &BigInt, q2: &BigInt| {
        p2 * q1 + p1 * q2 == f.b && r2 * q1 + r1 * q2 == f.d && p1 * r2 + q1 * q2 + p2 * r1 == f.c
    };
    let det = p2 * r1 - p1 * r2;
    if !det.is_zero() {
        let n1 = &f.b * r1 - p1 * &f.d;
        let n2 = p2 * &f.d - r2 * &f.b;
        if !(n1.is_multiple_of(&det) && n2.is_multiple_of(&det)) {
            return false;
        }
        return check(&(n1 / &det), &(n2 / &det));
    }
    // Degenerate system: q2 = (b − p2·q1)/p1 and q1·q2 = c − p1r2 − p2r1.
    let cc = &f.c - p1 * r2 - p2 * r1;
    let disc = &f.b * &f.b - BigInt::from(4) * p2 * &cc * p1;
    let Some(s) = arith::exact_sqrt(&disc) else { return false };
    for num in [&f.b + &s, &f.b - &s] {
        let den = BigInt::from(2) * p2;
        if !num.is_multiple_of(&den) {
            continue;
        }
        let q1 = num / &den;
        let rest = &f.b - p2 * &q1;
        if rest.is_multiple_of(p1) && check(&q1, &(rest / p1)) {
            return true;
        }
    }
    false
}
