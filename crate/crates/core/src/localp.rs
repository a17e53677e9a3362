//! p-adic computations: splitting types, density tables, ℚ_p-solubility,
//! the coset weight m_p and the global weights ℓ(f), m(f).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{self, legendre};
use crate::error::{QuarticError, Result};
use crate::forms::{substitute, QuarticForm};
use crate::fp_poly::{factor_binary, BinaryFactorization};
use crate::scalar::{Ck, IntScalar};
use crate::SignatureClass;

/// Factorization shape of a form mod p: multiset of (degree, multiplicity),
/// or the zero type when p divides every coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum SplittingType {
    Zero,
    Factors(Vec<(u8, u8)>),
}

impl SplittingType {
    /// Canonical order: multiplicity descending, then degree ascending.
    pub fn from_factors(mut fs: Vec<(u8, u8)>) -> Self {
        fs.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
        debug_assert_eq!(fs.iter().map(|(d, m)| (d * m) as u32).sum::<u32>(), 4);
        SplittingType::Factors(fs)
    }

    fn from_factorization(bf: &BinaryFactorization) -> Self {
        let mut fs: Vec<(u8, u8)> = bf.factors.iter().map(|(g, m)| ((g.len() - 1) as u8, *m as u8)).collect();
        if bf.infinity > 0 {
            fs.push((1, bf.infinity as u8));
        }
        Self::from_factors(fs)
    }

    /// ind(σ) = Σ (e_i − 1)·f_i.
    pub fn index(&self) -> u32 {
        match self {
            SplittingType::Zero => 0,
            SplittingType::Factors(fs) => fs.iter().map(|(d, m)| (*m as u32 - 1) * *d as u32).sum(),
        }
    }

    /// Whether some factor is repeated.
    pub fn is_ramified(&self) -> bool {
        match self {
            SplittingType::Zero => true,
            SplittingType::Factors(fs) => fs.iter().any(|(_, m)| *m > 1),
        }
    }

    /// The eleven nonzero splitting types, in table order.
    pub fn all_nonzero() -> Vec<SplittingType> {
        ["1111", "112", "13", "22", "4", "1^211", "1^22", "1^31", "1^21^2", "2^2", "1^4"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect()
    }

    /// The three types whose maximal variants appear in the slice table.
    pub fn maximal_capable() -> Vec<SplittingType> {
        ["1^211", "1^22", "1^31"].iter().map(|s| s.parse().unwrap()).collect()
    }
}

impl fmt::Display for SplittingType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplittingType::Zero => write!(f, "(0)"),
            SplittingType::Factors(fs) => {
                write!(f, "(")?;
                for (d, m) in fs {
                    if *m > 1 {
                        write!(f, "{d}^{m}")?;
                    } else {
                        write!(f, "{d}")?;
                    }
                }
                write!(f, ")")
            }
        }
    }
}

impl FromStr for SplittingType {
    type Err = QuarticError;
    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim().trim_start_matches('(').trim_end_matches(')');
        if body == "0" {
            return Ok(SplittingType::Zero);
        }
        let chars: Vec<char> = body.chars().filter(|c| !c.is_whitespace()).collect();
        let mut fs = Vec::new();
        let mut i = 0;
        let digit = |c: char| c.to_digit(10).map(|d| d as u8).ok_or_else(|| QuarticError::Parse(format!("bad splitting type {s:?}")));
        while i < chars.len() {
            let d = digit(chars[i])?;
            let mut m = 1;
            if i + 2 < chars.len() + 1 && chars.get(i + 1) == Some(&'^') {
                m = digit(*chars.get(i + 2).ok_or_else(|| QuarticError::Parse(s.to_string()))?)?;
                i += 3;
            } else {
                i += 1;
            }
            if d == 0 || m == 0 {
                return Err(QuarticError::Parse(format!("bad splitting type {s:?}")));
            }
            fs.push((d, m));
        }
        if fs.iter().map(|(d, m)| (d * m) as u32).sum::<u32>() != 4 {
            return Err(QuarticError::Parse(format!("splitting type {s:?} does not have degree 4")));
        }
        Ok(SplittingType::from_factors(fs))
    }
}

fn residues<T: IntScalar>(f: &QuarticForm<T>, p: u64) -> [i128; 5] {
    let pb = BigInt::from(p);
    f.coeffs().map(|c| c.to_big().mod_floor(&pb).to_i128().unwrap())
}

/// Factorization of f mod p as a binary form (`None` for the zero form).
pub fn factor_mod_p<T: IntScalar>(f: &QuarticForm<T>, p: u64) -> Option<BinaryFactorization> {
    factor_binary(&residues(f, p), p)
}

/// Splitting type of f mod p.
pub fn splitting_type<T: IntScalar>(f: &QuarticForm<T>, p: u64) -> SplittingType {
    match factor_mod_p(f, p) {
        None => SplittingType::Zero,
        Some(bf) => SplittingType::from_factorization(&bf),
    }
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn qpow(p: u64, e: u32) -> BigRational {
    BigRational::from_integer(BigInt::from(p).pow(e))
}

fn require_odd(p: u64) -> Result<BigRational> {
    if p < 3 || !arith::is_prime_u64(p) {
        return Err(QuarticError::UnsupportedPrime(p));
    }
    Ok(q(p as i64))
}

/// Density of splitting type σ in V(ℤ_p), p odd (closed forms).
pub fn density_splitting(sigma: &SplittingType, p: u64) -> Result<BigRational> {
    let pp = require_odd(p)?;
    let (m1, p1, m2) = (&pp - q(1), &pp + q(1), &pp - q(2));
    let sq = |x: &BigRational| x * x;
    let key = sigma.to_string();
    Ok(match key.as_str() {
        "(0)" => q(1) / qpow(p, 5),
        "(1111)" => &p1 * sq(&m1) * &m2 / (q(24) * qpow(p, 4)),
        "(112)" => &p1 * sq(&m1) / (q(4) * qpow(p, 3)),
        "(13)" => sq(&p1) * sq(&m1) / (q(3) * qpow(p, 4)),
        "(22)" => sq(&m1) * &p1 * &m2 / (q(8) * qpow(p, 4)),
        "(4)" => &p1 * sq(&m1) / (q(4) * qpow(p, 3)),
        "(1^211)" => &p1 * sq(&m1) / (q(2) * qpow(p, 4)),
        "(1^22)" => &p1 * sq(&m1) / (q(2) * qpow(p, 4)),
        "(1^31)" => &p1 * &m1 / qpow(p, 4),
        "(1^21^2)" => &p1 * &m1 / (q(2) * qpow(p, 4)),
        "(2^2)" => sq(&m1) / (q(2) * qpow(p, 4)),
        "(1^4)" => &p1 * &m1 / qpow(p, 5),
        _ => unreachable!("unknown splitting type {key}"),
    })
}

/// Exact counts of each splitting type over all p⁵ forms in V(𝔽_p).
pub fn brute_force_splitting_counts(p: u64) -> BTreeMap<SplittingType, u64> {
    let n = p as i128;
    let parts: Vec<BTreeMap<SplittingType, u64>> = (0..n)
        .into_par_iter()
        .map(|a| {
            let mut counts = BTreeMap::new();
            for rest in 0..n.pow(4) {
                let c = [a, rest % n, (rest / n) % n, (rest / (n * n)) % n, rest / (n * n * n)];
                let sigma = match factor_binary(&c, p) {
                    None => SplittingType::Zero,
                    Some(bf) => {
                        let fp = crate::fp_poly::Fp::new(p);
                        assert_eq!(
                            bf.reconstruct(),
                            fp.from_ints(&[c[4], c[3], c[2], c[1], c[0]]),
                            "factorization must reconstruct the form"
                        );
                        SplittingType::from_factorization(&bf)
                    }
                };
                *counts.entry(sigma).or_insert(0) += 1;
            }
            counts
        })
        .collect();
    let mut total = BTreeMap::new();
    for part in parts {
        for (k, v) in part {
            *total.entry(k).or_insert(0) += v;
        }
    }
    total
}

/// ν_{p^k}(χ_σ) or ν_{p^k}(χ_σ^max): density of σ (maximal σ) on the slice
/// a = p^k·u, closed forms. Types without a slice-table row give `None`.
pub fn density_slice(sigma: &SplittingType, maximal: bool, p: u64, k: u32) -> Result<Option<BigRational>> {
    let pp = require_odd(p)?;
    let m1 = &pp - q(1);
    let sq = |x: &BigRational| x * x;
    let col = k.min(2);
    let key = sigma.to_string();
    let pick = |v: [BigRational; 3]| Some(v[col as usize].clone());
    let r = match (key.as_str(), maximal) {
        ("(1111)", false) => {
            let a = &m1 * (&pp - q(2)) * (&pp - q(3)) / (q(24) * qpow(p, 3));
            let b = sq(&m1) * (&pp - q(2)) / (q(6) * qpow(p, 3));
            pick([a, b.clone(), b])
        }
        ("(112)", false) => {
            let b = sq(&m1) / (q(2) * qpow(p, 2));
            pick([sq(&m1) / (q(4) * qpow(p, 2)), b.clone(), b])
        }
        ("(13)", false) => {
            let b = (&pp + q(1)) * sq(&m1) / (q(3) * qpow(p, 3));
            pick([(&pp + q(1)) * &m1 / (q(3) * qpow(p, 2)), b.clone(), b])
        }
        ("(22)", false) => pick([&m1 * (&pp * &pp - &pp - q(2)) / (q(8) * qpow(p, 3)), q(0), q(0)]),
        ("(4)", false) => pick([(&pp + q(1)) * &m1 / (q(4) * qpow(p, 2)), q(0), q(0)]),
        ("(1^211)", false) => {
            let b = q(3) * sq(&m1) / (q(2) * qpow(p, 3));
            pick([&m1 * (&pp - q(2)) / (q(2) * qpow(p, 3)), b.clone(), b])
        }
        ("(1^22)", false) => {
            let b = sq(&m1) / (q(2) * qpow(p, 3));
            pick([&m1 / (q(2) * qpow(p, 2)), b.clone(), b])
        }
        ("(1^31)", false) => {
            let b = q(2) * &m1 / qpow(p, 3);
            pick([&m1 / qpow(p, 3), b.clone(), b])
        }
        ("(1^211)", true) => pick([
            sq(&m1) * (&pp - q(2)) / (q(2) * qpow(p, 4)),
            (q(3) * &pp - q(2)) * sq(&m1) / (q(2) * qpow(p, 4)),
            sq(&m1) * &m1 / qpow(p, 4),
        ]),
        ("(1^22)", true) => pick([sq(&m1) * &m1 / (q(2) * qpow(p, 4)), sq(&m1) / (q(2) * qpow(p, 3)), q(0)]),
        ("(1^31)", true) => {
            pick([sq(&m1) / qpow(p, 4), (q(2) * &pp - q(1)) * &m1 / qpow(p, 4), sq(&m1) / qpow(p, 4)])
        }
        ("(1^21^2)", false) => {
            let b = &m1 / qpow(p, 3);
            pick([&m1 / (q(2) * qpow(p, 3)), b.clone(), b])
        }
        ("(2^2)", false) => pick([&m1 / (q(2) * qpow(p, 3)), q(0), q(0)]),
        ("(1^4)", false) => {
            let b = &m1 / qpow(p, 4);
            pick([q(1) / qpow(p, 3), b.clone(), b])
        }
        _ => None,
    };
    Ok(r)
}

/// Maximality at a multiple root, given coefficients mod p²: p² ∤ f(r̃) for the
/// primitive lift r̃ of the unique multiple linear root.
fn maximal_from_residues(c: &[i128; 5], p: u64, sigma: &SplittingType, bf: &BinaryFactorization) -> bool {
    let capable = matches!(sigma.to_string().as_str(), "(1^211)" | "(1^22)" | "(1^31)");
    if !capable {
        return false;
    }
    let p2 = (p * p) as i128;
    let eval = |x: i128, y: i128| -> i128 {
        let mut acc = 0i128;
        for (i, coef) in c.iter().enumerate() {
            let term = coef * x.pow(4 - i as u32) * y.pow(i as u32);
            acc = (acc + term).rem_euclid(p2);
        }
        acc
    };
    let value = if bf.infinity >= 2 {
        eval(1, 0)
    } else {
        let (g, _) = bf.factors.iter().find(|(g, m)| *m >= 2 && g.len() == 2).expect("multiple linear root");
        let root = (p as i128 - g[0] as i128).rem_euclid(p as i128);
        eval(root, 1)
    };
    value % p2 != 0
}

/// Maximality at p: for each multiple root r of f mod p, p² ∤ f(r̃) at a
/// primitive lift; the types (1²1²), (2²), (1⁴) are never maximal.
pub fn is_resolvent_maximal_at<T: IntScalar>(f: &QuarticForm<T>, p: u64) -> Result<bool> {
    require_odd(p)?;
    let Some(bf) = factor_mod_p(f, p) else { return Ok(false) };
    let sigma = SplittingType::from_factorization(&bf);
    if !sigma.is_ramified() {
        return Err(QuarticError::NotRamified(p));
    }
    let pb = BigInt::from(p * p);
    let c = f.coeffs().map(|x| x.to_big().mod_floor(&pb).to_i128().unwrap());
    Ok(maximal_from_residues(&c, p, &sigma, &bf))
}

/// Brute-force slice counts: for a = p^k·u, the number of (b,c,d,e) mod p²
/// with each splitting type (weight p⁴ per residue mod p) and, for the three
/// maximal-capable types, the number that are maximal. Denominator p⁸.
pub fn brute_force_slice(p: u64, k: u32, unit: u64) -> BTreeMap<(SplittingType, bool), u64> {
    let n = p as i128;
    let p2 = n * n;
    let a_full = (n.pow(k.min(2)) * unit as i128) % p2;
    let parts: Vec<BTreeMap<(SplittingType, bool), u64>> = (0..n.pow(4))
        .into_par_iter()
        .map(|idx| {
            let mut out = BTreeMap::new();
            let base = [a_full % n, idx % n, (idx / n) % n, (idx / (n * n)) % n, idx / (n * n * n)];
            let Some(bf) = factor_binary(&base, p) else {
                *out.entry((SplittingType::Zero, false)).or_insert(0) += (p as u64).pow(4);
                return out;
            };
            let sigma = SplittingType::from_factorization(&bf);
            *out.entry((sigma.clone(), false)).or_insert(0) += (p as u64).pow(4);
            let capable = matches!(sigma.to_string().as_str(), "(1^211)" | "(1^22)" | "(1^31)");
            if capable {
                let mut maxc = 0u64;
                for lift in 0..n.pow(4) {
                    let c = [
                        a_full,
                        base[1] + n * (lift % n),
                        base[2] + n * ((lift / n) % n),
                        base[3] + n * ((lift / (n * n)) % n),
                        base[4] + n * (lift / (n * n * n)),
                    ];
                    if maximal_from_residues(&c, p, &sigma, &bf) {
                        maxc += 1;
                    }
                }
                *out.entry((sigma, true)).or_insert(0) += maxc;
            }
            out
        })
        .collect();
    let mut total = BTreeMap::new();
    for part in parts {
        for (key, v) in part {
            *total.entry(key).or_insert(0) += v;
        }
    }
    total
}

/// One comparison between a closed-form density and a brute-force count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityCheck {
    pub p: u64,
    /// Slice column (a = p^k·u); `None` for the whole space.
    pub k: Option<u32>,
    pub sigma: SplittingType,
    pub maximal: bool,
    pub closed: BigRational,
    pub brute: BigRational,
}

impl DensityCheck {
    pub fn matches(&self) -> bool {
        self.closed == self.brute
    }
}

/// Splitting-type densities in V(ℤ_p): closed forms against counts over V(𝔽_p).
pub fn verify_splitting_densities(p: u64) -> Result<Vec<DensityCheck>> {
    let counts = brute_force_splitting_counts(p);
    let total = BigInt::from(p).pow(5);
    let mut out = Vec::new();
    let mut types = SplittingType::all_nonzero();
    types.insert(0, SplittingType::Zero);
    for sigma in types {
        let c = counts.get(&sigma).copied().unwrap_or(0);
        out.push(DensityCheck {
            p,
            k: None,
            closed: density_splitting(&sigma, p)?,
            brute: BigRational::new(BigInt::from(c), total.clone()),
            sigma,
            maximal: false,
        });
    }
    Ok(out)
}

/// Slice densities ν_{p^k}(χ_σ), ν_{p^k}(χ_σ^max): closed forms against
/// counts over the slice modulo p², for every type with a closed form.
pub fn verify_slice_densities(p: u64, k: u32) -> Result<Vec<DensityCheck>> {
    require_odd(p)?;
    let counts = brute_force_slice(p, k, 1);
    let total = BigInt::from(p).pow(8);
    let mut out = Vec::new();
    for maximal in [false, true] {
        for sigma in SplittingType::all_nonzero() {
            let Some(closed) = density_slice(&sigma, maximal, p, k)? else { continue };
            let c = counts.get(&(sigma.clone(), maximal)).copied().unwrap_or(0);
            out.push(DensityCheck { p, k: Some(k), sigma, maximal, closed, brute: BigRational::new(BigInt::from(c), total.clone()) });
        }
    }
    Ok(out)
}

fn is_unit_square(u: &BigInt, p: u64) -> bool {
    if p == 2 {
        u.mod_floor(&BigInt::from(8)) == BigInt::one()
    } else {
        legendre(u.mod_floor(&BigInt::from(p)).to_i128().unwrap(), p) == 1
    }
}

/// Whether a nonzero integer is a square in ℚ_p.
pub fn is_qp_square(x: &BigInt, p: u64) -> bool {
    assert!(!x.is_zero());
    let v = arith::valuation(x, p);
    if v % 2 == 1 {
        return false;
    }
    let u = x / BigInt::from(p).pow(v);
    is_unit_square(&u, p)
}

/// Whether some t ∈ x0 + pⁿℤ_p makes g(t) a square in ℚ_p (including 0).
fn disc_soluble(g: &[BigInt], p: u64, x0: &BigInt, n: u32) -> bool {
    let pb = BigInt::from(p);
    let pn = pb.pow(n);
    // Taylor coefficients of s ↦ g(x0 + pⁿ s).
    let deg = g.len();
    let mut h = vec![BigInt::zero(); deg];
    let mut binom = vec![vec![BigInt::zero(); deg]; deg];
    for j in 0..deg {
        binom[j][0] = BigInt::one();
        for i in 1..=j {
            binom[j][i] = &binom[j - 1][i - 1] + if i < j { binom[j - 1][i].clone() } else { BigInt::zero() };
        }
    }
    for (i, hi) in h.iter_mut().enumerate() {
        let mut acc = BigInt::zero();
        for j in i..deg {
            acc += &binom[j][i] * &g[j] * x0.pow((j - i) as u32);
        }
        *hi = acc * pn.pow(i as u32);
    }
    let c0 = &h[0];
    if c0.is_zero() {
        return true;
    }
    if is_qp_square(c0, p) {
        return true;
    }
    let v = arith::valuation(c0, p);
    // Hensel: a simple ℤ_p-root of g near x0 gives a point with z = 0.
    if deg > 1 && !h[1].is_zero() {
        let dv = arith::valuation(&h[1], p) - n;
        if v > 2 * dv {
            return true;
        }
    }
    let w = h.iter().skip(1).filter(|c| !c.is_zero()).map(|c| arith::valuation(c, p)).min();
    let margin = if p == 2 { 3 } else { 1 };
    if w.map_or(true, |w| w >= v + margin) {
        return false;
    }
    (0..p).any(|r| disc_soluble(g, p, &(x0 + BigInt::from(r) * &pn), n + 1))
}

/// ℓ_p(f): whether z² = f(x,y) has a nontrivial ℚ_p-point.
///
/// Exact recursive descent over residue discs of ℙ¹(ℤ_p); a disc is closed as
/// soon as the square class of f is constant on it, or Hensel's lemma yields a
/// root. Terminates because Δ(f) ≠ 0.
pub fn lp_soluble<T: IntScalar>(f: &QuarticForm<T>, p: u64) -> Result<bool> {
    let f = f.promote();
    if f.disc_direct()?.is_zero() {
        return Err(QuarticError::DegenerateDiscriminant);
    }
    let pb = BigInt::from(p);
    let affine = vec![f.e.clone(), f.d.clone(), f.c.clone(), f.b.clone(), f.a.clone()];
    let near_infinity: Vec<BigInt> = [&f.a, &f.b, &f.c, &f.d, &f.e].iter().enumerate().map(|(i, c)| *c * pb.pow(i as u32)).collect();
    Ok(disc_soluble(&affine, p, &BigInt::zero(), 0) || disc_soluble(&near_infinity, p, &BigInt::zero(), 0))
}

/// ℓ_∞(f): soluble over ℝ unless negative definite.
pub fn linf_soluble<T: IntScalar>(f: &QuarticForm<T>) -> Result<bool> {
    Ok(f.signature()? != SignatureClass::Class2Minus)
}

/// Left-coset representatives of PGL₂(ℤ_p) in the matrices of determinant
/// p^k with primitive entries: [[p^a, b], [0, p^{k−a}]], 0 ≤ b < p^{k−a}.
pub fn hermite_reps(p: u64, k: u32) -> Vec<[u128; 3]> {
    let mut out = Vec::new();
    for a in 0..=k {
        let d = k - a;
        let (pa, pd) = ((p as u128).pow(a), (p as u128).pow(d));
        for b in 0..pd {
            if a > 0 && d > 0 && b % p as u128 == 0 {
                continue;
            }
            out.push([pa, b, pd]);
        }
    }
    out
}

/// Whether the rep [[pa, b], [0, pd]] maps f to an integral form.
fn rep_integral(f: &[BigInt; 5], rep: &[u128; 3], p: u64, k: u32) -> bool {
    let [pa, b, pd] = *rep;
    let det2 = BigInt::from(p).pow(2 * k);
    let fast = (|| {
        let fi: [i128; 5] = [
            f[0].to_i128()?,
            f[1].to_i128()?,
            f[2].to_i128()?,
            f[3].to_i128()?,
            f[4].to_i128()?,
        ];
        let n = [[pd as i128, 0], [b as i128, pa as i128]].map(|r| r.map(Ck::new));
        let sub = substitute(&fi.map(Ck::new), &n);
        let d2 = det2.to_i128()?;
        let mut ok = true;
        for c in sub {
            ok &= c.0? % d2 == 0;
        }
        Some(ok)
    })();
    if let Some(ok) = fast {
        return ok;
    }
    let n = [[BigInt::from(pd), BigInt::zero()], [BigInt::from(b), BigInt::from(pa)]];
    substitute(f, &n).iter().all(|c| c.is_multiple_of(&det2))
}

/// m_p^{(k)}(f): number of level-k coset representatives g with g·f integral.
pub fn mp_level<T: IntScalar>(f: &QuarticForm<T>, p: u64, k: u32) -> u64 {
    if k == 0 {
        return 1;
    }
    let fb = f.promote().coeffs();
    hermite_reps(p, k).iter().filter(|rep| rep_integral(&fb, rep, p, k)).count() as u64
}

/// m_p^{(k)}(f) for k = 0..=⌊v_p(Δ)/2⌋ (all higher levels vanish).
pub fn mp_levels<T: IntScalar>(f: &QuarticForm<T>, p: u64) -> Result<Vec<u64>> {
    let disc = f.promote().disc_direct()?;
    if disc.is_zero() {
        return Err(QuarticError::DegenerateDiscriminant);
    }
    let kmax = arith::valuation(&disc, p) / 2;
    Ok((0..=kmax).map(|k| mp_level(f, p, k)).collect())
}

/// m_p(f) = Σ_k m_p^{(k)}(f).
pub fn mp_total<T: IntScalar>(f: &QuarticForm<T>, p: u64) -> Result<u64> {
    Ok(mp_levels(f, p)?.iter().sum())
}

/// Local data of f at one prime.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalWeight {
    pub p: u64,
    pub ell: u8,
    pub m_levels: Vec<u64>,
    pub m_total: u64,
}

pub fn local_weight<T: IntScalar>(f: &QuarticForm<T>, p: u64) -> Result<LocalWeight> {
    let m_levels = mp_levels(f, p)?;
    let m_total = m_levels.iter().sum();
    Ok(LocalWeight { p, ell: lp_soluble(f, p)? as u8, m_levels, m_total })
}

/// Global weights ℓ(f) ∈ {0,1} and m(f) = Π_p m_p(f), with the local data at
/// p = 2 and every prime p with p² | Δ(f).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GlobalWeights {
    pub ell: u8,
    pub m: u64,
    pub local: Vec<LocalWeight>,
}

/// Primes p with p² | n (n ≠ 0).
pub fn square_divisor_primes(n: &BigInt) -> Result<Vec<u64>> {
    let fac = arith::factor(n.magnitude())?;
    let mut out = Vec::new();
    for (pr, e) in fac {
        if e >= 2 {
            let p = pr.to_u64().ok_or_else(|| QuarticError::FactorizationFailure(format!("prime {pr} too large")))?;
            out.push(p);
        }
    }
    Ok(out)
}

pub fn global_weights<T: IntScalar>(f: &QuarticForm<T>) -> Result<GlobalWeights> {
    global_weights_with_effort(f, arith::DEFAULT_FACTOR_EFFORT)
}

pub fn global_weights_with_effort<T: IntScalar>(f: &QuarticForm<T>, effort: u64) -> Result<GlobalWeights> {
    if !f.is_generic()? {
        return Err(QuarticError::NotGeneric);
    }
    let disc = f.promote().disc_direct()?;
    let fac = arith::factor_with_effort(&BigUint::try_from(disc.abs()).unwrap(), effort)?;
    let mut primes: Vec<u64> = fac.iter().filter(|(_, e)| *e >= 2).map(|(p, _)| p.to_u64().unwrap()).collect();
    if !primes.contains(&2) {
        primes.insert(0, 2);
    }
    let mut ell = linf_soluble(f)? as u8;
    let mut m = 1u64;
    let mut local = Vec::with_capacity(primes.len());
    for p in primes {
        let lw = local_weight(f, p)?;
        ell &= lw.ell;
        m *= lw.m_total;
        local.push(lw);
    }
    Ok(GlobalWeights { ell, m, local })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Form;

    fn f(c: [i128; 5]) -> Form {
        Form::from_coeffs(c)
    }

    fn st(s: &str) -> SplittingType {
        s.parse().unwrap()
    }

    #[test]
    fn splitting_type_examples() {
        assert_eq!(splitting_type(&f([1, 0, 0, 0, 1]), 2), st("1^4"));
        assert_eq!(splitting_type(&f([0, 1, 0, -1, 0]), 5), st("1111"));
        assert_eq!(splitting_type(&f([5, 5, 5, 5, 5]), 5), SplittingType::Zero);
        assert_eq!(splitting_type(&f([1, 0, 0, 1, 1]), 2), st("4"));
        assert_eq!(st("(1^211)").to_string(), "(1^211)");
        assert_eq!(st("1^21^2").index(), 2);
        assert_eq!(st("2^2").index(), 2);
        assert_eq!(st("1^4").index(), 3);
        assert!("1^3".parse::<SplittingType>().is_err());
        assert_eq!(SplittingType::all_nonzero().len(), 11);
    }

    #[test]
    fn table_one_examples() {
        assert_eq!(density_splitting(&st("1111"), 5).unwrap(), BigRational::new(12.into(), 625.into()));
        assert_eq!(density_splitting(&st("1^31"), 5).unwrap(), BigRational::new(24.into(), 625.into()));
        assert_eq!(density_splitting(&st("1111"), 2), Err(QuarticError::UnsupportedPrime(2)));
        for p in [3u64, 5, 7] {
            let mut total = density_splitting(&SplittingType::Zero, p).unwrap();
            for s in SplittingType::all_nonzero() {
                total += density_splitting(&s, p).unwrap();
            }
            assert_eq!(total, q(1), "p = {p}");
        }
    }

    #[test]
    fn table_one_matches_brute_force_p3() {
        let counts = brute_force_splitting_counts(3);
        for (s, c) in counts {
            assert_eq!(BigRational::new(c.into(), 243.into()), density_splitting(&s, 3).unwrap(), "{s}");
        }
    }

    #[test]
    fn table_two_examples() {
        let r = |n: i64, d: i64| Some(BigRational::new(n.into(), d.into()));
        assert_eq!(density_slice(&st("1111"), false, 5, 0).unwrap(), r(1, 125));
        assert_eq!(density_slice(&st("22"), false, 5, 1).unwrap(), r(0, 1));
        assert_eq!(density_slice(&st("1^211"), true, 5, 2).unwrap(), r(64, 625));
        assert_eq!(density_slice(&st("1^211"), true, 5, 7).unwrap(), r(64, 625));
        assert_eq!(density_slice(&st("2^2"), true, 5, 0).unwrap(), None);
    }

    #[test]
    fn slice_table_matches_brute_force_p3() {
        for k in 0..=2 {
            let checks = verify_slice_densities(3, k).unwrap();
            assert!(checks.len() >= 11);
            for c in checks {
                if k == 0 && c.maximal && c.sigma == st("1^22") {
                    // The tabulated (p−1)³/(2p⁴) disagrees with the count,
                    // which equals the k = 1 entry (p−1)²/(2p³).
                    assert!(!c.matches());
                    assert_eq!(c.brute, BigRational::new(2.into(), 27.into()));
                    continue;
                }
                assert!(c.matches(), "{c:?}");
            }
        }
    }

    #[test]
    fn maximality_examples() {
        // f ≡ x²y(x − y) mod p: double root at (0:1) where f(0,1) = e.
        let p = 5i128;
        assert!(is_resolvent_maximal_at(&f([0, 1, -1, 0, p]), 5).unwrap());
        assert!(!is_resolvent_maximal_at(&f([0, 1, -1, 0, p * p]), 5).unwrap());
        assert!(!is_resolvent_maximal_at(&f([0, 1, -1, p, p * p]), 5).unwrap());
        assert!(!is_resolvent_maximal_at(&f([1, 0, 0, 0, 0]), 5).unwrap());
        assert_eq!(is_resolvent_maximal_at(&f([0, 1, 0, -1, 0]), 5), Err(QuarticError::NotRamified(5)));
    }

    #[test]
    fn solubility_examples() {
        assert!(lp_soluble(&f([1, 0, 0, 0, 1]), 5).unwrap());
        assert!(!lp_soluble(&f([3, 0, 0, 0, 3]), 3).unwrap());
        assert!(linf_soluble(&f([1, 0, 0, 0, 1])).unwrap());
        assert!(!linf_soluble(&f([-1, 0, 0, 0, -1])).unwrap());
        assert!(linf_soluble(&f([1, 0, 0, 0, -1])).unwrap());
        // 2·(x⁴ + y⁴)... x⁴+y⁴ takes values 1, 2 (mod 16 units); 2f takes 2, 4: 4·1 is a square
        assert!(lp_soluble(&f([2, 0, 0, 0, 2]), 2).unwrap());
        // −(x⁴ + y⁴) at p = 3: −1, −2 ≡ 1 square: soluble; at p = 2: −1, −2 non-squares
        assert!(lp_soluble(&f([-1, 0, 0, 0, -1]), 3).unwrap());
        assert!(!lp_soluble(&f([-1, 0, 0, 0, -1]), 2).unwrap());
        assert_eq!(lp_soluble(&f([1, 0, -2, 0, 1]), 3), Err(QuarticError::DegenerateDiscriminant));
    }

    #[test]
    fn hermite_counts() {
        assert_eq!(hermite_reps(5, 0).len(), 1);
        for p in [2u64, 3, 5, 7] {
            for k in 1..=4 {
                assert_eq!(hermite_reps(p, k).len() as u64, (p + 1) * p.pow(k - 1));
            }
        }
        assert_eq!(hermite_reps(5, 2).len(), 30);
    }

    #[test]
    fn mp_examples() {
        assert_eq!(mp_level(&f([3, 1, 4, 1, 5]), 7, 0), 1);
        for p in [3i128, 5, 7] {
            let g = f([1, 0, 0, 0, p * p]);
            assert_eq!(mp_level(&g, p as u64, 1), 1);
            assert_eq!(mp_levels(&g, p as u64).unwrap().iter().skip(2).sum::<u64>(), 0);
            assert_eq!(mp_total(&g, p as u64).unwrap(), 2);
        }
        assert_eq!(mp_total(&f([1, 0, 0, 1, 1]), 229).unwrap(), 1);
    }

    #[test]
    fn global_weight_examples() {
        let gw = global_weights(&f([1, 0, 0, 1, 1])).unwrap();
        assert_eq!(gw.m, 1);
        assert_eq!(global_weights(&f([1, 0, 0, 0, 1])), Err(QuarticError::NotGeneric));
        let neg = global_weights(&f([-1, 0, 0, -1, -1])).unwrap();
        assert_eq!(neg.ell, 0);
    }
}
