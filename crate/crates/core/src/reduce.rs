//! PGL₂(ℤ)-reduction: reduced sets, certified equivalence, canonical
//! representatives, and enumeration of orbits of bounded height.
//!
//! A form is *reduced* if it lies in one of
//!
//! * S(K): a ≠ 0, |a| ≤ Ka·H^{1/6}, −2|a| < b ≤ 2|a| and |8ac − 3b²| ≤ Kw·H^{1/3};
//! * A₀:   a = 0, b > 0, −3b/2 < c ≤ 3b/2.
//!
//! Given (a, b, 8ac − 3b²) the remaining coefficients are pinned down by the
//! invariants through the syzygy 27R² = 48I·a²H − H³ − 64J·a³ with
//! H = 8ac − 3b², R = b³ + 8a²d − 4abc, so reduced forms with prescribed (or
//! bounded) invariants can be listed exhaustively. Forms in the same fiber are
//! then split into orbits by an exact equivalence test whose candidate maps
//! come from matching roots in ℙ¹(ℂ).

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{cdiv, fdiv, icbrt_strict, isqrt_strict, solve_linear_range};
use crate::error::{QuarticError, Result};
use crate::forms::{act_integral, InvariantPair};
use crate::localp::{splitting_type, SplittingType};
use crate::roots::{projective_roots, ProjRoot};
use crate::{Form, Invariants, Map, SignatureClass};

/// Shape constants of the reduced set S(K).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionParams {
    pub ka: u32,
    pub kw: u32,
}

impl Default for ReductionParams {
    fn default() -> Self {
        ReductionParams { ka: 2, kw: 4 }
    }
}

impl ReductionParams {
    pub fn doubled(self, times: u32) -> Self {
        ReductionParams { ka: self.ka << times, kw: self.kw << times }
    }
}

/// How many times canonicalization may double the reduced set before giving up.
pub const MAX_DOUBLINGS: u32 = 6;

/// Which orbits to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OrbitFilter {
    Generic,
    Irreducible,
    All,
}

impl std::str::FromStr for OrbitFilter {
    type Err = QuarticError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "generic" => Ok(OrbitFilter::Generic),
            "irreducible" => Ok(OrbitFilter::Irreducible),
            "all" => Ok(OrbitFilter::All),
            _ => Err(QuarticError::Parse(format!("unknown orbit filter {s:?}"))),
        }
    }
}

/// 4·H(I, J) = max(4|I|³, J²), an integer.
fn height4(i: i128, j: i128) -> BigInt {
    let i3: BigInt = BigInt::from(i).pow(3u32).abs() * 4u32;
    let j2: BigInt = BigInt::from(j).pow(2u32);
    i3.max(j2)
}

/// Largest n ≥ 0 with n⁶ ≤ k⁶·(h4/4)^e, i.e. n ≤ k·H^{e/6}.
fn height_power_bound(k: u32, h4: &BigInt, e: u32) -> i128 {
    let rhs = BigInt::from(k).pow(6) * h4.pow(e);
    let den = BigInt::from(4u32).pow(e);
    let fits = |n: i128| BigInt::from(n).pow(6) * &den <= rhs;
    let mut n = (rhs.to_f64().unwrap() / den.to_f64().unwrap()).powf(1.0 / 6.0) as i128 + 2;
    while n > 0 && !fits(n) {
        n -= 1;
    }
    while fits(n + 1) {
        n += 1;
    }
    n
}

/// The seminvariant 8ac − 3b².
pub fn seminvariant(f: &Form) -> i128 {
    8 * f.a * f.c - 3 * f.b * f.b
}

/// Membership in S(K), judged against the form's own height.
pub fn in_reduced_set(f: &Form, params: ReductionParams) -> bool {
    if f.a == 0 || f.b <= -2 * f.a.abs() || f.b > 2 * f.a.abs() {
        return false;
    }
    let Ok(ij) = f.invariants() else { return false };
    let h4 = height4(ij.i, ij.j);
    f.a.abs() <= height_power_bound(params.ka, &h4, 1) && seminvariant(f).abs() <= height_power_bound(params.kw, &h4, 2)
}

/// Membership in A₀ (forms with a root at (1:0), normalized).
pub fn in_root_set(f: &Form) -> bool {
    f.a == 0 && f.b > 0 && -3 * f.b < 2 * f.c && 2 * f.c <= 3 * f.b
}

pub fn is_reduced(f: &Form, params: ReductionParams) -> bool {
    in_root_set(f) || in_reduced_set(f, params)
}

/// Ordering key: absolute values lexicographically, then signed values.
pub fn reduction_key(f: &Form) -> ([u128; 5], [i128; 5]) {
    let c = f.coeffs();
    (c.map(|x| x.unsigned_abs()), c)
}

fn check_size(i: i128, j: i128) -> Result<()> {
    let limit = 1i128 << 40;
    if i.abs() >= limit || j.abs() >= limit {
        return Err(QuarticError::InfeasibleSize { size: i.unsigned_abs().max(j.unsigned_abs()), budget: limit as u128 });
    }
    Ok(())
}

/// R ≥ 0 with 27R² = 48I·a²·H − H³ − 64J·a³, if it exists (R = b³ + 8a²d − 4abc
/// for any form with leading coefficient a, seminvariant H and invariants I, J).
fn syzygy_root(i: i128, j: i128, a: i128, hs: i128) -> Option<i128> {
    let fast = (|| {
        let t1 = (48 * i).checked_mul(a * a)?.checked_mul(hs)?;
        let t2 = hs.checked_mul(hs)?.checked_mul(hs)?;
        let t3 = (64 * j).checked_mul(a * a * a)?;
        t1.checked_sub(t2)?.checked_sub(t3)
    })();
    let rhs = match fast {
        Some(v) => v,
        None => {
            let hs = BigInt::from(hs);
            let rhs = BigInt::from(48 * i * a * a) * &hs - hs.pow(3) - BigInt::from(64 * j) * BigInt::from(a).pow(3);
            if rhs.is_negative() || !(&rhs % 27u32).is_zero() {
                return None;
            }
            return crate::arith::exact_sqrt(&(rhs / 27u32)).and_then(|r| r.to_i128());
        }
    };
    if rhs < 0 || rhs % 27 != 0 {
        return None;
    }
    let n = (rhs / 27) as u128;
    let r = num_integer::Roots::sqrt(&n);
    (r * r == n).then_some(r as i128)
}

/// All reduced forms (in A₀ ∪ S(K)) with invariants exactly (I, J).
pub fn fiber_members(i: i128, j: i128, params: ReductionParams) -> Result<Vec<Form>> {
    check_size(i, j)?;
    if 4 * i * i * i == j * j {
        return Err(QuarticError::DegenerateDiscriminant);
    }
    let h4 = height4(i, j);
    let amax = height_power_bound(params.ka, &h4, 1);
    let hmax = height_power_bound(params.kw, &h4, 2);
    let mut out: Vec<Form> = (-amax..=amax)
        .into_par_iter()
        .filter(|&a| a != 0)
        .flat_map_iter(|a| {
            let mut found = Vec::new();
            for b in (-2 * a.abs() + 1)..=(2 * a.abs()) {
                let (c0, c1) = solve_linear_range(8 * a, 3 * b * b - hmax, 3 * b * b + hmax);
                for c in c0..=c1 {
                    let Some(r) = syzygy_root(i, j, a, 8 * a * c - 3 * b * b) else { continue };
                    let signs: &[i128] = if r == 0 { &[0] } else { &[r, -r] };
                    for &rr in signs {
                        let num = rr - b * b * b + 4 * a * b * c;
                        if num % (8 * a * a) != 0 {
                            continue;
                        }
                        let d = num / (8 * a * a);
                        let ne = i + 3 * b * d - c * c;
                        if ne % (12 * a) != 0 {
                            continue;
                        }
                        let f = Form::new(a, b, c, d, ne / (12 * a));
                        let ij = f.invariants().expect("small coefficients");
                        if ij.i == i && ij.j == j && in_reduced_set(&f, params) {
                            found.push(f);
                        }
                    }
                }
            }
            found
        })
        .collect();
    // A₀: Δ = b²·disc(cubic part), so b² | Δ.
    let delta = (4 * i * i * i - j * j) / 27;
    let bmax = (delta.unsigned_abs() as f64).sqrt() as i128 + 1;
    for b in 1..=bmax {
        if b * b > delta.abs() || delta % (b * b) != 0 {
            continue;
        }
        for c in cdiv(-3 * b + 1, 2)..=fdiv(3 * b, 2) {
            let nd = c * c - i;
            if nd % (3 * b) != 0 {
                continue;
            }
            let d = nd / (3 * b);
            let ne = 9 * b * c * d - 2 * c * c * c - j;
            if ne % (27 * b * b) != 0 {
                continue;
            }
            let f = Form::new(0, b, c, d, ne / (27 * b * b));
            let ij = f.invariants().expect("small coefficients");
            debug_assert!(ij.i == i && ij.j == j);
            out.push(f);
        }
    }
    out.sort_by_key(reduction_key);
    out.dedup();
    Ok(out)
}

/// All reduced forms with 0 < H < x and Δ ≠ 0, grouped by fiber (I, J).
/// Forms in A₀ (all reducible) are included only if `with_roots`.
pub fn reduced_forms_below(x: u64, params: ReductionParams, with_roots: bool) -> BTreeMap<(i128, i128), Vec<Form>> {
    let x = x as i128;
    let i0 = icbrt_strict(x as u128) as i128;
    let j0 = isqrt_strict(4 * x as u128) as i128;
    let h4x = BigInt::from(4 * x);
    let amax = height_power_bound(params.ka, &h4x, 1);
    let hmax = height_power_bound(params.kw, &h4x, 2);
    let mut units: Vec<(i128, i128)> = Vec::new();
    for a in -amax..=amax {
        if a != 0 {
            for b in (-2 * a.abs() + 1)..=(2 * a.abs()) {
                units.push((a, b));
            }
        }
    }
    let mut forms: Vec<Form> = units
        .into_par_iter()
        .flat_map_iter(|(a, b)| {
            let (c0, c1) = solve_linear_range(8 * a, 3 * b * b - hmax, 3 * b * b + hmax);
            let mut found = Vec::new();
            for c in c0..=c1 {
                let hs = 8 * a * c - 3 * b * b;
                let bound = 48 * i0 * a * a * hs.abs() - hs * hs * hs + 64 * j0 * (a * a * a).abs();
                if bound < 0 {
                    continue;
                }
                let rmax = isqrt_strict(bound as u128 / 27 + 1) as i128;
                let shift = 4 * a * b * c - b * b * b;
                let (d0, d1) = solve_linear_range(8 * a * a, shift - rmax, shift + rmax);
                for d in d0..=d1 {
                    let (mut e0, mut e1) = solve_linear_range(12 * a, -i0 + 3 * b * d - c * c, i0 + 3 * b * d - c * c);
                    let rest = 9 * b * c * d - 27 * a * d * d - 2 * c * c * c;
                    if hs != 0 {
                        let (f0, f1) = solve_linear_range(9 * hs, -j0 - rest, j0 - rest);
                        e0 = e0.max(f0);
                        e1 = e1.min(f1);
                    } else if rest.abs() > j0 {
                        continue;
                    }
                    for e in e0..=e1 {
                        let f = Form::new(a, b, c, d, e);
                        let ij = f.invariants().expect("small coefficients");
                        if 4 * ij.i * ij.i * ij.i != ij.j * ij.j && in_reduced_set(&f, params) {
                            found.push(f);
                        }
                    }
                }
            }
            found
        })
        .collect();
    if with_roots {
        let bmax = isqrt_strict(8 * x as u128 / 27 + 1) as i128;
        let roots: Vec<Form> = (1..=bmax)
            .into_par_iter()
            .flat_map_iter(|b| {
                let mut found = Vec::new();
                for c in cdiv(-3 * b + 1, 2)..=fdiv(3 * b, 2) {
                    let (d0, d1) = solve_linear_range(3 * b, c * c - i0, c * c + i0);
                    for d in d0..=d1 {
                        let k = 9 * b * c * d - 2 * c * c * c;
                        let (e0, e1) = solve_linear_range(-27 * b * b, -j0 - k, j0 - k);
                        for e in e0..=e1 {
                            let f = Form::new(0, b, c, d, e);
                            let ij = f.invariants().expect("small coefficients");
                            if 4 * ij.i * ij.i * ij.i != ij.j * ij.j {
                                found.push(f);
                            }
                        }
                    }
                }
                found
            })
            .collect();
        forms.extend(roots);
    }
    let mut fibers: BTreeMap<(i128, i128), Vec<Form>> = BTreeMap::new();
    for f in forms {
        let ij = f.invariants().expect("small coefficients");
        fibers.entry((ij.i, ij.j)).or_default().push(f);
    }
    for v in fibers.values_mut() {
        v.sort_by_key(reduction_key);
    }
    fibers
}

type C2 = [[Complex64; 2]; 2];

/// Matrix whose rows are multiples of p1, p2 with row sum p3.
fn frame(p1: &ProjRoot, p2: &ProjRoot, p3: &ProjRoot) -> Option<C2> {
    let det = p1[0] * p2[1] - p2[0] * p1[1];
    if det.norm() < 1e-300 {
        return None;
    }
    let m1 = (p3[0] * p2[1] - p2[0] * p3[1]) / det;
    let m2 = (p1[0] * p3[1] - p3[0] * p1[1]) / det;
    Some([[m1 * p1[0], m1 * p1[1]], [m2 * p2[0], m2 * p2[1]]])
}

fn mat_mul(x: &C2, y: &C2) -> C2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = x[r][0] * y[0][c] + x[r][1] * y[1][c];
        }
    }
    out
}

fn mat_inv(x: &C2) -> Option<C2> {
    let det = x[0][0] * x[1][1] - x[0][1] * x[1][0];
    if det.norm() < 1e-300 {
        return None;
    }
    Some([[x[1][1] / det, -x[0][1] / det], [-x[1][0] / det, x[0][0] / det]])
}

fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                if a != b && a != c && b != c && a + b + c <= 6 {
                    let d = 6 - a - b - c;
                    if d < 4 && d != a && d != b && d != c {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
    }
    out
}

/// PGL₂ normalization: overall sign chosen so the first nonzero entry is positive.
fn normalize_sign(g: Map) -> Map {
    let first = [g.m11, g.m12, g.m21, g.m22].into_iter().find(|x| *x != 0).unwrap_or(1);
    if first < 0 {
        Map::new(-g.m11, -g.m12, -g.m21, -g.m22)
    } else {
        g
    }
}

/// All g ∈ PGL₂(ℤ) with g·f1 = f2 (each up to sign), every one verified in
/// exact arithmetic. Forms must have Δ ≠ 0.
pub fn equivalence_maps(f1: &Form, f2: &Form) -> Vec<Map> {
    maps_from_roots(f1, &projective_roots(f1), f2, &projective_roots(f2), false)
}

/// Core of [`equivalence_maps`] on precomputed roots; with `first_only` it
/// stops at the first verified map.
fn maps_from_roots(f1: &Form, r1: &[ProjRoot], f2: &Form, r2: &[ProjRoot], first_only: bool) -> Vec<Map> {
    let (b1, b2) = (f1.promote(), f2.promote());
    let mut maps: Vec<Map> = Vec::new();
    let Some(bmat) = frame(&r2[0], &r2[1], &r2[2]) else { return maps };
    let Some(binv) = mat_inv(&bmat) else { return maps };
    for s in permutations4() {
        let Some(amat) = frame(&r1[s[0]], &r1[s[1]], &r1[s[2]]) else { continue };
        let n = mat_mul(&binv, &amat);
        // Fourth root must land on the remaining one.
        let v = [r2[3][0] * n[0][0] + r2[3][1] * n[1][0], r2[3][0] * n[0][1] + r2[3][1] * n[1][1]];
        let w = r1[s[3]];
        let cross = (v[0] * w[1] - v[1] * w[0]).norm();
        if cross > 1e-6 * (v[0].norm() + v[1].norm()) * (w[0].norm() + w[1].norm()) {
            continue;
        }
        let det = n[0][0] * n[1][1] - n[0][1] * n[1][0];
        let base = (Complex64::new(1.0, 0.0) / det).sqrt();
        for scale in [base, base * Complex64::new(0.0, 1.0)] {
            let m = n.map(|row| row.map(|z| z * scale));
            let mut ints = [[0i128; 2]; 2];
            let mut ok = true;
            for r in 0..2 {
                for c in 0..2 {
                    let z = m[r][c];
                    let rounded = z.re.round();
                    let tol = 1e-6 * (1.0 + z.norm());
                    if (z.re - rounded).abs() > tol || z.im.abs() > tol || rounded.abs() > 1e15 {
                        ok = false;
                    }
                    ints[r][c] = rounded as i128;
                }
            }
            if !ok || (ints[0][0] * ints[1][1] - ints[0][1] * ints[1][0]).abs() != 1 {
                continue;
            }
            let g = normalize_sign(Map::from_substitution(ints));
            if maps.contains(&g) {
                continue;
            }
            if act_integral(&g.promote(), &b1).as_ref() == Some(&b2) {
                maps.push(g);
                if first_only {
                    return maps;
                }
            }
        }
    }
    maps.sort_by_key(|g| (g.m11, g.m12, g.m21, g.m22));
    maps
}

/// Exact equivalence under PGL₂(ℤ).
pub fn are_equivalent(f1: &Form, f2: &Form) -> Result<bool> {
    let (i1, i2) = (f1.invariants()?, f2.invariants()?);
    if i1.i != i2.i || i1.j != i2.j {
        return Ok(false);
    }
    if i1.delta.is_zero() {
        return Err(QuarticError::DegenerateDiscriminant);
    }
    Ok(!equivalence_maps(f1, f2).is_empty())
}

/// Order of the stabilizer of f in PGL₂(ℤ).
pub fn stabilizer_order(f: &Form) -> Result<u32> {
    if f.invariants()?.delta.is_zero() {
        return Err(QuarticError::DegenerateDiscriminant);
    }
    let n = equivalence_maps(f, f).len() as u32;
    assert!((1..=4).contains(&n), "stabilizer of order {n} for {f}");
    Ok(n)
}

/// The canonical representative of the orbit of f: the key-minimal member of
/// A₀ ∪ S(2ʲK) for the least j at which the orbit meets that set.
pub fn canonicalize(f: &Form) -> Result<Form> {
    canonicalize_with(f, ReductionParams::default())
}

pub fn canonicalize_with(f: &Form, params: ReductionParams) -> Result<Form> {
    let ij = f.invariants()?;
    if ij.delta.is_zero() {
        return Err(QuarticError::DegenerateDiscriminant);
    }
    for t in 0..=MAX_DOUBLINGS {
        for m in fiber_members(ij.i, ij.j, params.doubled(t))? {
            if !equivalence_maps(f, &m).is_empty() {
                return Ok(m);
            }
        }
    }
    Err(QuarticError::NonConvergence(format!("no reduced member found for {f}")))
}

/// One orbit: canonical representative and its attributes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "OrbitRow", try_from = "OrbitRow")]
pub struct OrbitRecord {
    pub rep: Form,
    pub ij: Invariants,
    pub cls: SignatureClass,
    pub irreducible: bool,
    pub generic: bool,
    pub stabilizer_order: u32,
}

impl OrbitRecord {
    pub fn from_rep(rep: Form) -> Result<Self> {
        let ij = rep.invariants()?;
        let irreducible = rep.is_irreducible()?;
        let generic = irreducible && rep.is_generic()?;
        Ok(OrbitRecord { cls: rep.signature()?, stabilizer_order: stabilizer_order(&rep)?, rep, ij, irreducible, generic })
    }

    pub fn passes(&self, filter: OrbitFilter) -> bool {
        match filter {
            OrbitFilter::Generic => self.generic,
            OrbitFilter::Irreducible => self.irreducible,
            OrbitFilter::All => true,
        }
    }

    /// Sort key: (H, I, J, rep).
    pub fn order_key(&self) -> (Ratio<i128>, i128, i128, [i128; 5]) {
        (self.ij.height, self.ij.i, self.ij.j, self.rep.coeffs())
    }
}

#[derive(Serialize, Deserialize)]
struct OrbitRow {
    a: i128,
    b: i128,
    c: i128,
    d: i128,
    e: i128,
    #[serde(rename = "I")]
    i: i128,
    #[serde(rename = "J")]
    j: i128,
    disc: i128,
    height: String,
    class: String,
    generic: bool,
    irreducible: bool,
    stab: u32,
}

impl From<OrbitRecord> for OrbitRow {
    fn from(r: OrbitRecord) -> Self {
        let [a, b, c, d, e] = r.rep.coeffs();
        OrbitRow {
            a,
            b,
            c,
            d,
            e,
            i: r.ij.i,
            j: r.ij.j,
            disc: r.ij.delta.to_integer(),
            height: r.ij.height.to_string(),
            class: r.cls.label().to_string(),
            generic: r.generic,
            irreducible: r.irreducible,
            stab: r.stabilizer_order,
        }
    }
}

impl TryFrom<OrbitRow> for OrbitRecord {
    type Error = QuarticError;
    fn try_from(row: OrbitRow) -> Result<Self> {
        let rep = Form::new(row.a, row.b, row.c, row.d, row.e);
        let ij = rep.invariants()?;
        if ij.i != row.i || ij.j != row.j {
            return Err(QuarticError::Parse(format!("orbit record {rep} has inconsistent invariants")));
        }
        Ok(OrbitRecord {
            rep,
            ij,
            cls: row.class.parse()?,
            irreducible: row.irreducible,
            generic: row.generic,
            stabilizer_order: row.stab,
        })
    }
}

/// Splitting types modulo a few small primes: an orbit invariant used to
/// skip equivalence tests between forms that cannot be equivalent.
fn local_key(f: &Form) -> Vec<SplittingType> {
    [3, 5, 7, 11].into_iter().map(|p| splitting_type(f, p)).collect()
}

/// Split the reduced members of one fiber into orbits; each orbit is
/// represented by its key-minimal member. `members` must be the complete
/// reduced set of the fiber for the representatives to be canonical.
pub fn orbits_in_fiber(members: &[Form]) -> Result<Vec<OrbitRecord>> {
    let mut sorted = members.to_vec();
    sorted.sort_by_key(reduction_key);
    sorted.dedup();
    let roots: Vec<Vec<ProjRoot>> = sorted.iter().map(projective_roots).collect();
    let keys: Vec<Vec<SplittingType>> = sorted.iter().map(local_key).collect();
    let mut taken = vec![false; sorted.len()];
    let mut out = Vec::new();
    for k in 0..sorted.len() {
        if taken[k] {
            continue;
        }
        taken[k] = true;
        for l in k + 1..sorted.len() {
            if !taken[l]
                && keys[k] == keys[l]
                && !maps_from_roots(&sorted[k], &roots[k], &sorted[l], &roots[l], true).is_empty()
            {
                taken[l] = true;
            }
        }
        out.push(OrbitRecord::from_rep(sorted[k].clone())?);
    }
    Ok(out)
}

/// The orbits with invariants (I, J).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberIndex {
    pub i: i128,
    pub j: i128,
    pub orbits: Vec<OrbitRecord>,
}

pub fn enumerate_fiber(i: i128, j: i128) -> Result<FiberIndex> {
    enumerate_fiber_with(i, j, ReductionParams::default())
}

pub fn enumerate_fiber_with(i: i128, j: i128, params: ReductionParams) -> Result<FiberIndex> {
    InvariantPair::from_ij(i, j)?;
    let members = fiber_members(i, j, params)?;
    Ok(FiberIndex { i, j, orbits: orbits_in_fiber(&members)? })
}

/// Every orbit with H < x in the given class (or all classes) passing the
/// filter, ordered by (H, I, J, rep).
pub fn enumerate_orbits(
    cls: Option<SignatureClass>,
    x: u64,
    filter: OrbitFilter,
    params: ReductionParams,
) -> Result<Vec<OrbitRecord>> {
    let fibers = reduced_forms_below(x, params, filter == OrbitFilter::All);
    let wanted_sign = cls.map(|c| if c.disc_positive() { 1 } else { -1 });
    let work: Vec<(&(i128, i128), &Vec<Form>)> = fibers
        .iter()
        .filter(|((i, j), _)| wanted_sign.map_or(true, |s| (4 * i * i * i - j * j).signum() == s))
        .collect();
    let per_fiber: Vec<Result<Vec<OrbitRecord>>> = work.par_iter().map(|(_, m)| orbits_in_fiber(m)).collect();
    let mut out = Vec::new();
    for r in per_fiber {
        out.extend(r?.into_iter().filter(|o| o.passes(filter) && cls.map_or(true, |c| o.cls == c)));
    }
    out.sort_by_key(|o| o.order_key());
    Ok(out)
}

/// Double the reduced-set constants until the number of orbits below `x`
/// stays the same across two further doublings; returns the first stable
/// parameters.
pub fn calibrate(x: u64, start: ReductionParams) -> Result<ReductionParams> {
    let count = |p: ReductionParams| enumerate_orbits(None, x, OrbitFilter::All, p).map(|v| v.len());
    let mut counts = vec![count(start)?, count(start.doubled(1))?];
    for t in 0..MAX_DOUBLINGS {
        counts.push(count(start.doubled(t + 2))?);
        let k = counts.len();
        if counts[k - 3] == counts[k - 1] {
            return Ok(start.doubled(t));
        }
    }
    Err(QuarticError::NonConvergence(format!("orbit counts still growing after {MAX_DOUBLINGS} doublings: {counts:?}")))
}

/// Second enumeration strategy: every integral form with all coefficients
/// in [−bound, bound], Δ ≠ 0 and H < x, deduplicated into orbits by the
/// equivalence oracle and reported by canonical representative. Independent
/// of the reduced sets except for the final choice of representative.
pub fn enumerate_orbits_box(cls: Option<SignatureClass>, x: u64, filter: OrbitFilter, bound: i128) -> Result<Vec<OrbitRecord>> {
    let xi = x as i128;
    let xr = Ratio::from_integer(xi);
    // |I| < x^{1/3}, so for a ≠ 0 the coefficient e lies in a short range.
    let imax = crate::arith::icbrt_strict(x as u128) as i128;
    let raw: Vec<Form> = (-bound..=bound)
        .into_par_iter()
        .flat_map_iter(|a| {
            let mut found = Vec::new();
            for b in -bound..=bound {
                for c in -bound..=bound {
                    for d in -bound..=bound {
                        let (e0, e1) = if a == 0 {
                            (-bound, bound)
                        } else {
                            let (lo, hi) = solve_linear_range(12 * a, -imax + 3 * b * d - c * c, imax + 3 * b * d - c * c);
                            (lo.max(-bound), hi.min(bound))
                        };
                        for e in e0..=e1 {
                            let f = Form::new(a, b, c, d, e);
                            let ij = f.invariants().expect("small coefficients");
                            if ij.delta.is_zero() || !ij.height_below(&xr) {
                                continue;
                            }
                            found.push(f);
                        }
                    }
                }
            }
            found
        })
        .collect();
    let mut by_fiber: BTreeMap<(i128, i128), Vec<Form>> = BTreeMap::new();
    for f in raw {
        let ij = f.invariants()?;
        by_fiber.entry((ij.i, ij.j)).or_default().push(f);
    }
    let per_fiber: Vec<Result<Vec<OrbitRecord>>> = by_fiber
        .into_par_iter()
        .map(|(_, forms)| {
            let mut reps: Vec<Form> = Vec::new();
            for f in forms {
                if !reps.iter().any(|r| !equivalence_maps(&f, r).is_empty()) {
                    reps.push(f);
                }
            }
            reps.iter().map(|r| OrbitRecord::from_rep(canonicalize(r)?)).collect()
        })
        .collect();
    let mut out = Vec::new();
    for r in per_fiber {
        out.extend(r?.into_iter().filter(|o| o.passes(filter) && cls.map_or(true, |c| o.cls == c)));
    }
    out.sort_by_key(|o| o.order_key());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(c: [i128; 5]) -> Form {
        Form::from_coeffs(c)
    }

    #[test]
    fn equivalence_of_translates() {
        let g = f([1, 0, 0, 1, 1]);
        let h = act_integral(&Map::new(2, 1, 1, 1).promote(), &g.promote()).unwrap().narrow().unwrap();
        assert!(are_equivalent(&g, &h).unwrap());
        assert!(!are_equivalent(&f([1, 0, 0, 0, 1]), &f([1, 0, 0, 0, -1])).unwrap());
        assert_eq!(stabilizer_order(&f([1, 0, 0, 0, 1])).unwrap(), 4);
        assert_eq!(stabilizer_order(&g).unwrap(), 1);
    }

    #[test]
    fn canonical_examples() {
        // The swap (x, y) ↦ (y, x) is unimodular.
        let x = canonicalize(&f([0, 1, 0, -1, 0])).unwrap();
        assert_eq!(x, canonicalize(&f([0, -1, 0, 1, 0])).unwrap());
        assert_eq!(canonicalize(&f([1, 0, -1, 0, 0])), Err(QuarticError::DegenerateDiscriminant));
        assert_eq!(canonicalize(&x).unwrap(), x);
        let g = f([1, 0, 0, 1, 1]);
        let c = canonicalize(&g).unwrap();
        let h = act_integral(&Map::new(3, 2, 1, 1).promote(), &g.promote()).unwrap().narrow().unwrap();
        assert_eq!(canonicalize(&h).unwrap(), c);
    }

    #[test]
    fn fiber_examples() {
        let fib = enumerate_fiber(3, 0).unwrap();
        let target = canonicalize(&f([0, 1, 0, -1, 0])).unwrap();
        assert!(fib.orbits.iter().any(|o| o.rep == target && !o.irreducible && o.cls == SignatureClass::Class0));
        let fib = enumerate_fiber(12, -27).unwrap();
        let target = canonicalize(&f([1, 0, 0, 1, 1])).unwrap();
        assert!(fib.orbits.iter().any(|o| o.rep == target && o.generic));
    }

    #[test]
    fn strategies_agree_at_small_height() {
        let x = 2000;
        let a = enumerate_orbits(None, x, OrbitFilter::All, ReductionParams::default()).unwrap();
        let b = enumerate_orbits_box(None, x, OrbitFilter::All, 12).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().any(|o| o.irreducible));
    }

    #[test]
    fn json_round_trip() {
        let r = OrbitRecord::from_rep(f([1, 0, 0, 1, 1])).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"I\":12") && s.contains("\"class\":\"2+\""));
        let back: OrbitRecord = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
