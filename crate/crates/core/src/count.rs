//! Counting functions: orbit counts by height with weights, 2-Selmer sums
//! over elliptic curves, truncated Dirichlet series of slice densities, and
//! two-term asymptotic fits.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arch;
use crate::error::{QuarticError, Result};
use crate::forms::resolvent_is_irreducible;
use crate::localp::{self, SplittingType};
use crate::reduce::{self, OrbitFilter, OrbitRecord, ReductionParams};
use crate::SignatureClass;

/// The weight φ summed over orbits.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Weight {
    /// φ ≡ 1.
    One,
    /// ℓ(f)/m(f) on generic orbits, 0 on the others.
    EllOverM,
    /// Indicator of splitting type σ at p (optionally with maximal resolvent ring).
    Splitting { p: u64, sigma: SplittingType, maximal: bool },
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::One => f.write_str("one"),
            Weight::EllOverM => f.write_str("ell_over_m"),
            Weight::Splitting { p, sigma, maximal } => {
                write!(f, "splitting:{p}:{sigma}{}", if *maximal { ":max" } else { "" })
            }
        }
    }
}

impl FromStr for Weight {
    type Err = QuarticError;
    /// `one`, `ell_over_m`, or `splitting:<p>:<type>[:max]`, e.g. `splitting:5:(1111)`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one" => return Ok(Weight::One),
            "ell_over_m" => return Ok(Weight::EllOverM),
            _ => {}
        }
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["splitting", p, t] | ["splitting", p, t, "max"] => Ok(Weight::Splitting {
                p: p.parse().map_err(|_| QuarticError::Parse(format!("bad prime in {s:?}")))?,
                sigma: t.parse()?,
                maximal: parts.len() == 4,
            }),
            _ => Err(QuarticError::Parse(format!("unknown weight {s:?}"))),
        }
    }
}

impl Weight {
    /// φ(f) on an orbit.
    pub fn eval(&self, o: &OrbitRecord) -> Result<BigRational> {
        match self {
            Weight::One => Ok(BigRational::one()),
            Weight::EllOverM => {
                if !o.generic {
                    return Ok(BigRational::zero());
                }
                let w = localp::global_weights(&o.rep)?;
                Ok(BigRational::new(BigInt::from(w.ell), BigInt::from(w.m)))
            }
            Weight::Splitting { p, sigma, maximal } => {
                let hit = localp::splitting_type(&o.rep, *p) == *sigma
                    && (!maximal || localp::is_resolvent_maximal_at(&o.rep, *p).unwrap_or(false));
                Ok(if hit { BigRational::one() } else { BigRational::zero() })
            }
        }
    }
}

/// One row of a count series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountRow {
    pub x: u64,
    pub class: String,
    pub filter: String,
    pub raw: u64,
    /// Exact weighted count as "num/den".
    pub weighted: String,
}

/// Orbit counts at a grid of heights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountSeries {
    pub weight: String,
    pub rows: Vec<CountRow>,
    pub config_hash: String,
}

impl CountSeries {
    /// (X, raw count) for one class, in increasing X.
    pub fn raw_points(&self, cls: SignatureClass) -> Vec<(f64, f64)> {
        self.rows.iter().filter(|r| r.class == cls.label()).map(|r| (r.x as f64, r.raw as f64)).collect()
    }
}

/// Exact rational as "num/den".
pub fn rational_string(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// `n` heights geometrically spaced from `lo` to `hi` inclusive (rounded, deduplicated).
pub fn geometric_grid(lo: u64, hi: u64, n: usize) -> Vec<u64> {
    assert!(lo >= 1 && hi >= lo && n >= 2);
    let r = (hi as f64 / lo as f64).powf(1.0 / (n - 1) as f64);
    let mut out: Vec<u64> = (0..n).map(|k| (lo as f64 * r.powi(k as i32)).round() as u64).collect();
    *out.last_mut().unwrap() = hi;
    out.dedup();
    out
}

/// Σ φ over orbits with H < X in each requested class, for every X in
/// `checkpoints`. The orbits are enumerated once at the largest X.
pub fn count_orbits(
    classes: &[SignatureClass],
    checkpoints: &[u64],
    phi: &Weight,
    filter: OrbitFilter,
    params: ReductionParams,
) -> Result<CountSeries> {
    let mut xs = checkpoints.to_vec();
    xs.sort_unstable();
    xs.dedup();
    let Some(&xmax) = xs.last() else {
        return Err(QuarticError::InsufficientData("no checkpoints".into()));
    };
    let orbits = reduce::enumerate_orbits(None, xmax, filter, params)?;
    let weights: Vec<Result<BigRational>> = orbits.par_iter().map(|o| phi.eval(o)).collect();
    let mut rows = Vec::new();
    for &cls in classes {
        for &x in &xs {
            let bound = Ratio::from_integer(x as i128);
            let mut raw = 0u64;
            let mut weighted = BigRational::zero();
            for (o, w) in orbits.iter().zip(&weights) {
                if o.cls == cls && o.ij.height < bound {
                    raw += 1;
                    weighted += w.clone()?;
                }
            }
            rows.push(CountRow {
                x,
                class: cls.label().to_string(),
                filter: filter_label(filter).to_string(),
                raw,
                weighted: rational_string(&weighted),
            });
        }
    }
    Ok(CountSeries { weight: phi.to_string(), rows, config_hash: String::new() })
}

pub fn filter_label(f: OrbitFilter) -> &'static str {
    match f {
        OrbitFilter::Generic => "generic",
        OrbitFilter::Irreducible => "irreducible",
        OrbitFilter::All => "all",
    }
}

/// Theory for the count in class i: (2ζ(2)C_{5/6}/(27σ), ζ(1/2)C_{3/4}/(108σ)).
pub fn theory_constants(cls: SignatureClass, c34: f64) -> (f64, f64) {
    (arch::primary_constant(cls.disc_positive(), cls.sigma()), arch::secondary_constant(c34, cls.sigma()))
}

/// Result of a two-term least-squares fit count(X) ≈ c1·X^{5/6} + c2·X^{3/4}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub class: String,
    pub c1_hat: f64,
    pub c2_hat: f64,
    pub c1_theory: f64,
    pub c2_theory: f64,
    /// Slope of log|residual| against log X after removing the fitted terms
    /// (NaN if fewer than two nonzero residuals).
    pub residual_exponent: f64,
    /// (X, count − c1_theory·X^{5/6}) at each checkpoint.
    pub primary_residuals: Vec<(f64, f64)>,
}

/// Least squares for y ≈ c1·u + c2·v (2×2 normal equations, rescaled).
fn two_term_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    // Divide through by X^{3/4}: y/X^{3/4} ≈ c1·X^{1/12} + c2, which is
    // well conditioned across decades.
    let (mut s00, mut s01, mut s11, mut t0, mut t1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y) in pts {
        let u = x.powf(1.0 / 12.0);
        let z = y / x.powf(0.75);
        s00 += u * u;
        s01 += u;
        s11 += 1.0;
        t0 += u * z;
        t1 += z;
    }
    let det = s00 * s11 - s01 * s01;
    ((t0 * s11 - t1 * s01) / det, (s00 * t1 - s01 * t0) / det)
}

/// Fit the raw counts of one class; `c34` is C_{3/4} for the class's sign.
pub fn fit_terms(series: &CountSeries, cls: SignatureClass, c34: f64) -> Result<FitReport> {
    let pts = series.raw_points(cls);
    fit_points(&pts, cls, c34)
}

pub fn fit_points(pts: &[(f64, f64)], cls: SignatureClass, c34: f64) -> Result<FitReport> {
    if pts.len() < 8 {
        return Err(QuarticError::InsufficientData(format!("{} checkpoints (need 8)", pts.len())));
    }
    let (lo, hi) = pts.iter().fold((f64::MAX, 0.0f64), |(l, h), p| (l.min(p.0), h.max(p.0)));
    if hi / lo < 100.0 {
        return Err(QuarticError::InsufficientData("checkpoints span less than two decades".into()));
    }
    let (c1_hat, c2_hat) = two_term_fit(pts);
    let (c1_theory, c2_theory) = theory_constants(cls, c34);
    let logs: Vec<(f64, f64)> = pts
        .iter()
        .filter_map(|&(x, y)| {
            let r = (y - c1_hat * x.powf(5.0 / 6.0) - c2_hat * x.powf(0.75)).abs();
            (r > 0.0).then(|| (x.ln(), r.ln()))
        })
        .collect();
    let residual_exponent = if logs.len() >= 2 {
        let n = logs.len() as f64;
        let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
        let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    } else {
        f64::NAN
    };
    Ok(FitReport {
        class: cls.label().to_string(),
        c1_hat,
        c2_hat,
        c1_theory,
        c2_theory,
        residual_exponent,
        primary_residuals: pts.iter().map(|&(x, y)| (x, y - c1_theory * x.powf(5.0 / 6.0))).collect(),
    })
}

/// An elliptic curve y² = x³ + Ax + B and its 2-Selmer data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    #[serde(rename = "A")]
    pub a: i64,
    #[serde(rename = "B")]
    pub b: i64,
    #[serde(rename = "I")]
    pub i: i128,
    #[serde(rename = "J")]
    pub j: i128,
    /// max(4|A|³, 27B²).
    pub height: u64,
    /// 1 + Σ ℓ/m over generic orbits, as "num/den".
    pub selmer_sum: String,
    /// The sum when it is an integer.
    pub sel2: Option<u64>,
}

/// Minimal Weierstrass pair: no prime p with p⁴ | A and p⁶ | B.
pub fn is_minimal(a: i64, b: i64) -> bool {
    let (a, b) = (a as i128, b as i128);
    let g = a.gcd(&b);
    if g == 0 {
        return false;
    }
    let fails = |p: i128| a % p.pow(4) == 0 && p.checked_pow(6).map_or(b == 0, |p6| b % p6 == 0);
    let mut rest = g;
    let mut p = 2i128;
    while p * p <= rest {
        if rest % p == 0 {
            if fails(p) {
                return false;
            }
            while rest % p == 0 {
                rest /= p;
            }
        }
        p += 1;
    }
    !(rest > 1 && fails(rest))
}

/// Curve height max(4|A|³, 27B²).
pub fn curve_height(a: i64, b: i64) -> u64 {
    let (a, b) = (a.unsigned_abs(), b.unsigned_abs());
    (4 * a * a * a).max(27 * b * b)
}

/// Minimal curves with height < x and Δ_E of the given sign (Δ_E has the sign
/// of −(4A³ + 27B²)), split into trivial and nontrivial rational 2-torsion.
pub fn curves_below(x: u64, positive: bool) -> (Vec<(i64, i64)>, Vec<(i64, i64)>) {
    let amax = (1..).take_while(|&a: &u64| 4 * a * a * a < x).last().unwrap_or(0) as i64;
    let bmax = (1..).take_while(|&b: &u64| 27 * b * b < x).last().unwrap_or(0) as i64;
    let (mut trivial, mut torsion) = (Vec::new(), Vec::new());
    for a in -amax..=amax {
        for b in -bmax..=bmax {
            let s = 4 * (a as i128).pow(3) + 27 * (b as i128).pow(2);
            if s == 0 || (s < 0) != positive || curve_height(a, b) >= x || !is_minimal(a, b) {
                continue;
            }
            let (i, j) = (BigInt::from(-48 * a), BigInt::from(-1728 * b));
            if resolvent_is_irreducible(&i, &j) {
                trivial.push((a, b));
            } else {
                torsion.push((a, b));
            }
        }
    }
    (trivial, torsion)
}

/// Selmer data of one curve with trivial 2-torsion.
pub fn curve_record(a: i64, b: i64, params: ReductionParams) -> Result<CurveRecord> {
    let (i, j) = (-48 * a as i128, -1728 * b as i128);
    let fiber = reduce::enumerate_fiber_with(i, j, params)?;
    let mut sum = BigRational::one();
    for o in fiber.orbits.iter().filter(|o| o.generic) {
        let w = localp::global_weights(&o.rep)?;
        sum += BigRational::new(BigInt::from(w.ell), BigInt::from(w.m));
    }
    let sel2 = sum.is_integer().then(|| sum.to_integer().to_u64()).flatten();
    Ok(CurveRecord { a, b, i, j, height: curve_height(a, b), selmer_sum: rational_string(&sum), sel2 })
}

/// Totals of a Selmer run at one height.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelmerCheckpoint {
    pub x: u64,
    pub positive: bool,
    /// Curves with trivial 2-torsion (entering the sum).
    pub curves: u64,
    /// Curves with a rational 2-torsion point (excluded).
    pub torsion_curves: u64,
    /// Σ (1 + Σ ℓ/m) over the curves, as "num/den".
    pub selmer_total: String,
    pub average: f64,
}

/// Selmer sums over minimal curves of height < x with Δ of the given sign.
pub fn selmer_sum(x: u64, positive: bool, params: ReductionParams) -> Result<(SelmerCheckpoint, Vec<CurveRecord>)> {
    let (series, recs) = selmer_series(&[x], positive, params)?;
    Ok((series.into_iter().next().expect("one checkpoint"), recs))
}

/// Selmer totals at several heights from one enumeration at the largest.
pub fn selmer_series(xs: &[u64], positive: bool, params: ReductionParams) -> Result<(Vec<SelmerCheckpoint>, Vec<CurveRecord>)> {
    let xmax = *xs.iter().max().ok_or_else(|| QuarticError::InsufficientData("no checkpoints".into()))?;
    let (trivial, torsion) = curves_below(xmax, positive);
    let recs: Vec<Result<CurveRecord>> = trivial.par_iter().map(|&(a, b)| curve_record(a, b, params)).collect();
    let recs: Vec<CurveRecord> = recs.into_iter().collect::<Result<_>>()?;
    let mut out = Vec::new();
    for &x in xs {
        let mut total = BigRational::zero();
        let mut n = 0u64;
        for r in recs.iter().filter(|r| r.height < x) {
            total += parse_rational(&r.selmer_sum)?;
            n += 1;
        }
        let nt = torsion.iter().filter(|&&(a, b)| curve_height(a, b) < x).count() as u64;
        let average = if n == 0 { f64::NAN } else { (&total / BigInt::from(n)).to_f64().unwrap_or(f64::NAN) };
        out.push(SelmerCheckpoint {
            x,
            positive,
            curves: n,
            torsion_curves: nt,
            selmer_total: rational_string(&total),
            average,
        });
    }
    Ok((out, recs))
}

/// Parse "num/den" or an integer.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || QuarticError::Parse(format!("bad rational {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let d: BigInt = d.parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n.parse().map_err(|_| bad())?, d))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// The function φ of a Dirichlet series D^±(φ, s) = Σ_{a>0} ν_{±a}(φ)/a^s.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DirichletWeight {
    One,
    /// χ_σ (or χ_σ^max) at a single odd prime.
    Splitting { p: u64, sigma: SplittingType, maximal: bool },
}

/// ν_{p^k}(χ) for the three columns k = 0, 1, ≥2.
fn slice_columns(p: u64, sigma: &SplittingType, maximal: bool) -> Result<[f64; 3]> {
    let mut out = [0.0; 3];
    for (k, slot) in out.iter_mut().enumerate() {
        let v = localp::density_slice(sigma, maximal, p, k as u32)?.ok_or_else(|| {
            QuarticError::NonConvergence(format!("no slice densities for {sigma}{} at {p}", if maximal { " (maximal)" } else { "" }))
        })?;
        *slot = v.to_f64().unwrap_or(f64::NAN);
    }
    Ok(out)
}

/// ν_a(φ) for a > 0 (φ is unit-invariant, so ν_a = ν_{−a}).
fn nu(phi: &DirichletWeight, cols: &[f64; 3], a: u64) -> f64 {
    match phi {
        DirichletWeight::One => 1.0,
        DirichletWeight::Splitting { p, .. } => {
            let mut k = 0;
            let mut a = a;
            while a % p == 0 && k < 2 {
                a /= p;
                k += 1;
            }
            cols[k]
        }
    }
}

/// ζ(s) for s > 1 by Euler–Maclaurin with N terms, or ζ(1/2).
fn zeta_real(s: f64) -> Result<f64> {
    if s == 0.5 {
        return Ok(arch::zeta_half::<f64>());
    }
    if s <= 1.0 {
        return Err(QuarticError::NonConvergence(format!("ζ(s) not available at s = {s}")));
    }
    let n = 1000u64;
    let mut sum: f64 = (1..n).map(|a| (a as f64).powf(-s)).sum();
    let nf = n as f64;
    // Euler–Maclaurin tail from N: N^{1−s}/(s−1) + N^{−s}/2 + s N^{−s−1}/12 − …
    sum += nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s) + s * nf.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * nf.powf(-s - 3.0) / 720.0;
    Ok(sum)
}

/// D^±(φ, s). For s > 1 the raw partial sum over a ≤ a_max; for s = 1/2 the
/// analytic value through the Euler product: D(χ_σ at p, s) = D_p(s)·ζ(s)·(1 − p^{−s})
/// with D_p(s) = ν₁ + ν_p p^{−s} + ν_{p²} p^{−2s}/(1 − p^{−s}) (the k ≥ 2 column
/// is constant). Other s ≤ 1 are unsupported.
pub fn dirichlet_partial(phi: &DirichletWeight, positive: bool, s: f64, a_max: u64) -> Result<f64> {
    let cols = match phi {
        DirichletWeight::One => [1.0; 3],
        DirichletWeight::Splitting { p, sigma, maximal } => slice_columns(*p, sigma, *maximal)?,
    };
    let value = |_sign: bool| -> Result<f64> {
        if s > 1.0 {
            return Ok((1..=a_max).map(|a| nu(phi, &cols, a) * (a as f64).powf(-s)).sum());
        }
        if s != 0.5 {
            return Err(QuarticError::NonConvergence(format!("D(φ, s) not supported at s = {s}")));
        }
        let z = zeta_real(s)?;
        Ok(match phi {
            DirichletWeight::One => z,
            DirichletWeight::Splitting { p, .. } => {
                let q = (*p as f64).powf(-s);
                let local = cols[0] + cols[1] * q + cols[2] * q * q / (1.0 - q);
                local * z * (1.0 - q)
            }
        })
    };
    // ν_a depends on a only through its valuations, so both signs agree.
    let (plus, minus) = (value(true)?, value(false)?);
    assert_eq!(plus.to_bits(), minus.to_bits(), "D⁺ ≠ D⁻ for a unit-invariant weight");
    Ok(if positive { plus } else { minus })
}

/// ζ(s) for s > 1 (exposed for checks of the Dirichlet partial sums).
pub fn zeta(s: f64) -> Result<f64> {
    zeta_real(s)
}

/// Per-class weighted/unweighted ratio of a splitting-type count against
/// κ_{5/6}(σ) from the splitting densities.
pub fn splitting_ratio(series_one: &CountSeries, series_phi: &CountSeries, x: u64) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for (r1, r2) in series_one.rows.iter().zip(&series_phi.rows) {
        if r1.x != x || r1.class != r2.class {
            continue;
        }
        let w = parse_rational(&r2.weighted)?.to_f64().unwrap_or(f64::NAN);
        out.insert(r1.class.clone(), if r1.raw == 0 { f64::NAN } else { w / r1.raw as f64 });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_fit_recovers_constants() {
        let xs = geometric_grid(1_000, 1_000_000, 10);
        let pts: Vec<(f64, f64)> = xs.iter().map(|&x| {
            let x = x as f64;
            (x, 0.05 * x.powf(5.0 / 6.0) - 0.02 * x.powf(0.75))
        }).collect();
        let r = fit_points(&pts, SignatureClass::Class0, 25.6).unwrap();
        assert!((r.c1_hat - 0.05).abs() < 1e-6 * 0.05 && (r.c2_hat + 0.02).abs() < 1e-6 * 0.02, "{r:?}");
        assert!(fit_points(&pts[..5], SignatureClass::Class0, 25.6).is_err());
    }

    #[test]
    fn dirichlet_one() {
        let d = dirichlet_partial(&DirichletWeight::One, true, 2.0, 10_000).unwrap();
        assert!((d - zeta(2.0).unwrap()).abs() < 2.0 / 10_000.0);
        let h = dirichlet_partial(&DirichletWeight::One, false, 0.5, 0).unwrap();
        assert!((h + 1.4603545088).abs() < 1e-9);
        assert!(dirichlet_partial(&DirichletWeight::One, true, 0.7, 10).is_err());
    }

    #[test]
    fn minimality_and_height() {
        assert!(is_minimal(1, 1));
        assert!(!is_minimal(16, 64));
        assert!(is_minimal(16, 32));
        assert!(!is_minimal(0, 0));
        assert_eq!(curve_height(-1, 0), 4);
        let (triv, tors) = curves_below(200, false);
        assert!(triv.contains(&(1, 1)) && !tors.contains(&(1, 1)));
        // y² = x³ − x has full 2-torsion.
        let (_, tors) = curves_below(200, true);
        assert!(tors.contains(&(-1, 0)));
    }

    #[test]
    fn small_curves_have_selmer_at_least_one() {
        let (s, recs) = selmer_sum(300, false, ReductionParams::default()).unwrap();
        assert!(s.curves > 0 && s.average >= 1.0);
        for r in recs {
            assert!(parse_rational(&r.selmer_sum).unwrap() >= BigRational::one());
        }
    }

    #[test]
    fn weight_parsing() {
        assert_eq!("one".parse::<Weight>().unwrap(), Weight::One);
        let w: Weight = "splitting:5:(1111)".parse().unwrap();
        assert_eq!(w.to_string(), "splitting:5:(1111)");
        assert!("splitting:5".parse::<Weight>().is_err());
    }
}
