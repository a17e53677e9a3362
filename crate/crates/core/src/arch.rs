//! Archimedean quantities: real periods of E^{I,J}: y² = x³ − (I/3)x − J/27,
//! the symmetrised period Ω̃(I,J) = Ω(E^{I,J}) + Ω(E^{I,−J}), the region
//! constants C_{5/6}^±, C_{3/4}^±, and the zeta values entering the
//! counting-function constants.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QuarticError, Result};
use crate::scalar::Real;

/// How a period value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PeriodMethod {
    Agm,
    Quadrature,
}

impl fmt::Display for PeriodMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PeriodMethod::Agm => "agm",
            PeriodMethod::Quadrature => "quadrature",
        })
    }
}

/// A period together with the method that produced it and an absolute error
/// estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodValue<R> {
    pub value: R,
    pub method: PeriodMethod,
    pub error_estimate: f64,
}

/// Real roots of x³ − (I/3)x − J/27, decreasing.
enum RootConfig<R> {
    /// Δ > 0: e1 > e2 > e3.
    Three(R, R, R),
    /// Δ < 0: the real root e1.
    One(R),
}

fn newton_polish<R: Real>(x0: f64, p: &R, q: &R) -> R {
    // P(x) = x³ + p x + q
    let three = R::from_i64(3);
    let mut x = R::from_f64(x0);
    let tol = R::epsilon() * 4.0;
    for _ in 0..200 {
        let fx = x.clone() * x.clone() * x.clone() + p.clone() * x.clone() + q.clone();
        let dfx = three.clone() * x.clone() * x.clone() + p.clone();
        if dfx.is_zero() {
            break;
        }
        let step = fx / dfx;
        x = x - step.clone();
        let scale = x.to_f64().abs().max(1.0);
        if step.to_f64().abs() <= tol * scale {
            break;
        }
    }
    x
}

fn root_config<R: Real>(i: &R, j: &R) -> Result<RootConfig<R>> {
    let four = R::from_i64(4);
    let disc27 = four * i.clone() * i.clone() * i.clone() - j.clone() * j.clone();
    if disc27.is_zero() {
        return Err(QuarticError::DegenerateDiscriminant);
    }
    let p = -(i.clone() / R::from_i64(3));
    let q = -(j.clone() / R::from_i64(27));
    let (fi, fj) = (i.to_f64(), j.to_f64());
    if disc27 > R::zero() {
        // Trigonometric form of t³ − 3I t − J with x = t/3.
        let r = 2.0 * fi.sqrt();
        let cosarg = (fj / (2.0 * fi * fi.sqrt())).clamp(-1.0, 1.0);
        let phi = cosarg.acos();
        let approx: Vec<f64> = (0..3)
            .map(|k| r * ((phi - 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos() / 3.0)
            .collect();
        // Polish the root farthest from the other two, then recover the
        // remaining pair from the depressed quadratic: the close pair is
        // where precision would be lost.
        let iso = (0..3)
            .max_by(|&a, &b| {
                let da = (0..3).filter(|&k| k != a).map(|k| (approx[a] - approx[k]).abs()).fold(f64::MAX, f64::min);
                let db = (0..3).filter(|&k| k != b).map(|k| (approx[b] - approx[k]).abs()).fold(f64::MAX, f64::min);
                da.partial_cmp(&db).unwrap()
            })
            .unwrap();
        let r0 = newton_polish(approx[iso], &p, &q);
        // x² + r0 x + (r0² + p) = 0
        let disc = -(R::from_i64(3) * r0.clone() * r0.clone()) - four_times(&p);
        if disc <= R::zero() {
            return Err(QuarticError::NonConvergence("coalescing real roots".into()));
        }
        let s = disc.sqrt();
        let two = R::from_i64(2);
        let hi = (-r0.clone() + s.clone()) / two.clone();
        let lo = (-r0.clone() - s) / two;
        let mut v = [r0, hi, lo];
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let [e1, e2, e3] = v;
        Ok(RootConfig::Three(e1, e2, e3))
    } else {
        let d = (fj * fj / 4.0 - fi * fi * fi).sqrt();
        let t = (fj / 2.0 + d).cbrt() + (fj / 2.0 - d).cbrt();
        Ok(RootConfig::One(newton_polish(t / 3.0, &p, &q)))
    }
}

fn four_times<R: Real>(x: &R) -> R {
    R::from_i64(4) * x.clone()
}

/// Arithmetic–geometric mean with the final |a − b| as error indicator.
pub fn agm<R: Real>(a: &R, b: &R) -> Result<(R, f64)> {
    let two = R::from_i64(2);
    let (mut a, mut b) = (a.clone(), b.clone());
    for _ in 0..400 {
        let gap = (a.clone() - b.clone()).abs().to_f64();
        if gap <= R::epsilon() * 8.0 * a.to_f64().abs() {
            return Ok((a, gap));
        }
        let an = (a.clone() + b.clone()) / two.clone();
        b = (a * b).sqrt();
        a = an;
    }
    Err(QuarticError::NonConvergence("AGM did not converge".into()))
}

/// Ω(E^{I,J}) by the arithmetic–geometric mean.
///
/// With three real roots e1 > e2 > e3 both real components have the same
/// y>0 integral π/AGM(√(e1−e3), √(e1−e2)); with one real root e1 and
/// complex pair s ± it, the integral is π/AGM(√M, √((M + e1 − s)/2)) where
/// M = |e1 − (s + it)|.
pub fn real_period_agm<R: Real>(i: &R, j: &R) -> Result<PeriodValue<R>> {
    let pi = R::pi();
    let (value, gap) = match root_config(i, j)? {
        RootConfig::Three(e1, e2, e3) => {
            let (m, gap) = agm(&(e1.clone() - e3).sqrt(), &(e1 - e2).sqrt())?;
            (R::from_i64(2) * pi / m, gap)
        }
        RootConfig::One(e1) => {
            let m2 = R::from_i64(3) * e1.clone() * e1.clone() - i.clone() / R::from_i64(3);
            if m2 <= R::zero() {
                return Err(QuarticError::NonConvergence("complex pair collapsed".into()));
            }
            let m = m2.sqrt();
            let s = -(e1.clone() / R::from_i64(2));
            let b2 = (m.clone() + e1 - s) / R::from_i64(2);
            let (g, gap) = agm(&m.sqrt(), &b2.sqrt())?;
            (pi / g, gap)
        }
    };
    let v = value.to_f64();
    let error_estimate = (R::epsilon() * 64.0).max(gap) * v.abs();
    Ok(PeriodValue { value, method: PeriodMethod::Agm, error_estimate })
}

/// Romberg integration of a smooth function on [0, 1], returning the
/// extrapolated value and the last diagonal difference.
fn romberg<R: Real>(f: impl Fn(&R) -> R, rel_tol: f64, max_levels: usize) -> Result<(R, f64)> {
    let half = R::one() / R::from_i64(2);
    let mut rows: Vec<R> = vec![(f(&R::zero()) + f(&R::one())) * half.clone()];
    let mut trap = rows[0].clone();
    for level in 1..=max_levels {
        let n = 1i64 << (level - 1);
        let h = R::one() / R::from_i64(n);
        let mut mid = R::zero();
        for k in 0..n {
            let x = (R::from_i64(k) + half.clone()) * h.clone();
            mid = mid + f(&x);
        }
        trap = (trap + mid * h) * half.clone();
        let mut next = vec![trap.clone()];
        let mut pow4 = R::one();
        for m in 1..=level.min(rows.len()) {
            pow4 = pow4 * R::from_i64(4);
            let prev = next[m - 1].clone();
            let r = prev.clone() + (prev - rows[m - 1].clone()) / (pow4.clone() - R::one());
            next.push(r);
        }
        let best = next.last().unwrap().clone();
        let diff = (best.clone() - rows.last().unwrap().clone()).abs().to_f64();
        rows = next;
        if level >= 4 && diff <= rel_tol * best.to_f64().abs() {
            return Ok((best, diff));
        }
    }
    Err(QuarticError::NonConvergence("quadrature did not reach tolerance".into()))
}

/// Ω(E^{I,J}) by direct quadrature of dx/y over the real locus, with the
/// endpoint singularities removed by substitution: x = e1 + u², u = v/(1−v)
/// on the unbounded branch and x = e3 + (e2−e3)·sin²φ (rationally
/// parametrised) on the oval.
pub fn real_period_quadrature<R: Real>(i: &R, j: &R) -> Result<PeriodValue<R>> {
    let rel_tol = (R::epsilon() * 1e3).max(1e-60);
    let max_levels = if R::DIGITS > 20 { 18 } else { 22 };
    let e1 = match root_config(i, j)? {
        RootConfig::Three(ref e1, ..) | RootConfig::One(ref e1) => e1.clone(),
    };
    let c0 = e1.clone() * e1.clone() - i.clone() / R::from_i64(3);
    let two = R::from_i64(2);
    let unbounded = |v: &R| -> R {
        let w = (R::one() - v.clone()) * (R::one() - v.clone());
        let a = e1.clone() * w.clone() + v.clone() * v.clone();
        let qw = a.clone() * a.clone() + e1.clone() * a * w.clone() + c0.clone() * w.clone() * w;
        two.clone() / qw.sqrt()
    };
    let (mut value, mut err) = romberg(unbounded, rel_tol, max_levels)?;
    if let RootConfig::Three(e1, e2, e3) = root_config(i, j)? {
        let four = R::from_i64(4);
        let oval = |t: &R| -> R {
            let d = R::one() + t.clone() * t.clone();
            let s = two.clone() * t.clone() / d.clone();
            let x = e3.clone() + (e2.clone() - e3.clone()) * s.clone() * s;
            four.clone() / (d * (e1.clone() - x).sqrt())
        };
        let (v2, err2) = romberg(oval, rel_tol, max_levels)?;
        value = value + v2;
        err += err2;
    }
    Ok(PeriodValue { value, method: PeriodMethod::Quadrature, error_estimate: err })
}

fn cross_check<R: Real>(a: PeriodValue<R>, q: PeriodValue<R>) -> Result<PeriodValue<R>> {
    let diff = (a.value.clone() - q.value.clone()).abs().to_f64();
    let tol = a.error_estimate.max(q.error_estimate).max(R::epsilon() * 256.0 * a.value.to_f64().abs());
    if diff > tol {
        return Err(QuarticError::NonConvergence(format!(
            "AGM {:e} and quadrature {:e} differ by {diff:e} (tolerance {tol:e})",
            a.value.to_f64(),
            q.value.to_f64()
        )));
    }
    Ok(PeriodValue { error_estimate: tol.max(diff), ..a })
}

/// Ω(E^{I,J}): the AGM value, certified against the quadrature oracle.
pub fn real_period<R: Real>(i: &R, j: &R) -> Result<PeriodValue<R>> {
    let a = real_period_agm(i, j)?;
    let q = real_period_quadrature(i, j)?;
    cross_check(a, q)
}

/// Ω̃(I,J) = Ω(E^{I,J}) + Ω(E^{I,−J}), each summand certified.
pub fn omega_tilde<R: Real>(i: &R, j: &R) -> Result<PeriodValue<R>> {
    let p = real_period(i, j)?;
    let m = real_period(i, &-j.clone())?;
    Ok(PeriodValue {
        value: p.value + m.value,
        method: PeriodMethod::Agm,
        error_estimate: p.error_estimate + m.error_estimate,
    })
}

/// Ω̃(I,J) in double precision by AGM only (the integrand of C_{3/4}).
pub fn omega_tilde_f64(i: f64, j: f64) -> Result<f64> {
    Ok(real_period_agm(&i, &j)?.value + real_period_agm(&i, &-j)?.value)
}

/// ζ(s) for real s ≠ 1 with s > 0, generic over the working precision, via
/// Borwein's acceleration of the alternating series η(s) = (1 − 2^{1−s})ζ(s).
/// Only s ∈ {1/2, 2} (square roots and integer powers) are supported so that
/// no transcendental functions beyond √ are needed.
pub fn zeta_half_or_two<R: Real>(s_is_half: bool) -> R {
    if !s_is_half {
        let pi = R::pi();
        return pi.clone() * pi / R::from_i64(6);
    }
    let n = (R::DIGITS as usize * 13) / 10 + 10;
    // d_k = n Σ_{i=0}^{k} (n+i−1)! 4^i / ((n−i)! (2i)!)
    let mut d = Vec::with_capacity(n + 1);
    let mut term = R::one() / R::from_i64(n as i64); // i = 0 term divided by n
    let mut acc = term.clone();
    d.push(acc.clone());
    for i in 1..=n {
        // term_i / term_{i−1} = (n+i−1)·4·(n−i+1) / ((2i)(2i−1)) ... with the
        // leading factor n handled below.
        let num = R::from_i64(((n + i - 1) * 4 * (n - i + 1)) as i64);
        let den = R::from_i64((2 * i * (2 * i - 1)) as i64);
        term = term * num / den;
        acc = acc + term.clone();
        d.push(acc.clone());
    }
    let nn = R::from_i64(n as i64);
    let d: Vec<R> = d.into_iter().map(|x| x * nn.clone()).collect();
    let dn = d[n].clone();
    let mut eta = R::zero();
    for k in 0..n {
        let t = (d[k].clone() - dn.clone()) / R::from_i64(k as i64 + 1).sqrt();
        eta = if k % 2 == 0 { eta + t } else { eta - t };
    }
    eta = -eta / dn;
    let factor = R::one() - R::from_i64(2).sqrt();
    eta / factor
}

/// ζ(1/2).
pub fn zeta_half<R: Real>() -> R {
    zeta_half_or_two(true)
}

/// ζ(2) = π²/6.
pub fn zeta_two<R: Real>() -> R {
    zeta_half_or_two(false)
}

/// The four region constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConstantName {
    #[serde(rename = "C56_pos")]
    C56Pos,
    #[serde(rename = "C56_neg")]
    C56Neg,
    #[serde(rename = "C34_pos")]
    C34Pos,
    #[serde(rename = "C34_neg")]
    C34Neg,
}

impl ConstantName {
    pub const ALL: [ConstantName; 4] = [ConstantName::C56Pos, ConstantName::C56Neg, ConstantName::C34Pos, ConstantName::C34Neg];

    pub fn label(self) -> &'static str {
        match self {
            ConstantName::C56Pos => "C56_pos",
            ConstantName::C56Neg => "C56_neg",
            ConstantName::C34Pos => "C34_pos",
            ConstantName::C34Neg => "C34_neg",
        }
    }

    pub fn disc_positive(self) -> bool {
        matches!(self, ConstantName::C56Pos | ConstantName::C34Pos)
    }
}

impl fmt::Display for ConstantName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ConstantName {
    type Err = QuarticError;
    fn from_str(s: &str) -> Result<Self> {
        ConstantName::ALL
            .into_iter()
            .find(|c| c.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| QuarticError::Parse(format!("unknown constant {s:?}")))
    }
}

/// Settings for the region-constant computations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConstantConfig {
    /// Total Monte Carlo samples for the C_{3/4} cross-check (one per stratum).
    pub mc_samples: u64,
    pub seed: u64,
}

impl Default for ConstantConfig {
    fn default() -> Self {
        ConstantConfig { mc_samples: 10_000_000, seed: 0x5eed }
    }
}

/// A region constant computed two independent ways.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionConstant {
    pub name: ConstantName,
    pub value: f64,
    pub error_estimate: f64,
    pub method_a: String,
    pub value_a: f64,
    pub method_b: String,
    pub value_b: f64,
    /// |value_a − value_b| / |value_a|.
    pub agreement: f64,
}

/// Exact area of {|I| < 1, |J| < 2, sign Δ fixed}: the Δ>0 part is
/// {0 < I < 1, J² < 4I³} of area ∫₀¹ 4I^{3/2} dI = 8/5.
pub fn c56_exact(positive: bool) -> BigRational {
    let pos = BigRational::new(8.into(), 5.into());
    if positive {
        pos
    } else {
        BigRational::from_integer(8.into()) - pos
    }
}

/// Double-exponential (tanh-sinh) quadrature on [a, b]; tolerates integrable
/// endpoint singularities. Returns (value, error estimate).
pub fn tanh_sinh(f: impl Fn(f64) -> f64 + Sync, a: f64, b: f64, rel_tol: f64) -> Result<(f64, f64)> {
    use std::f64::consts::FRAC_PI_2;
    let half = (b - a) / 2.0;
    // Nodes where the distance to an endpoint drops below this are skipped;
    // the omitted mass is O(δ log δ) for the singularities we integrate.
    let min_gap = 1e-15 * half.abs();
    let node = |t: f64| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let ch = u.cosh();
        let w = FRAC_PI_2 * t.cosh() / (ch * ch);
        // distance of the node from either endpoint, 1 − tanh u = 2/(e^{2u}+1),
        // computed without cancellation
        let gap = half * 2.0 / ((2.0 * u).exp() + 1.0);
        if gap <= min_gap {
            return 0.0;
        }
        if t == 0.0 {
            w * f(a + half)
        } else {
            w * (f(b - gap) + f(a + gap))
        }
    };
    let tmax = 4.0;
    let mut h = 0.5;
    let mut sum: f64 = (0..=((tmax / h) as usize)).into_par_iter().map(|k| node(k as f64 * h)).collect::<Vec<_>>().iter().sum();
    let mut est = sum * h * half;
    for _ in 0..10 {
        h /= 2.0;
        let n = (tmax / h) as usize;
        let add: f64 = (0..=n)
            .into_par_iter()
            .filter(|k| k % 2 == 1)
            .map(|k| node(k as f64 * h))
            .collect::<Vec<_>>()
            .iter()
            .sum();
        sum += add;
        let next = sum * h * half;
        let diff = (next - est).abs();
        est = next;
        if diff <= rel_tol * est.abs() {
            return Ok((est, diff.max(f64::EPSILON * est.abs() * 16.0)));
        }
    }
    Err(QuarticError::NonConvergence("tanh-sinh did not reach tolerance".into()))
}

/// Ω̃ with Δ = 0 points (measure zero) mapped to 0.
fn omega_tilde_or_zero(i: f64, j: f64) -> f64 {
    omega_tilde_f64(i, j).unwrap_or(0.0)
}

/// C_{3/4}^± by the weighted-homogeneity reduction. Under (I,J) ↦ (λ²I, λ³J)
/// the period scales by λ^{−1/2} and dI dJ by λ⁴, so the integral over
/// {H < 1} collapses to (2/9)∮ Ω̃ |2I dJ − 3J dI| along the boundary of the
/// box |I| ≤ 1, |J| ≤ 2. The Δ>0 part of the boundary is the edge I = 1; the
/// Δ<0 part is I = −1 and the edges J = ±2.
fn c34_contour(positive: bool) -> Result<(f64, f64)> {
    let tol = 1e-12;
    if positive {
        let (v, e) = tanh_sinh(|j| omega_tilde_or_zero(1.0, j), -2.0, 2.0, tol)?;
        Ok((4.0 / 9.0 * v, 4.0 / 9.0 * e))
    } else {
        let (side, es) = tanh_sinh(|j| omega_tilde_or_zero(-1.0, j), -2.0, 2.0, tol)?;
        let (top, et) = tanh_sinh(|i| omega_tilde_or_zero(i, 2.0), -1.0, 1.0, tol)?;
        let v = 2.0 / 9.0 * (2.0 * side + 2.0 * 6.0 * top);
        Ok((v, 2.0 / 9.0 * (2.0 * es + 12.0 * et)))
    }
}

/// (1/5)∮|2I dJ − 3J dI| for the Δ-sign part of the box boundary: the same
/// reduction applied to the constant function (λ⁴ integrates to 1/5).
fn c56_contour(positive: bool) -> Result<f64> {
    let tol = 1e-13;
    // The indicator of the sign is constant on each edge except J = ±2 near
    // I = 1, where Δ = 4I³ − 4 < 0 throughout; so edge lengths suffice, but
    // integrate numerically to keep the check independent of that reasoning.
    let sgn = |i: f64, j: f64| -> f64 {
        let d = 4.0 * i * i * i - j * j;
        if (d > 0.0) == positive && d != 0.0 {
            1.0
        } else {
            0.0
        }
    };
    let (right, _) = tanh_sinh(|j| 2.0 * sgn(1.0, j), -2.0, 2.0, tol)?;
    let (left, _) = tanh_sinh(|j| 2.0 * sgn(-1.0, j), -2.0, 2.0, tol)?;
    let (top, _) = tanh_sinh(|i| 6.0 * sgn(i, 2.0), -1.0, 1.0, tol)?;
    let (bottom, _) = tanh_sinh(|i| 6.0 * sgn(i, -2.0), -1.0, 1.0, tol)?;
    Ok((right + left + top + bottom) / 5.0)
}

/// Stratified Monte Carlo of ∫∫ Ω̃ over {|I|<1, |J|<2, sign Δ fixed}: one
/// uniform sample per cell of an n×n grid, deterministic per-row streams,
/// fixed-order reduction. Returns (value, standard-error estimate).
pub fn c34_monte_carlo(positive: bool, cfg: ConstantConfig) -> (f64, f64) {
    let n = ((cfg.mc_samples as f64).sqrt().ceil() as u64).max(2);
    let (wi, wj) = (2.0 / n as f64, 4.0 / n as f64);
    let rows: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(r + if positive { 0 } else { 1 << 40 });
            let (mut s, mut s2) = (0.0, 0.0);
            for c in 0..n {
                let i = -1.0 + (r as f64 + rng.gen::<f64>()) * wi;
                let j = -2.0 + (c as f64 + rng.gen::<f64>()) * wj;
                let d = 4.0 * i * i * i - j * j;
                let v = if d != 0.0 && (d > 0.0) == positive { omega_tilde_or_zero(i, j) } else { 0.0 };
                s += v;
                s2 += v * v;
            }
            (s, s2)
        })
        .collect();
    let cell = wi * wj;
    let total: f64 = rows.iter().map(|r| r.0).sum::<f64>() * cell;
    // Conservative error: the unstratified standard error over all cells.
    let m = (n * n) as f64;
    let mean = rows.iter().map(|r| r.0).sum::<f64>() / m;
    let var = (rows.iter().map(|r| r.1).sum::<f64>() / m - mean * mean).max(0.0);
    (total, 8.0 * (var / m).sqrt())
}

/// A region constant by two independent methods.
pub fn region_constant(name: ConstantName, cfg: ConstantConfig) -> Result<RegionConstant> {
    let positive = name.disc_positive();
    let (method_a, value_a, err_a, method_b, value_b) = match name {
        ConstantName::C56Pos | ConstantName::C56Neg => {
            let exact = c56_exact(positive);
            let va = exact_to_f64(&exact);
            let vb = c56_contour(positive)?;
            ("exact-area".to_string(), va, 0.0, "contour-quadrature".to_string(), vb)
        }
        ConstantName::C34Pos | ConstantName::C34Neg => {
            let (va, ea) = c34_contour(positive)?;
            let (vb, _) = c34_monte_carlo(positive, cfg);
            ("contour-quadrature".to_string(), va, ea, "stratified-monte-carlo".to_string(), vb)
        }
    };
    let diff = (value_a - value_b).abs();
    Ok(RegionConstant {
        name,
        value: value_a,
        error_estimate: err_a.max(f64::EPSILON * value_a.abs()),
        method_a,
        value_a,
        method_b,
        value_b,
        agreement: diff / value_a.abs(),
    })
}

fn exact_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Leading constant 2ζ(2)C_{5/6}/(27σ) of the orbit count in a class.
pub fn primary_constant(disc_positive: bool, sigma: u32) -> f64 {
    let c = exact_to_f64(&c56_exact(disc_positive));
    2.0 * zeta_two::<f64>() * c / (27.0 * sigma as f64)
}

/// Secondary constant ζ(1/2)C_{3/4}/(108σ) given the value of C_{3/4}.
pub fn secondary_constant(c34: f64, sigma: u32) -> f64 {
    zeta_half::<f64>() * c34 / (108.0 * sigma as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::HpFloat;
    use num_traits::Zero;

    #[test]
    fn lemniscatic_periods() {
        let p = real_period(&3.0f64, &0.0).unwrap();
        assert!((p.value - 5.244115108584239).abs() < 1e-12, "{p:?}");
        let m = real_period(&-3.0f64, &0.0).unwrap();
        assert!((m.value - 3.708149354602744).abs() < 1e-12, "{m:?}");
        let t = omega_tilde(&3.0f64, &0.0).unwrap();
        assert!((t.value - 2.0 * p.value).abs() < 1e-12);
    }

    #[test]
    fn agm_matches_quadrature_on_grid() {
        for a in -5..=5 {
            for b in -5..=5 {
                let (i, j) = (a as f64 * 0.37 + 0.05, b as f64 * 0.41 + 0.02);
                let d = 4.0 * i * i * i - j * j;
                if d.abs() < 0.05 {
                    continue;
                }
                let x = real_period_agm(&i, &j).unwrap().value;
                let y = real_period_quadrature(&i, &j).unwrap().value;
                assert!((x - y).abs() <= 1e-11 * x, "({i},{j}) {x} {y}");
            }
        }
    }

    #[test]
    fn high_precision_period() {
        let i = HpFloat::from_i64(3);
        let p = real_period(&i, &HpFloat::zero()).unwrap();
        let s = p.value.to_string();
        assert!(s.starts_with("5.24411510858423962092967917978223882736550990286324"), "{s}");
        assert!(p.error_estimate < 1e-50);
    }

    #[test]
    fn degenerate_is_rejected() {
        assert_eq!(real_period(&1.0f64, &2.0).unwrap_err(), QuarticError::DegenerateDiscriminant);
    }

    #[test]
    fn zeta_values() {
        assert!((zeta_half::<f64>() + 1.4603545088095868).abs() < 1e-13);
        let z: HpFloat = zeta_half();
        assert!(z.to_string().starts_with("-1.46035450880958681288949915251529801246722933101258"), "{z}");
        assert!((zeta_two::<f64>() - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-15);
    }

    #[test]
    fn area_constants() {
        let p = region_constant(ConstantName::C56Pos, ConstantConfig::default()).unwrap();
        let n = region_constant(ConstantName::C56Neg, ConstantConfig::default()).unwrap();
        assert!((p.value - 1.6).abs() < 1e-12 && (n.value - 6.4).abs() < 1e-12);
        assert!((p.value_b - 1.6).abs() < 1e-6 && (n.value_b - 6.4).abs() < 1e-6, "{p:?} {n:?}");
    }
}
