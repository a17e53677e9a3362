//! Quadratic Gauss sums, orbital exponential sums over PGL₂(ℤ/p^kℤ) and
//! pointwise Fourier transforms of functions on V(ℤ/nℤ).

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{inv_mod, is_prime_u64};
use crate::error::{QuarticError, Result};
use crate::forms::discriminant_expanded;

/// Default cap on |PGL₂(ℤ/p^k)|·p^k for direct orbital summation.
pub const DEFAULT_GROUP_BUDGET: u128 = 1_000_000_000;
/// Default cap on n⁵ for Fourier transforms on V(ℤ/nℤ).
pub const DEFAULT_FOURIER_BUDGET: u128 = 49u128.pow(5);
/// |𝒬_{p^k}(a)|·p^{e(a)} never exceeds this, where e(a) is the regime exponent.
pub const GAUSS_REGIME_CONSTANT: f64 = 2.5;

/// Compensated (Neumaier) summation of complex numbers.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ComplexAccumulator {
    re: (f64, f64),
    im: (f64, f64),
    terms: u64,
}

fn neumaier(acc: &mut (f64, f64), x: f64) {
    let (s, c) = *acc;
    let t = s + x;
    let c = if s.abs() >= x.abs() { c + ((s - t) + x) } else { c + ((x - t) + s) };
    *acc = (t, c);
}

impl ComplexAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, z: Complex64) {
        neumaier(&mut self.re, z.re);
        neumaier(&mut self.im, z.im);
        self.terms += 1;
    }

    /// Merge another accumulator (callers merge in a fixed order).
    pub fn merge(&mut self, other: &ComplexAccumulator) {
        neumaier(&mut self.re, other.re.0);
        neumaier(&mut self.re, other.re.1);
        neumaier(&mut self.im, other.im.0);
        neumaier(&mut self.im, other.im.1);
        self.terms += other.terms;
    }

    pub fn terms(&self) -> u64 {
        self.terms
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.0 + self.re.1, self.im.0 + self.im.1)
    }
}

/// e(m/n) = exp(2πi·m/n) for a residue m.
pub fn unit_root(m: u64, n: u64) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::TAU * ((m % n) as f64) / n as f64)
}

/// Σ_m counts[m]·e(m/n), compensated.
fn histogram_sum(counts: &[u64], weights: &[Complex64]) -> Complex64 {
    let mut acc = ComplexAccumulator::new();
    for (c, w) in counts.iter().zip(weights) {
        if *c > 0 {
            acc.add(w * *c as f64);
        }
    }
    acc.value()
}

fn prime_power(p: u64, k: u32) -> Result<u64> {
    if !is_prime_u64(p) || k == 0 {
        return Err(QuarticError::UnsupportedPrime(p));
    }
    p.checked_pow(k).ok_or(QuarticError::Overflow)
}

/// 𝒬_{p^k}(a) = (1/|GL₁|)·Σ_{t unit} e(t²a/p^k), by direct summation.
pub fn gauss_sum(a: u64, p: u64, k: u32) -> Result<Complex64> {
    let n = prime_power(p, k)?;
    let a = a % n;
    let mut acc = ComplexAccumulator::new();
    for t in (1..n).filter(|t| t % p != 0) {
        acc.add(unit_root(((t as u128 * t as u128 % n as u128) * a as u128 % n as u128) as u64, n));
    }
    let units = (n - n / p) as f64;
    Ok(acc.value() / units)
}

/// Which size bound applies to 𝒬_{p^k}(a) and 𝒢_{p^k}(f,h).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// a = 0 (h = 0): bound 1.
    Zero,
    /// p^{k−1} | a, a ≠ 0 (h ∈ p^{k−1}V*, h ≠ 0): bound p^{−1/2}.
    Deep,
    /// Otherwise: bound p^{−1}.
    Generic,
}

impl Regime {
    pub fn exponent(self) -> f64 {
        match self {
            Regime::Zero => 0.0,
            Regime::Deep => 0.5,
            Regime::Generic => 1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Regime::Zero => "h=0",
            Regime::Deep => "h in p^{k-1}V*",
            Regime::Generic => "generic",
        }
    }

    pub fn of_residue(a: u64, p: u64, k: u32) -> Regime {
        let n = p.pow(k);
        let a = a % n;
        if a == 0 {
            Regime::Zero
        } else if a % p.pow(k - 1) == 0 {
            Regime::Deep
        } else {
            Regime::Generic
        }
    }

    pub fn of_dual(h: &[u64; 5], p: u64, k: u32) -> Regime {
        let n = p.pow(k);
        if h.iter().all(|x| x % n == 0) {
            Regime::Zero
        } else if h.iter().all(|x| x % p.pow(k - 1) == 0) {
            Regime::Deep
        } else {
            Regime::Generic
        }
    }
}

/// The bilinear pairing V × V* → ℤ/nℤ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pairing {
    /// Σ fᵢhᵢ.
    Plain,
    /// f₀h₀ + 4⁻¹f₁h₁ + 6⁻¹f₂h₂ + 4⁻¹f₃h₃ + f₄h₄ (needs p ≥ 5); satisfies [gf,h] = [f,gᵀh].
    Invariant,
}

impl Pairing {
    /// Per-coordinate weights mod n.
    pub fn weights(self, p: u64, n: u64) -> Result<[u64; 5]> {
        match self {
            Pairing::Plain => Ok([1; 5]),
            Pairing::Invariant => {
                if p < 5 {
                    return Err(QuarticError::UnsupportedPrime(p));
                }
                let i4 = inv_mod(4, n).unwrap();
                let i6 = inv_mod(6, n).unwrap();
                Ok([1, i4, i6, i4, 1])
            }
        }
    }
}

fn pair(f: &[u64; 5], h: &[u64; 5], w: &[u64; 5], n: u64) -> u64 {
    let mut s: u128 = 0;
    for i in 0..5 {
        s += f[i] as u128 * h[i] as u128 % n as u128 * w[i] as u128;
    }
    (s % n as u128) as u64
}

/// PGL₂(ℤ/p^kℤ), one matrix [[α, β], [γ, δ]] per class: either α = 1, or
/// p | α and β = 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModularGroupTable {
    pub p: u64,
    pub k: u32,
    pub n: u64,
}

impl ModularGroupTable {
    pub fn new(p: u64, k: u32) -> Result<Self> {
        Ok(ModularGroupTable { p, k, n: prime_power(p, k)? })
    }

    /// p^{3(k−1)}·p(p² − 1).
    pub fn cardinality(&self) -> u128 {
        let p = self.p as u128;
        p.pow(3 * (self.k - 1)) * p * (p * p - 1)
    }

    /// Elements whose normalized first row is the `row`-th of the n + n/p
    /// possibilities ((1, β) then (α, 1) with p | α).
    fn row_elements(&self, row: u64) -> impl Iterator<Item = [u64; 4]> + '_ {
        let (n, p) = (self.n, self.p);
        let (alpha, beta) = if row < n { (1, row) } else { ((row - n) * p, 1) };
        (0..n).flat_map(move |gamma| {
            (0..n).filter_map(move |delta| {
                let det = (alpha as u128 * delta as u128 + n as u128 * n as u128 - beta as u128 * gamma as u128 % n as u128)
                    % n as u128;
                (det as u64 % p != 0).then_some([alpha, beta, gamma, delta])
            })
        })
    }

    pub fn rows(&self) -> u64 {
        self.n + self.n / self.p
    }

    pub fn iter(&self) -> impl Iterator<Item = [u64; 4]> + '_ {
        (0..self.rows()).flat_map(move |r| self.row_elements(r))
    }

    /// Twisted action g·f = f((x,y)·JgJ)/det² on V(ℤ/nℤ).
    pub fn act(&self, g: &[u64; 4], f: &[u64; 5]) -> [u64; 5] {
        let [al, be, ga, de] = *g;
        let det = (al * de % self.n + self.n - be * ga % self.n) % self.n;
        let inv = inv_mod(det, self.n).expect("unit determinant");
        act_scaled(g, f, inv * inv % self.n, self.n)
    }

    /// (det g)^{−2} mod n, indexed by det g.
    fn inverse_squares(&self) -> Vec<u64> {
        (0..self.n).map(|d| inv_mod(d, self.n).map_or(0, |i| i * i % self.n)).collect()
    }
}

/// f((x,y)·JgJ)·scale mod n: x ↦ δx + βy, y ↦ γx + αy.
fn act_scaled(g: &[u64; 4], f: &[u64; 5], scale: u64, n: u64) -> [u64; 5] {
    let [al, be, ga, de] = g.map(|x| x % n);
    let powers = |u: u64, v: u64| {
        let mut pw = [[0u64; 5]; 5];
        pw[0][0] = 1;
        for k in 1..5 {
            for i in 0..k {
                let c = pw[k - 1][i];
                pw[k][i] = (pw[k][i] + c * u) % n;
                pw[k][i + 1] = (pw[k][i + 1] + c * v) % n;
            }
        }
        pw
    };
    let xp = powers(de, be);
    let yp = powers(ga, al);
    let mut out = [0u64; 5];
    for (k, &coef) in f.iter().enumerate() {
        if coef % n == 0 {
            continue;
        }
        for i in 0..=4 - k {
            let cx = coef % n * xp[4 - k][i] % n;
            if cx == 0 {
                continue;
            }
            for j in 0..=k {
                out[i + j] = (out[i + j] + cx * yp[k][j]) % n;
            }
        }
    }
    out.map(|c| c * scale % n)
}

/// Histogram of [g·f, h] over g ∈ PGL₂(ℤ/p^k).
///
/// If p^j divides h the pairing only sees g·f mod p^{k−j}, so the histogram
/// is that of PGL₂(ℤ/p^{k−j}) scaled by the kernel size p^{3j}.
pub fn pairing_histogram(f: &[u64; 5], h: &[u64; 5], p: u64, k: u32, pairing: Pairing) -> Result<Vec<u64>> {
    let full = ModularGroupTable::new(p, k)?;
    let n = full.n;
    let w = pairing.weights(p, n)?;
    let c: [u64; 5] = std::array::from_fn(|i| (h[i] % n) as u128 * w[i] as u128 % n as u128).map(|x| x as u64);
    let mut j = 0;
    while j < k && c.iter().all(|&x| x % p.pow(j + 1) == 0) {
        j += 1;
    }
    let mut total = vec![0u64; n as usize];
    if j == k {
        total[0] = full.cardinality() as u64;
        return Ok(total);
    }
    let table = ModularGroupTable::new(p, k - j)?;
    let m = table.n;
    let f = f.map(|x| x % m);
    let inv2 = table.inverse_squares();
    let parts: Vec<Vec<u64>> = (0..table.rows())
        .into_par_iter()
        .map(|r| {
            let mut counts = vec![0u64; n as usize];
            for g in table.row_elements(r) {
                let [al, be, ga, de] = g;
                let det = (al * de % m + m - be * ga % m) % m;
                let gf = act_scaled(&g, &f, inv2[det as usize], m);
                let v = (0..5).fold(0u64, |s, i| (s + gf[i] * c[i] % n) % n);
                counts[v as usize] += 1;
            }
            counts
        })
        .collect();
    let lift = p.pow(3 * j);
    for part in parts {
        for (t, c) in total.iter_mut().zip(part) {
            *t += c * lift;
        }
    }
    Ok(total)
}

/// 𝒢_{p^k}(f,h) = (1/|PGL₂|)·Σ_g 𝒬_{p^k}([gf, h]).
pub fn orbital_sum(f: &[u64; 5], h: &[u64; 5], p: u64, k: u32, pairing: Pairing) -> Result<Complex64> {
    orbital_sum_with_budget(f, h, p, k, pairing, DEFAULT_GROUP_BUDGET)
}

pub fn orbital_sum_with_budget(
    f: &[u64; 5],
    h: &[u64; 5],
    p: u64,
    k: u32,
    pairing: Pairing,
    budget: u128,
) -> Result<Complex64> {
    let table = ModularGroupTable::new(p, k)?;
    let size = table.cardinality() * table.n as u128;
    if size > budget {
        return Err(QuarticError::InfeasibleSize { size, budget });
    }
    let counts = pairing_histogram(f, h, p, k, pairing)?;
    let q: Vec<Complex64> = (0..table.n).map(|a| gauss_sum(a, p, k)).collect::<Result<_>>()?;
    Ok(histogram_sum(&counts, &q) / table.cardinality() as f64)
}

/// A function on V(ℤ/nℤ) given by its support.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseFunction {
    pub n: u64,
    pub support: Vec<([u64; 5], f64)>,
}

/// Decode the index of a form in V(ℤ/nℤ) (base-n digits, a first).
pub fn decode_form(idx: u64, n: u64) -> [u64; 5] {
    let mut out = [0u64; 5];
    let mut r = idx;
    for slot in out.iter_mut().rev() {
        *slot = r % n;
        r /= n;
    }
    out
}

fn check_fourier_budget(n: u64, budget: u128) -> Result<()> {
    let size = (n as u128).pow(5);
    if size > budget {
        return Err(QuarticError::InfeasibleSize { size, budget });
    }
    Ok(())
}

impl SparseFunction {
    /// Tabulate φ over V(ℤ/nℤ), keeping nonzero values.
    pub fn tabulate(n: u64, phi: impl Fn(&[u64; 5]) -> f64 + Sync) -> Result<Self> {
        check_fourier_budget(n, DEFAULT_FOURIER_BUDGET)?;
        let support = (0..n.pow(5))
            .into_par_iter()
            .filter_map(|idx| {
                let f = decode_form(idx, n);
                let v = phi(&f);
                (v != 0.0).then_some((f, v))
            })
            .collect();
        Ok(SparseFunction { n, support })
    }

    /// Σ_f |φ(f)|².
    pub fn norm_squared(&self) -> f64 {
        self.support.iter().map(|(_, v)| v * v).sum()
    }
}

/// χ_{p²}: the characteristic function of Δ(f) ≡ 0 (mod p²) on V(ℤ/p²ℤ).
pub fn chi_disc_p2(p: u64) -> Result<SparseFunction> {
    let n = prime_power(p, 2)?;
    SparseFunction::tabulate(n, |f| {
        let d = discriminant_expanded(&f.map(|x| x as i128));
        if d.rem_euclid(n as i128) == 0 {
            1.0
        } else {
            0.0
        }
    })
}

/// φ̂(h) = (1/n⁵)·Σ_f φ(f)·e([f,h]/n), with the plain pairing.
pub fn fourier_point(phi: &SparseFunction, h: &[u64; 5]) -> Result<Complex64> {
    check_fourier_budget(phi.n, DEFAULT_FOURIER_BUDGET)?;
    let n = phi.n;
    let w = [1u64; 5];
    let h = h.map(|x| x % n);
    let mut weighted = vec![0.0f64; n as usize];
    for (f, v) in &phi.support {
        weighted[pair(f, &h, &w, n) as usize] += v;
    }
    let mut acc = ComplexAccumulator::new();
    for (m, v) in weighted.iter().enumerate() {
        if *v != 0.0 {
            acc.add(unit_root(m as u64, n) * *v);
        }
    }
    Ok(acc.value() / (n as f64).powi(5))
}

/// Uniform random element of V(ℤ/nℤ) in the given dual regime (k = 2 sense
/// for n = p²): Zero, Deep (= p·h′, h′ ≢ 0), or Generic (∉ pV).
pub fn random_in_regime<R: Rng>(rng: &mut R, p: u64, k: u32, regime: Regime) -> [u64; 5] {
    let n = p.pow(k);
    loop {
        let h: [u64; 5] = match regime {
            Regime::Zero => return [0; 5],
            Regime::Deep => std::array::from_fn(|_| rng.gen_range(0..p) * p.pow(k - 1)),
            Regime::Generic => std::array::from_fn(|_| rng.gen_range(0..n)),
        };
        if Regime::of_dual(&h, p, k) == regime {
            return h;
        }
    }
}

/// The 5×5 matrix L_g of f ↦ g·f on V(ℤ/nℤ) (columns are images of basis forms).
pub fn action_matrix(table: &ModularGroupTable, g: &[u64; 4]) -> [[u64; 5]; 5] {
    let mut m = [[0u64; 5]; 5];
    for col in 0..5 {
        let mut e = [0u64; 5];
        e[col] = 1;
        let img = table.act(g, &e);
        for row in 0..5 {
            m[row][col] = img[row];
        }
    }
    m
}

/// L_gᵀ·h, the dual action for the plain pairing: [g·f, h] = [f, L_gᵀh].
pub fn dual_action(table: &ModularGroupTable, g: &[u64; 4], h: &[u64; 5]) -> [u64; 5] {
    let m = action_matrix(table, g);
    let n = table.n as u128;
    std::array::from_fn(|col| ((0..5).map(|row| m[row][col] as u128 * h[row] as u128).sum::<u128>() % n) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_examples() {
        assert!((gauss_sum(0, 5, 2).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let q = gauss_sum(1, 5, 1).unwrap();
        assert!((q.re - (5f64.sqrt() - 1.0) / 4.0).abs() < 1e-12 && q.im.abs() < 1e-12);
        for a in 1..25 {
            if a % 5 != 0 {
                assert!(gauss_sum(a, 5, 2).unwrap().norm() <= 0.2 + 1e-12);
            }
        }
    }

    #[test]
    fn group_table_cardinality() {
        for (p, k) in [(2u64, 1u32), (3, 1), (3, 2), (5, 1), (2, 2)] {
            let t = ModularGroupTable::new(p, k).unwrap();
            let elems: Vec<_> = t.iter().collect();
            assert_eq!(elems.len() as u128, t.cardinality());
            let mut dedup = elems.clone();
            dedup.sort();
            dedup.dedup();
            assert_eq!(dedup.len(), elems.len());
        }
        assert_eq!(ModularGroupTable::new(13, 2).unwrap().cardinality(), 13u128.pow(4) * 168);
    }

    /// Histogram straight from the definition, over the whole group.
    fn naive_histogram(f: &[u64; 5], h: &[u64; 5], p: u64, k: u32) -> Vec<u64> {
        let table = ModularGroupTable::new(p, k).unwrap();
        let n = table.n as i128;
        let w = Pairing::Invariant.weights(p, table.n).unwrap();
        let mut counts = vec![0u64; table.n as usize];
        for g in table.iter() {
            let [al, be, ga, de] = g.map(|x| x as i128);
            let sub = crate::forms::substitute(&f.map(|x| x as i128), &[[de, ga], [be, al]]);
            let det = (al * de - be * ga).rem_euclid(n) as u64;
            let inv = inv_mod(det, table.n).unwrap() as i128;
            let gf = sub.map(|c| (c.rem_euclid(n) * inv * inv % n) as u64);
            counts[pair(&gf, h, &w, table.n) as usize] += 1;
        }
        counts
    }

    #[test]
    fn histogram_matches_definition() {
        let f = [3, 1, 4, 1, 5];
        for h in [[0; 5], [5, 0, 10, 0, 20], [0, 0, 0, 0, 15], [1, 7, 2, 9, 24], [2, 5, 0, 0, 3]] {
            assert_eq!(pairing_histogram(&f, &h, 5, 2, Pairing::Invariant).unwrap(), naive_histogram(&f, &h, 5, 2));
        }
        let h = [7, 0, 14, 0, 0];
        assert_eq!(pairing_histogram(&f, &h, 7, 2, Pairing::Invariant).unwrap(), naive_histogram(&f, &h, 7, 2));
    }

    #[test]
    fn orbital_sum_trivial_dual() {
        let g = orbital_sum(&[1, 2, 3, 4, 5], &[0; 5], 5, 2, Pairing::Invariant).unwrap();
        assert!((g - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(orbital_sum(&[1, 0, 0, 0, 1], &[1, 0, 0, 0, 0], 3, 2, Pairing::Invariant).is_err());
        assert!(matches!(
            orbital_sum_with_budget(&[1, 0, 0, 0, 1], &[1; 5], 13, 2, Pairing::Plain, 1000),
            Err(QuarticError::InfeasibleSize { .. })
        ));
    }

    #[test]
    fn fourier_normalization_and_parseval() {
        let one = SparseFunction::tabulate(3, |_| 1.0).unwrap();
        assert!((fourier_point(&one, &[0; 5]).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let chi = SparseFunction::tabulate(3, |f| if discriminant_expanded(&f.map(|x| x as i128)).rem_euclid(3) == 0 { 1.0 } else { 0.0 }).unwrap();
        let mut total = 0.0;
        for idx in 0..243 {
            total += fourier_point(&chi, &decode_form(idx, 3)).unwrap().norm_sqr();
        }
        assert!((total * 243.0 - chi.norm_squared()).abs() < 1e-9);
    }
}
