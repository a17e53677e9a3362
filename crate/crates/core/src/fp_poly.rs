//! Polynomials over 𝔽_p (coefficients lowest degree first) and factorization
//! of binary forms modulo p.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{inv_mod, mul_mod};

/// Polynomial over 𝔽_p, lowest degree first, with no trailing zeros.
pub type Poly = Vec<u64>;

/// Arithmetic in 𝔽_p[x].
#[derive(Clone, Copy, Debug)]
pub struct Fp {
    pub p: u64,
}

impl Fp {
    pub fn new(p: u64) -> Self {
        assert!(p >= 2 && p < (1 << 62), "modulus out of range");
        Fp { p }
    }

    pub fn reduce(&self, c: i128) -> u64 {
        c.rem_euclid(self.p as i128) as u64
    }

    pub fn trim(&self, mut a: Poly) -> Poly {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    pub fn from_ints(&self, cs: &[i128]) -> Poly {
        self.trim(cs.iter().map(|&c| self.reduce(c)).collect())
    }

    pub fn deg(a: &Poly) -> isize {
        a.len() as isize - 1
    }

    pub fn add(&self, a: &Poly, b: &Poly) -> Poly {
        let n = a.len().max(b.len());
        let out = (0..n)
            .map(|i| {
                let s = a.get(i).copied().unwrap_or(0) + b.get(i).copied().unwrap_or(0);
                s % self.p
            })
            .collect();
        self.trim(out)
    }

    pub fn sub(&self, a: &Poly, b: &Poly) -> Poly {
        let n = a.len().max(b.len());
        let out = (0..n)
            .map(|i| {
                let x = a.get(i).copied().unwrap_or(0);
                let y = b.get(i).copied().unwrap_or(0);
                (x + self.p - y) % self.p
            })
            .collect();
        self.trim(out)
    }

    pub fn scale(&self, a: &Poly, k: u64) -> Poly {
        self.trim(a.iter().map(|&c| mul_mod(c, k, self.p)).collect())
    }

    pub fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        if a.is_empty() || b.is_empty() {
            return vec![];
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + mul_mod(x, y, self.p)) % self.p;
            }
        }
        self.trim(out)
    }

    /// Quotient and remainder; `b` must be nonzero.
    pub fn divrem(&self, a: &Poly, b: &Poly) -> (Poly, Poly) {
        assert!(!b.is_empty(), "division by zero polynomial");
        let inv = inv_mod(*b.last().unwrap(), self.p).expect("leading coefficient invertible");
        let mut r = a.clone();
        if r.len() < b.len() {
            return (vec![], r);
        }
        let mut q = vec![0u64; r.len() - b.len() + 1];
        while r.len() >= b.len() {
            let shift = r.len() - b.len();
            let coef = mul_mod(*r.last().unwrap(), inv, self.p);
            q[shift] = coef;
            for (i, &bc) in b.iter().enumerate() {
                r[shift + i] = (r[shift + i] + self.p - mul_mod(coef, bc, self.p)) % self.p;
            }
            r = self.trim(r);
        }
        (self.trim(q), r)
    }

    pub fn rem(&self, a: &Poly, b: &Poly) -> Poly {
        self.divrem(a, b).1
    }

    pub fn monic(&self, a: &Poly) -> Poly {
        match a.last() {
            None => vec![],
            Some(&lc) => self.scale(a, inv_mod(lc, self.p).expect("unit")),
        }
    }

    pub fn gcd(&self, a: &Poly, b: &Poly) -> Poly {
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.is_empty() {
            let r = self.rem(&x, &y);
            x = y;
            y = r;
        }
        self.monic(&x)
    }

    pub fn derivative(&self, a: &Poly) -> Poly {
        self.trim(a.iter().enumerate().skip(1).map(|(i, &c)| mul_mod(c, i as u64 % self.p, self.p)).collect())
    }

    pub fn powmod(&self, base: &Poly, mut e: u128, m: &Poly) -> Poly {
        let mut result = self.rem(&vec![1], m);
        let mut b = self.rem(base, m);
        while e > 0 {
            if e & 1 == 1 {
                result = self.rem(&self.mul(&result, &b), m);
            }
            b = self.rem(&self.mul(&b, &b), m);
            e >>= 1;
        }
        result
    }

    fn is_one(a: &Poly) -> bool {
        a.len() == 1 && a[0] == 1
    }

    /// For a polynomial in x^p, the polynomial whose p-th power it is.
    fn pth_root(&self, a: &Poly) -> Poly {
        let p = self.p as usize;
        a.iter().step_by(p).copied().collect()
    }

    /// Squarefree decomposition of a monic polynomial: (factor, multiplicity).
    pub fn squarefree(&self, f: &Poly) -> Vec<(Poly, u32)> {
        let mut out = Vec::new();
        if Fp::deg(f) < 1 {
            return out;
        }
        let mut c = self.gcd(f, &self.derivative(f));
        let mut w = self.divrem(f, &c).0;
        let mut i = 1;
        while !Fp::is_one(&w) {
            let y = self.gcd(&w, &c);
            let fac = self.divrem(&w, &y).0;
            if !Fp::is_one(&fac) {
                out.push((fac, i));
            }
            w = y.clone();
            c = self.divrem(&c, &y).0;
            i += 1;
        }
        if !Fp::is_one(&c) {
            let root = self.pth_root(&c);
            for (g, m) in self.squarefree(&root) {
                out.push((g, m * self.p as u32));
            }
        }
        out
    }

    /// Distinct-degree factorization of a monic squarefree polynomial:
    /// (product of all irreducible factors of degree d, d).
    pub fn distinct_degree(&self, f: &Poly) -> Vec<(Poly, u32)> {
        let mut out = Vec::new();
        let x = vec![0, 1];
        let mut rest = f.clone();
        let mut h = self.rem(&x, &rest);
        let mut d = 1;
        while Fp::deg(&rest) >= 2 * d as isize {
            h = self.powmod(&h, self.p as u128, &rest);
            let g = self.gcd(&self.sub(&h, &x), &rest);
            if !Fp::is_one(&g) {
                out.push((g.clone(), d));
                rest = self.divrem(&rest, &g).0;
                h = self.rem(&h, &rest);
            }
            d += 1;
        }
        if Fp::deg(&rest) >= 1 {
            let dr = Fp::deg(&rest) as u32;
            out.push((rest, dr));
        }
        out
    }

    /// Cantor–Zassenhaus equal-degree splitting of a monic product of
    /// irreducibles of degree d.
    pub fn equal_degree(&self, f: &Poly, d: u32, rng: &mut ChaCha8Rng) -> Vec<Poly> {
        let n = Fp::deg(f) as u32;
        if n == d {
            return vec![f.clone()];
        }
        loop {
            let a: Poly = self.trim((0..n).map(|_| rng.gen_range(0..self.p)).collect());
            if Fp::deg(&a) < 1 {
                continue;
            }
            let b = if self.p == 2 {
                let mut t = a.clone();
                let mut acc = a.clone();
                for _ in 1..d {
                    t = self.rem(&self.mul(&t, &t), f);
                    acc = self.add(&acc, &t);
                }
                acc
            } else {
                let e = ((self.p as u128).pow(d) - 1) / 2;
                self.sub(&self.powmod(&a, e, f), &vec![1])
            };
            let g = self.gcd(&b, f);
            if Fp::deg(&g) >= 1 && Fp::deg(&g) < n as isize {
                let h = self.divrem(f, &g).0;
                let mut out = self.equal_degree(&g, d, rng);
                out.extend(self.equal_degree(&h, d, rng));
                return out;
            }
        }
    }

    /// Full factorization of a nonzero polynomial into monic irreducibles:
    /// (leading coefficient, [(factor, multiplicity)]) sorted by (deg, coeffs).
    pub fn factor(&self, f: &Poly, seed: u64) -> (u64, Vec<(Poly, u32)>) {
        assert!(!f.is_empty(), "factor of zero polynomial");
        let lead = *f.last().unwrap();
        let monic = self.monic(f);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        for (sf, m) in self.squarefree(&monic) {
            for (prod, d) in self.distinct_degree(&sf) {
                for g in self.equal_degree(&prod, d, &mut rng) {
                    out.push((g, m));
                }
            }
        }
        out.sort_by(|x, y| (x.0.len(), &x.0.iter().rev().collect::<Vec<_>>()).cmp(&(y.0.len(), &y.0.iter().rev().collect::<Vec<_>>())));
        (lead, out)
    }
}

/// Factorization of a binary quartic modulo p: f(x,y) ≡ lead · y^{∞} ·
/// Π g_i(x,y)^{m_i}, where g_i are homogenized monic irreducibles in x.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryFactorization {
    pub p: u64,
    pub lead: u64,
    pub factors: Vec<(Poly, u32)>,
    /// Multiplicity of the root at infinity (1:0), i.e. 4 − deg f(x,1) mod p.
    pub infinity: u32,
}

impl BinaryFactorization {
    /// Multiply the factors back together: coefficients of f(x,1) mod p.
    pub fn reconstruct(&self) -> Poly {
        let fp = Fp::new(self.p);
        let mut acc: Poly = vec![self.lead];
        for (g, m) in &self.factors {
            for _ in 0..*m {
                acc = fp.mul(&acc, g);
            }
        }
        acc
    }
}

fn seed_for(coeffs: &[u64], p: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &c in coeffs.iter().chain(std::iter::once(&p)) {
        h ^= c;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Factor a binary quartic (a,b,c,d,e) mod p; `None` if it vanishes mod p.
pub fn factor_binary(coeffs: &[i128; 5], p: u64) -> Option<BinaryFactorization> {
    let fp = Fp::new(p);
    let [a, b, c, d, e] = *coeffs;
    let poly = fp.from_ints(&[e, d, c, b, a]);
    if poly.is_empty() {
        return None;
    }
    let infinity = 4 - Fp::deg(&poly) as u32;
    let (lead, factors) = fp.factor(&poly, seed_for(&poly, p));
    Some(BinaryFactorization { p, lead, factors, infinity })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_basics() {
        let fp = Fp::new(5);
        let a = fp.from_ints(&[1, 1]);
        let b = fp.from_ints(&[-1, 1]);
        assert_eq!(fp.mul(&a, &b), vec![4, 0, 1]);
        let (q, r) = fp.divrem(&vec![4, 0, 1], &a);
        assert_eq!((q, r), (b.clone(), vec![]));
        assert_eq!(fp.gcd(&vec![4, 0, 1], &fp.mul(&a, &a)), a);
    }

    #[test]
    fn squarefree_handles_pth_powers() {
        let fp = Fp::new(2);
        // (x+1)^4 = x^4 + 1 over F_2
        let f = vec![1, 0, 0, 0, 1];
        assert_eq!(fp.squarefree(&f), vec![(vec![1, 1], 4)]);
        let fp3 = Fp::new(3);
        // x^3 (x+1) over F_3: derivative-based part plus a cube
        let g = fp3.mul(&vec![0, 0, 0, 1], &vec![1, 1]);
        let mut sf = fp3.squarefree(&g);
        sf.sort();
        assert_eq!(sf, vec![(vec![0, 1], 3), (vec![1, 1], 1)]);
    }

    #[test]
    fn factorization_reconstructs_every_quartic_mod_small_primes() {
        for p in [2u64, 3, 5] {
            let n = p as i128;
            for idx in 0..(n.pow(5)) {
                let mut c = [0i128; 5];
                let mut t = idx;
                for slot in c.iter_mut() {
                    *slot = t % n;
                    t /= n;
                }
                if let Some(bf) = factor_binary(&c, p) {
                    let fp = Fp::new(p);
                    assert_eq!(bf.reconstruct(), fp.from_ints(&[c[4], c[3], c[2], c[1], c[0]]));
                    let total: u32 = bf.factors.iter().map(|(g, m)| (g.len() as u32 - 1) * m).sum::<u32>() + bf.infinity;
                    assert_eq!(total, 4);
                    for (g, _) in &bf.factors {
                        assert_eq!(*g.last().unwrap(), 1);
                    }
                }
            }
        }
    }

    #[test]
    fn irreducible_quartic_over_f2() {
        // x^4 + x + 1 is irreducible over F_2
        let bf = factor_binary(&[1, 0, 0, 1, 1], 2).unwrap();
        assert_eq!(bf.factors, vec![(vec![1, 1, 0, 0, 1], 1)]);
        assert_eq!(bf.infinity, 0);
    }
}
