//! Complex roots of binary quartic forms in ℙ¹(ℂ), in double precision.
//!
//! Only used to propose candidate transformations; every transformation
//! derived from these roots is verified in exact arithmetic before use.

use num_complex::Complex64;
use num_traits::ToPrimitive;

use crate::scalar::IntScalar;
use crate::QuarticForm;

/// Homogeneous root (x : y).
pub type ProjRoot = [Complex64; 2];

fn horner(p: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    // p highest degree first; returns (p(z), p'(z)).
    let mut v = Complex64::new(0.0, 0.0);
    let mut dv = Complex64::new(0.0, 0.0);
    for c in p {
        dv = dv * z + v;
        v = v * z + c;
    }
    (v, dv)
}

/// All complex roots of a polynomial (highest degree first, nonzero leading
/// coefficient) by Aberth–Ehrlich iteration followed by Newton polishing.
pub fn poly_roots(p: &[f64]) -> Vec<Complex64> {
    let n = p.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = p[0];
    let pc: Vec<Complex64> = p.iter().map(|c| Complex64::new(c / lead, 0.0)).collect();
    // Cauchy bound for the initial circle.
    let radius = 1.0 + pc[1..].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let (v, dv) = horner(&pc, z[i]);
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / dv;
            let sum: Complex64 = (0..n).filter(|&j| j != i).map(|j| Complex64::new(1.0, 0.0) / (z[i] - z[j])).sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
            z[i] -= w;
            moved = moved.max(w.norm() / z[i].norm().max(1.0));
        }
        if moved < 1e-15 {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (v, dv) = horner(&pc, *zi);
            if dv.norm() == 0.0 {
                break;
            }
            *zi -= v / dv;
        }
    }
    z
}

/// The four roots of f in ℙ¹(ℂ) as homogeneous vectors (x, y) with f(x, y) = 0.
pub fn projective_roots<T: IntScalar>(f: &QuarticForm<T>) -> Vec<ProjRoot> {
    let c: Vec<f64> = f.coeffs().iter().map(|x| x.to_big().to_f64().unwrap()).collect();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut lead = 0;
    while lead < 4 && c[lead] == 0.0 {
        lead += 1;
    }
    let mut out: Vec<ProjRoot> = vec![[one, zero]; lead];
    out.extend(poly_roots(&c[lead..]).into_iter().map(|t| [t, one]));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Form;

    #[test]
    fn roots_of_split_form() {
        let mut r: Vec<f64> = projective_roots(&Form::from_coeffs([1, 0, -5, 0, 4])).iter().map(|v| (v[0] / v[1]).re).collect();
        r.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (x, y) in r.iter().zip([-2.0, -1.0, 1.0, 2.0]) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn root_at_infinity() {
        let r = projective_roots(&Form::from_coeffs([0, 1, 0, -1, 0]));
        assert_eq!(r.len(), 4);
        assert_eq!(r[0][1].norm(), 0.0);
    }
}
