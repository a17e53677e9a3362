//! Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned below.
//!
//! Failing criteria are reported, not hidden. The process exits 0 after the
//! summary so that the remaining test targets still run; set
//! `ACCEPTANCE_STRICT=1` to turn any FAIL into a nonzero exit status.

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use quartic::arch::{self, ConstantConfig, ConstantName};
use quartic::count::{self, parse_rational, Weight};
use quartic::expsums::{self, Pairing, Regime, GAUSS_REGIME_CONSTANT};
use quartic::forms::discriminant_expanded;
use quartic::localp;
use quartic::reduce::{self, OrbitFilter, ReductionParams};
use quartic::{act_integral, BigForm, Form, Map, SignatureClass};

/// Criterion 3: random forms checked and their coefficient range.
const DISC_SAMPLES: usize = 100_000;
const DISC_COEFF: i64 = 1_000_000_000_000;
/// Criterion 4: random (f, g) pairs.
const ACTION_SAMPLES: usize = 10_000;
/// Criteria 5 and 6: random samples.
const LOCAL_SAMPLES: usize = 1_000;
/// Criterion 7: random (f, h) pairs per regime and prime, and the single
/// constant bounding |𝒢_{p²}|·p^{e} across all tested primes.
const ORBITAL_PAIRS: usize = 200;
const ORBITAL_CONSTANT: f64 = 4.0;
/// Criterion 7: random h ∉ pV* per prime for the Fourier bound, and the
/// constants bounding p²·ν(χ_{p²}) and p³·|χ̂_{p²}(h)|.
const FOURIER_SAMPLES: usize = 200;
const FOURIER_DENSITY_CONSTANT: f64 = 4.0;
const FOURIER_GENERIC_CONSTANT: f64 = 4.0;
/// Criterion 8.
const C56_TOL: f64 = 1e-6;
const PERIOD_AGREEMENT: f64 = 1e-9;
const OMEGA_3_0_EXPECTED: f64 = 3.7081494;
const OMEGA_VALUE_TOL: f64 = 1e-6;
const C34_AGREEMENT: f64 = 1e-4;
/// Criterion 9.
const RATIO_RANGE: (f64, f64) = (0.85, 1.05);
const BOX_BOUND: i128 = 20;

struct Report {
    n: u32,
    ok: bool,
    lines: Vec<String>,
}

impl Report {
    fn new(n: u32) -> Self {
        Report { n, ok: true, lines: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: String) {
        self.ok &= ok;
        self.lines.push(format!("    [{}] {what}", if ok { "ok" } else { "FAIL" }));
    }

    fn note(&mut self, what: String) {
        self.lines.push(format!("    {what}"));
    }
}

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(0x5eed);
    r.set_stream(stream);
    r
}

fn random_form(r: &mut ChaCha8Rng, bound: i128) -> Form {
    Form::from_coeffs(std::array::from_fn(|_| r.gen_range(-bound..=bound)))
}

fn random_nondegenerate(r: &mut ChaCha8Rng, bound: i128) -> Form {
    loop {
        let f = random_form(r, bound);
        if !f.invariants().unwrap().delta.is_zero() {
            return f;
        }
    }
}

/// Random element of GL₂(ℤ) as a word in [[1,1],[0,1]], [[0,1],[-1,0]], [[1,0],[0,-1]].
fn random_unimodular(r: &mut ChaCha8Rng) -> Map {
    let gens = [Map::new(1, 1, 0, 1), Map::new(1, -1, 0, 1), Map::new(0, 1, -1, 0), Map::new(1, 0, 0, -1)];
    let len = r.gen_range(1..=8);
    (0..len).fold(Map::identity(), |m, _| m.compose(&gens[r.gen_range(0..gens.len())]))
}

fn criterion1() -> Report {
    let mut rep = Report::new(1);
    for p in [3u64, 5, 7, 11] {
        let checks = localp::verify_splitting_densities(p).unwrap();
        let bad: Vec<String> = checks.iter().filter(|c| !c.matches()).map(|c| format!("{} {} vs {}", c.sigma, c.closed, c.brute)).collect();
        rep.check(bad.is_empty() && checks.len() == 12, format!("p={p}: {} rows (11 types + zero form), mismatches {bad:?}", checks.len()));
    }
    rep
}

fn criterion2() -> Report {
    let mut rep = Report::new(2);
    for p in [3u64, 5, 7] {
        let mut cols = Vec::new();
        for k in 0..=3 {
            let checks = localp::verify_slice_densities(p, k).unwrap();
            let bad: Vec<String> = checks
                .iter()
                .filter(|c| !c.matches())
                .map(|c| format!("{}{}: closed {} brute {}", c.sigma, if c.maximal { "^max" } else { "" }, c.closed, c.brute))
                .collect();
            rep.check(bad.is_empty() && checks.len() == 14, format!("p={p} k={k}: {} rows, mismatches {bad:?}", checks.len()));
            cols.push(checks);
        }
        let same = cols[2].iter().zip(&cols[3]).all(|(a, b)| a.closed == b.closed && a.brute == b.brute);
        rep.check(same, format!("p={p}: columns k=2 and k=3 agree"));
    }
    rep
}

fn criterion3() -> Report {
    let mut rep = Report::new(3);
    let mut r = rng(3);
    let mut bad = 0;
    for _ in 0..DISC_SAMPLES {
        let f = BigForm::from_coeffs(std::array::from_fn(|_| BigInt::from(r.gen_range(-DISC_COEFF..=DISC_COEFF))));
        let ij = f.invariants().unwrap();
        if Ratio::from_integer(discriminant_expanded(&f.coeffs())) != ij.delta {
            bad += 1;
        }
    }
    rep.check(bad == 0, format!("{DISC_SAMPLES} forms with |coefficients| ≤ 10^12: {bad} disagreements"));
    rep
}

fn criterion4() -> Report {
    let mut rep = Report::new(4);
    let mut r = rng(4);
    let mut bad = Vec::new();
    for n in 0..ACTION_SAMPLES {
        let f = random_nondegenerate(&mut r, 10);
        let g = random_unimodular(&mut r);
        let fb = f.promote();
        let h = act_integral(&g.promote(), &fb).expect("unimodular maps keep forms integral");
        let (a, b) = (fb.invariants().unwrap(), h.invariants().unwrap());
        let mut same = a == b && fb.disc_direct().unwrap() == h.disc_direct().unwrap();
        same &= fb.signature().unwrap() == h.signature().unwrap();
        for p in [2u64, 3, 5] {
            same &= localp::lp_soluble(&fb, p).unwrap() == localp::lp_soluble(&h, p).unwrap();
            same &= localp::mp_levels(&fb, p).unwrap() == localp::mp_levels(&h, p).unwrap();
        }
        if !same && bad.len() < 5 {
            bad.push(format!("#{n}: f={f} g={g:?}"));
        }
    }
    rep.check(bad.is_empty(), format!("{ACTION_SAMPLES} pairs: I, J, Δ, H, signature, ℓ_p and m_p (p = 2, 3, 5) invariant; failures {bad:?}"));
    rep
}

fn criterion5() -> Report {
    let mut rep = Report::new(5);
    for p in [3u64, 5, 7] {
        for k in 1..=4u32 {
            let n = localp::hermite_reps(p, k).len() as u64;
            let want = (p + 1) * p.pow(k - 1);
            rep.check(n == want, format!("p={p} k={k}: {n} representatives, expected {want}"));
        }
    }
    let mut r = rng(5);
    let mut bad = 0;
    for _ in 0..LOCAL_SAMPLES {
        let p = [3u64, 5, 7][r.gen_range(0..3)];
        let k = r.gen_range(1..=3u32);
        let f = random_form(&mut r, 1000);
        let shift = (p as i128).pow(2 * k);
        let g = Form::from_coeffs(f.coeffs().map(|c| c + shift * r.gen_range(-3..=3)));
        if localp::mp_level(&f, p, k) != localp::mp_level(&g, p, k) {
            bad += 1;
        }
    }
    rep.check(bad == 0, format!("m_p^(k) periodic mod p^(2k) on {LOCAL_SAMPLES} random congruent pairs: {bad} failures"));
    for p in [3u64, 5, 7] {
        let f = Form::new(1, 0, 0, 0, (p * p) as i128);
        let levels = localp::mp_levels(&f, p).unwrap();
        let m = localp::mp_total(&f, p).unwrap();
        rep.check(m == p + 1, format!("m_p(x⁴+{}y⁴) at p={p}: {m} (levels {levels:?}), hand value {}", p * p, p + 1));
    }
    rep
}

fn criterion6() -> Report {
    let mut rep = Report::new(6);
    let mut r = rng(6);
    let mut bad = 0;
    let mut deep = 0;
    for _ in 0..LOCAL_SAMPLES {
        let p = [3u64, 5, 7][r.gen_range(0..3)];
        // Bias towards p-adically deep forms: scale coefficients by random powers of p.
        let mut f = random_form(&mut r, 50);
        let c = f.coeffs().map(|c| c * (p as i128).pow(r.gen_range(0..=2)));
        f = Form::from_coeffs(c);
        let Ok(disc) = f.disc_direct() else { continue };
        if disc == 0 {
            continue;
        }
        let v = quartic::arith::valuation_i128(disc, p);
        let k0 = v / 2;
        deep += (v >= 2) as u32;
        let modulus = BigInt::from(p).pow(2 * k0 + 2);
        let fb = f.promote();
        let g = BigForm::from_coeffs(fb.coeffs().map(|c| c + &modulus * BigInt::from(r.gen_range(-5i64..=5))));
        if localp::lp_soluble(&fb, p).unwrap() != localp::lp_soluble(&g, p).unwrap() {
            bad += 1;
        }
    }
    rep.check(bad == 0, format!("ℓ_p(f) = ℓ_p(f + p^(2⌊v/2⌋+2)·r) on {LOCAL_SAMPLES} random forms ({deep} with p² | Δ): {bad} failures"));
    let f = Form::new(3, 0, 0, 0, 3);
    let l3 = localp::lp_soluble(&f, 3).unwrap();
    rep.check(!l3, format!("(3,0,0,0,3) soluble over ℚ₃: {l3}"));
    let mut bad = 0;
    let mut n = 0;
    while n < LOCAL_SAMPLES {
        let p = [3u64, 5, 7, 11, 13][r.gen_range(0..5)];
        let f = random_nondegenerate(&mut r, 1000);
        let disc = f.disc_direct().unwrap();
        if disc % ((p * p) as i128) == 0 {
            continue;
        }
        n += 1;
        if !localp::lp_soluble(&f, p).unwrap() {
            bad += 1;
        }
    }
    rep.check(bad == 0, format!("p odd, p² ∤ Δ: {LOCAL_SAMPLES} samples, {bad} insoluble"));
    rep
}

fn criterion7() -> Report {
    let mut rep = Report::new(7);
    for p in [3u64, 5, 7, 11, 13] {
        for k in 1..=2u32 {
            let n = p.pow(k);
            let mut worst: f64 = 0.0;
            let mut exact_zero = true;
            for a in 0..n {
                let q = expsums::gauss_sum(a, p, k).unwrap().norm();
                let reg = Regime::of_residue(a, p, k);
                if reg == Regime::Zero {
                    exact_zero &= (q - 1.0).abs() < 1e-12;
                }
                worst = worst.max(q * (p as f64).powf(reg.exponent()));
            }
            rep.check(worst <= GAUSS_REGIME_CONSTANT && exact_zero, format!("Gauss sums p={p} k={k}: max |𝒬|·p^e = {worst:.6} (bound {GAUSS_REGIME_CONSTANT})"));
        }
    }
    let mut r = rng(7);
    let mut overall: f64 = 0.0;
    for p in [5u64, 7, 11, 13] {
        let n = p * p;
        let t = Instant::now();
        let mut per_regime = Vec::new();
        for reg in [Regime::Zero, Regime::Deep, Regime::Generic] {
            let mut worst: f64 = 0.0;
            for _ in 0..ORBITAL_PAIRS {
                let f = loop {
                    let f: [u64; 5] = std::array::from_fn(|_| r.gen_range(0..n));
                    if f.iter().any(|c| c % p != 0) {
                        break f;
                    }
                };
                let h = expsums::random_in_regime(&mut r, p, 2, reg);
                let g = expsums::orbital_sum(&f, &h, p, 2, Pairing::Invariant).unwrap().norm();
                worst = worst.max(g * (p as f64).powf(reg.exponent()));
            }
            overall = overall.max(worst);
            per_regime.push(format!("{} {worst:.4}", reg.label()));
        }
        rep.note(format!("p={p}: max |𝒢_(p²)|·p^e by regime: {} ({:.0?})", per_regime.join(", "), t.elapsed()));
    }
    rep.check(overall <= ORBITAL_CONSTANT, format!("orbital sums, {ORBITAL_PAIRS} pairs per regime: single constant {overall:.4} ≤ {ORBITAL_CONSTANT}"));
    for p in [3u64, 5] {
        let chi = expsums::chi_disc_p2(p).unwrap();
        let nu = expsums::fourier_point(&chi, &[0; 5]).unwrap().re;
        rep.check(nu * (p * p) as f64 <= FOURIER_DENSITY_CONSTANT, format!("p={p}: ν(χ_(p²)) = {nu:.6}, p²·ν = {:.4} ≤ {FOURIER_DENSITY_CONSTANT}", nu * (p * p) as f64));
        let mut worst: f64 = 0.0;
        for _ in 0..FOURIER_SAMPLES {
            let h = expsums::random_in_regime(&mut r, p, 2, Regime::Generic);
            worst = worst.max(expsums::fourier_point(&chi, &h).unwrap().norm() * (p as f64).powi(3));
        }
        rep.check(worst <= FOURIER_GENERIC_CONSTANT, format!("p={p}: max p³·|χ̂(h)| over {FOURIER_SAMPLES} h ∉ pV* = {worst:.4} ≤ {FOURIER_GENERIC_CONSTANT}"));
    }
    rep
}

fn criterion8() -> (Report, f64, f64) {
    let mut rep = Report::new(8);
    let cfg = ConstantConfig::default();
    let pos = arch::region_constant(ConstantName::C56Pos, cfg).unwrap();
    let neg = arch::region_constant(ConstantName::C56Neg, cfg).unwrap();
    rep.check((pos.value - 1.6).abs() <= C56_TOL && pos.agreement <= C56_TOL, format!("C56_pos = {:.9} (contour {:.9})", pos.value, pos.value_b));
    rep.check((neg.value - 6.4).abs() <= C56_TOL && neg.agreement <= C56_TOL, format!("C56_neg = {:.9} (contour {:.9})", neg.value, neg.value_b));
    rep.check((pos.value + neg.value - 8.0).abs() <= C56_TOL, format!("C56 sum = {:.9}", pos.value + neg.value));

    let agm = arch::real_period_agm(&3.0f64, &0.0).unwrap().value;
    let quad = arch::real_period_quadrature(&3.0f64, &0.0).unwrap().value;
    let rel = (agm - quad).abs() / agm;
    rep.check(rel <= PERIOD_AGREEMENT, format!("Ω(E^(3,0)): AGM {agm:.12} vs quadrature {quad:.12}, relative {rel:.2e}"));
    rep.check((agm - OMEGA_3_0_EXPECTED).abs() <= OMEGA_VALUE_TOL, format!("Ω(E^(3,0)) = {agm:.10}, expected ≈ {OMEGA_3_0_EXPECTED}"));
    let other = arch::real_period_agm(&(-3.0f64), &0.0).unwrap().value;
    rep.note(format!("for reference Ω(E^(-3,0)) = {other:.10}"));

    let mut c34 = [0.0; 2];
    for (slot, name) in [ConstantName::C34Pos, ConstantName::C34Neg].into_iter().enumerate() {
        let t = Instant::now();
        let c = arch::region_constant(name, cfg).unwrap();
        rep.check(
            c.agreement <= C34_AGREEMENT,
            format!("{}: {} {:.8}, {} {:.8}, relative agreement {:.2e} ({:.0?})", name.label(), c.method_a, c.value_a, c.method_b, c.value_b, c.agreement, t.elapsed()),
        );
        c34[slot] = c.value;
    }
    (rep, c34[0], c34[1])
}

fn criterion9(c34_pos: f64, c34_neg: f64) -> Report {
    let mut rep = Report::new(9);
    let classes = [SignatureClass::Class0, SignatureClass::Class1, SignatureClass::Class2Plus, SignatureClass::Class2Minus];
    let xs = count::geometric_grid(10_000, 1_000_000, 9);
    let t = Instant::now();
    let series = count::count_orbits(&classes, &xs, &Weight::One, OrbitFilter::Irreducible, ReductionParams::default()).unwrap();
    rep.note(format!("irreducible orbits at {} heights up to 10⁶ ({:.0?})", xs.len(), t.elapsed()));
    for cls in classes {
        let pts = series.raw_points(cls);
        let c34 = if cls.disc_positive() { c34_pos } else { c34_neg };
        let fit = count::fit_points(&pts, cls, c34).unwrap();
        let at = |x: f64| pts.iter().find(|p| p.0 == x).unwrap().1;
        let counts = [1e4, 1e5, 1e6].map(at);
        let ratio = counts[2] / (fit.c1_theory * 1e6f64.powf(5.0 / 6.0));
        rep.note(format!(
            "class {}: counts {:?} at 10⁴,10⁵,10⁶; c1 theory {:.5} fit {:.5}; c2 theory {:.5} fit {:.5}; residual exponent {:.3}",
            cls.label(),
            counts.map(|c| c as u64),
            fit.c1_theory,
            fit.c1_hat,
            fit.c2_theory,
            fit.c2_hat,
            fit.residual_exponent
        ));
        rep.check((RATIO_RANGE.0..=RATIO_RANGE.1).contains(&ratio), format!("class {}: ratio to primary term at 10⁶ = {ratio:.4}, want {RATIO_RANGE:?}", cls.label()));
        let res: Vec<f64> = fit.primary_residuals.iter().rev().take(2).map(|p| p.1).collect();
        rep.check(res.iter().all(|r| *r < 0.0), format!("class {}: residuals at the top two heights {res:.1?} negative", cls.label()));
        rep.check(fit.c2_hat < 0.0, format!("class {}: fitted c2_hat {:.5} negative", cls.label(), fit.c2_hat));
    }
    let t = Instant::now();
    let a = reduce::enumerate_orbits(None, 10_000, OrbitFilter::All, ReductionParams::default()).unwrap();
    let b = reduce::enumerate_orbits_box(None, 10_000, OrbitFilter::All, BOX_BOUND).unwrap();
    rep.check(a == b, format!("X=10⁴: reduced-set enumeration {} orbits, coefficient-box search (|c| ≤ {BOX_BOUND}) {} orbits, identical lists: {} ({:.0?})", a.len(), b.len(), a == b, t.elapsed()));
    rep
}

fn criterion10() -> Report {
    let mut rep = Report::new(10);
    let xs = [1_000u64, 10_000, 100_000];
    let params = ReductionParams::default();
    let mut totals = vec![(Ratio::<BigInt>::zero(), 0u64); xs.len()];
    let mut below_one = 0;
    let mut not_power = 0;
    for positive in [true, false] {
        let t = Instant::now();
        let (cks, recs) = count::selmer_series(&xs, positive, params).unwrap();
        for r in &recs {
            let s = parse_rational(&r.selmer_sum).unwrap();
            below_one += (s < Ratio::from_integer(BigInt::from(1))) as u32;
            not_power += r.sel2.map_or(true, |v| !v.is_power_of_two()) as u32;
        }
        for (slot, c) in totals.iter_mut().zip(&cks) {
            slot.0 += parse_rational(&c.selmer_total).unwrap();
            slot.1 += c.curves;
        }
        let avgs: Vec<String> = cks.iter().map(|c| format!("{}: {} curves avg {:.4}", c.x, c.curves, c.average)).collect();
        rep.note(format!("Δ {} : {} ({:.0?})", if positive { ">0" } else { "<0" }, avgs.join("; "), t.elapsed()));
    }
    let avgs: Vec<f64> = totals.iter().map(|(s, n)| (s / BigInt::from(*n)).to_f64().unwrap()).collect();
    rep.check(avgs.iter().all(|a| *a > 1.0 && *a <= 3.0), format!("average |Sel₂| at 10³, 10⁴, 10⁵: {avgs:.4?} within (1, 3]"));
    rep.check(avgs.windows(2).all(|w| w[1] > w[0]), "average increases across the checkpoints".to_string());
    rep.check(below_one == 0, format!("every curve contributes ≥ 1: {below_one} exceptions"));
    rep.note(format!("Selmer sizes that are not powers of two: {not_power}"));
    rep
}

fn main() {
    // Ignore the harness flags cargo passes (e.g. --nocapture).
    let start = Instant::now();
    let mut reports = Vec::new();
    let mut run = |f: &mut dyn FnMut() -> Report| {
        let t = Instant::now();
        let r = f();
        println!("criterion {}: {} ({:.1?})", r.n, if r.ok { "PASS" } else { "FAIL" }, t.elapsed());
        for l in &r.lines {
            println!("{l}");
        }
        reports.push((r.n, r.ok));
    };
    run(&mut criterion1);
    run(&mut criterion2);
    run(&mut criterion3);
    run(&mut criterion4);
    run(&mut criterion5);
    run(&mut criterion6);
    run(&mut criterion7);
    let mut c34 = (f64::NAN, f64::NAN);
    run(&mut || {
        let (r, p, n) = criterion8();
        c34 = (p, n);
        r
    });
    run(&mut || criterion9(c34.0, c34.1));
    run(&mut criterion10);
    let failed: Vec<u32> = reports.iter().filter(|r| !r.1).map(|r| r.0).collect();
    println!("acceptance: {} of {} criteria PASS; FAIL: {failed:?} ({:.1?})", reports.len() - failed.len(), reports.len(), start.elapsed());
    if !failed.is_empty() && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
