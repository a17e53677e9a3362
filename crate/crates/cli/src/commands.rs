//! Subcommand implementations. Each returns its complete output text so that
//! the dispatcher can cache it and compare it byte for byte.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use quartic::arch::{self, ConstantConfig, ConstantName};
use quartic::count::{self, rational_string, CountRow, CountSeries, Weight};
use quartic::expsums::{self, Pairing, Regime};
use quartic::localp::{self, DensityCheck};
use quartic::reduce::{self, OrbitFilter, OrbitRecord};
use quartic::{BigForm, Form, HpFloat, Real, SignatureClass};

use crate::config::{parse_height, parse_list, OutputFormat, RunConfig};
use crate::{usage, ArgMap, Command, ExpsumKind};

/// What a subcommand produced: its output, and a verification failure to
/// report after printing it.
pub struct Outcome {
    pub text: String,
    pub failure: Option<String>,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, failure: None }
    }
}

/// Floats in fixed scientific notation with 12 significant digits.
pub fn sci(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        "nan".to_string()
    }
}

fn header(op: &str, hash: &str) -> String {
    format!("# schema=qc1 op={op} config_hash={hash}\n")
}

/// Quote a CSV field containing a comma.
fn field(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// JSON text with every float printed by [`sci`] (NaN and infinities as null).
pub fn json_text(v: &Value) -> String {
    let mut out = String::new();
    write_json(v, &mut out);
    out
}

fn write_json(v: &Value, out: &mut String) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap();
            out.push_str(&sci(x));
        }
        Value::Array(a) => {
            out.push('[');
            for (k, x) in a.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                write_json(x, out);
            }
            out.push(']');
        }
        Value::Object(m) => {
            out.push('{');
            for (k, (key, x)) in m.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(key).unwrap());
                out.push(':');
                write_json(x, out);
            }
            out.push('}');
        }
        other => out.push_str(&other.to_string()),
    }
}

/// A float as a JSON value (null when not finite).
fn jf(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

fn parse_form(s: &str) -> Result<BigForm> {
    s.parse::<BigForm>().map_err(|e| usage(e.to_string()))
}

fn parse_small_form(s: &str) -> Result<Form> {
    s.parse::<Form>().map_err(|e| usage(e.to_string()))
}

fn parse_residues(s: &str, n: u64) -> Result<[u64; 5]> {
    let f = parse_form(s)?;
    let m = BigInt::from(n);
    let r = f.coeffs().map(|c| {
        let x = ((c % &m) + &m) % &m;
        x.to_u64().unwrap()
    });
    Ok(r)
}

fn parse_classes(s: Option<&str>) -> Result<Vec<SignatureClass>> {
    match s {
        None | Some("all") => Ok(vec![
            SignatureClass::Class0,
            SignatureClass::Class1,
            SignatureClass::Class2Plus,
            SignatureClass::Class2Minus,
        ]),
        Some(s) => s.split(',').map(|c| c.parse::<SignatureClass>().map_err(|e| usage(e.to_string()))).collect(),
    }
}

fn parse_filter(s: &str) -> Result<OrbitFilter> {
    s.parse().map_err(|e: quartic::QuarticError| usage(e.to_string()))
}

fn height_arg(h: &Option<String>, cfg: &RunConfig) -> Result<u64> {
    match h {
        Some(s) => parse_height(s).map_err(|e| usage(e.to_string())),
        None => cfg.height_bound.ok_or_else(|| usage("--height (or height_bound in the config) is required")),
    }
}

/// Heights from `--checkpoints`, or the default grid up to `top`.
fn checkpoint_grid(list: &Option<String>, top: u64, lo: u64, n: usize) -> Result<Vec<u64>> {
    let mut xs = match list {
        Some(s) => s.split(',').map(|t| parse_height(t.trim())).collect::<Result<Vec<_>>>().map_err(|e| usage(e.to_string()))?,
        None if top > lo => count::geometric_grid(lo, top, n),
        None => vec![top],
    };
    xs.sort_unstable();
    xs.dedup();
    Ok(xs)
}

/// Operation name and the arguments that determine its result.
pub fn describe(cmd: &Command) -> (&'static str, ArgMap) {
    let mut m = ArgMap::new();
    let mut put = |k: &str, v: String| {
        m.insert(k.to_string(), v);
    };
    let op = match cmd {
        Command::Invariants { form } => {
            put("form", form.clone());
            "invariants"
        }
        Command::Reduce { form, height, class, filter, out, checkpoint } => {
            put("form", form.clone().unwrap_or_default());
            put("height", height.clone().unwrap_or_default());
            put("class", class.clone().unwrap_or_default());
            put("filter", filter.clone());
            put("stream", out.is_some().to_string());
            let _ = checkpoint;
            "reduce"
        }
        Command::CountOrbits { class, height, weight, filter, checkpoints, checkpoint: _ } => {
            put("class", class.clone());
            put("height", height.clone().unwrap_or_default());
            put("weight", weight.clone());
            put("filter", filter.clone());
            put("checkpoints", checkpoints.clone().unwrap_or_default());
            "count-orbits"
        }
        Command::VerifyDensity { p, table, k } => {
            put("p", p.map(|p| p.to_string()).unwrap_or_default());
            put("table", table.to_string());
            put("k", k.clone().unwrap_or_default());
            "verify-density"
        }
        Command::Solubility { form, primes } => {
            put("form", form.clone());
            put("primes", primes.clone().unwrap_or_default());
            "solubility"
        }
        Command::Mp { form, p } => {
            put("form", form.clone());
            put("p", p.map(|p| p.to_string()).unwrap_or_default());
            "mp"
        }
        Command::Expsum { kind } => match kind {
            ExpsumKind::Gauss { p, k } => {
                put("kind", "gauss".into());
                put("p", p.to_string());
                put("k", k.to_string());
                "expsum"
            }
            ExpsumKind::Orbital { p, k, f, h, pairing } => {
                put("kind", "orbital".into());
                put("p", p.to_string());
                put("k", k.to_string());
                put("f", f.clone());
                put("h", h.clone());
                put("pairing", pairing.clone());
                "expsum"
            }
            ExpsumKind::Fourier { p, h } => {
                put("kind", "fourier".into());
                put("p", p.to_string());
                put("h", h.clone());
                "expsum"
            }
        },
        Command::Periods { i, j, high_precision } => {
            put("i", i.clone());
            put("j", j.clone());
            put("high_precision", high_precision.to_string());
            "periods"
        }
        Command::Constants { name, samples } => {
            put("name", name.clone().unwrap_or_default());
            put("samples", samples.to_string());
            "constants"
        }
        Command::Selmer { height, sign, checkpoints } => {
            put("height", height.clone().unwrap_or_default());
            put("sign", sign.clone());
            put("checkpoints", checkpoints.clone().unwrap_or_default());
            "selmer"
        }
        Command::Fit { input, class, c34 } => {
            // The input's content, not its path, determines the result.
            let content = fs::read_to_string(input).unwrap_or_default();
            put("input", content);
            put("class", class.clone());
            put("c34", c34.map(sci).unwrap_or_default());
            "fit"
        }
        Command::VerifyAll => "verify-all",
    };
    (op, m)
}

pub fn execute(cmd: &Command, cfg: &RunConfig, hash: &str) -> Result<Outcome> {
    match cmd {
        Command::Invariants { form } => invariants(form, hash),
        Command::Reduce { form: Some(form), .. } => reduce_one(form, cfg, hash),
        Command::Reduce { form: None, height, class, filter, out, checkpoint } => {
            reduce_stream(height, class.as_deref(), filter, out.as_deref(), checkpoint.as_deref(), cfg, hash)
        }
        Command::CountOrbits { class, height, weight, filter, checkpoints, checkpoint } => {
            count_orbits(class, height, weight, filter, checkpoints, checkpoint.as_deref(), cfg, hash)
        }
        Command::VerifyDensity { p, table, k } => verify_density(*p, *table, k, cfg, hash),
        Command::Solubility { form, primes } => solubility(form, primes, cfg, hash),
        Command::Mp { form, p } => mp(form, *p, hash),
        Command::Expsum { kind } => expsum(kind, hash),
        Command::Periods { i, j, high_precision } => periods(i, j, *high_precision, hash),
        Command::Constants { name, samples } => constants(name.as_deref(), *samples, cfg, hash),
        Command::Selmer { height, sign, checkpoints } => selmer(height, sign, checkpoints, cfg, hash),
        Command::Fit { input, class, c34 } => fit(input, class, *c34, cfg, hash),
        Command::VerifyAll => verify_all(hash),
    }
}

fn invariants(form: &str, hash: &str) -> Result<Outcome> {
    let f = parse_form(form)?;
    let ij = f.invariants()?;
    let disc = f.disc_direct()?;
    let mut out = header("invariants", hash);
    if ij.delta_sign() == 0 {
        writeln!(out, "{ij} class=degenerate generic=false")?;
        return Ok(Outcome::ok(out));
    }
    writeln!(out, "{ij} class={} irreducible={} generic={}", f.signature()?, f.is_irreducible()?, f.is_generic()?)?;
    debug_assert_eq!(num_rational::Ratio::from_integer(disc), ij.delta);
    Ok(Outcome::ok(out))
}

fn orbit_line(o: &OrbitRecord) -> String {
    serde_json::to_string(o).expect("orbit records serialize")
}

fn reduce_one(form: &str, cfg: &RunConfig, hash: &str) -> Result<Outcome> {
    let f = parse_small_form(form)?;
    let rep = reduce::canonicalize_with(&f, cfg.reduction_params())?;
    let rec = OrbitRecord::from_rep(rep)?;
    let mut out = String::new();
    writeln!(out, "{}", json_text(&json!({"schema": "qc1", "op": "reduce", "config_hash": hash})))?;
    writeln!(out, "{}", orbit_line(&rec))?;
    Ok(Outcome::ok(out))
}

/// Checkpoint of an orbit stream: fibers are written in stream order, and the
/// checkpoint names the last fiber whose orbits are all on disk.
#[derive(serde::Serialize, serde::Deserialize)]
struct StreamCheckpoint {
    config_hash: String,
    #[serde(rename = "I")]
    i: i128,
    #[serde(rename = "J")]
    j: i128,
    fibers_done: u64,
    orbits_done: u64,
}

fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, content).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Orbit stream below a height. With `--out`, orbits go to the file in JSONL
/// (a header object, then one record per line) and a checkpoint is written
/// after every fiber batch so that an interrupted run resumes where it stopped.
fn reduce_stream(
    height: &Option<String>,
    class: Option<&str>,
    filter: &str,
    out: Option<&Path>,
    checkpoint: Option<&Path>,
    cfg: &RunConfig,
    hash: &str,
) -> Result<Outcome> {
    let x = height_arg(height, cfg)?;
    let cls = match class {
        None => None,
        Some(c) => Some(c.parse::<SignatureClass>().map_err(|e| usage(e.to_string()))?),
    };
    let filter = parse_filter(filter)?;
    let params = cfg.reduction_params();
    let header_line = json_text(&json!({"schema": "qc1", "op": "reduce", "config_hash": hash}));
    let Some(out_path) = out else {
        let orbits = reduce::enumerate_orbits(cls, x, filter, params)?;
        let mut text = header_line + "\n";
        for o in &orbits {
            text.push_str(&orbit_line(o));
            text.push('\n');
        }
        return Ok(Outcome::ok(text));
    };
    let ck_path = checkpoint.map(Path::to_path_buf).unwrap_or_else(|| out_path.with_extension("checkpoint"));

    let fibers = reduce::reduced_forms_below(x, params, filter == OrbitFilter::All);
    let wanted_sign = cls.map(|c| if c.disc_positive() { 1 } else { -1 });
    let mut order: Vec<_> = fibers
        .iter()
        .filter(|((i, j), _)| wanted_sign.map_or(true, |s| (4 * i * i * i - j * j).signum() == s))
        .map(|(&(i, j), m)| {
            let h = quartic::Invariants::from_ij(i, j).expect("fiber invariants fit").height;
            (h, i, j, m)
        })
        .collect();
    order.sort_by(|a, b| (&a.0, a.1, a.2).cmp(&(&b.0, b.1, b.2)));

    // Resume: keep the records of completed fibers, drop any partial tail.
    let mut done = 0usize;
    let mut orbits_done = 0u64;
    if let Ok(text) = fs::read_to_string(&ck_path) {
        let ck: StreamCheckpoint = serde_json::from_str(&text).context("reading checkpoint")?;
        if ck.config_hash != hash {
            return Err(usage(format!("checkpoint {} belongs to another configuration", ck_path.display())));
        }
        done = ck.fibers_done as usize;
        if done > order.len() || (done > 0 && (order[done - 1].1, order[done - 1].2) != (ck.i, ck.j)) {
            return Err(usage("checkpoint does not match the fiber order"));
        }
        let existing = fs::read_to_string(out_path).unwrap_or_default();
        let kept: Vec<&str> = existing.lines().take(1 + ck.orbits_done as usize).collect();
        if kept.len() != 1 + ck.orbits_done as usize {
            return Err(usage("orbit stream is shorter than its checkpoint"));
        }
        write_atomic(out_path, &(kept.join("\n") + "\n"))?;
        orbits_done = ck.orbits_done;
    } else {
        write_atomic(out_path, &(header_line.clone() + "\n"))?;
    }

    let mut file = fs::OpenOptions::new().append(true).open(out_path)?;
    const BATCH: usize = 256;
    while done < order.len() {
        let end = (done + BATCH).min(order.len());
        let batch: Vec<Vec<OrbitRecord>> = {
            use rayon::prelude::*;
            order[done..end]
                .par_iter()
                .map(|(_, _, _, m)| reduce::orbits_in_fiber(m))
                .collect::<quartic::Result<Vec<_>>>()?
        };
        let mut chunk = String::new();
        for mut recs in batch {
            recs.retain(|o| o.passes(filter) && cls.map_or(true, |c| o.cls == c));
            recs.sort_by_key(|o| o.order_key());
            for o in &recs {
                chunk.push_str(&orbit_line(o));
                chunk.push('\n');
                orbits_done += 1;
            }
        }
        file.write_all(chunk.as_bytes())?;
        file.sync_data()?;
        done = end;
        let last = &order[done - 1];
        let ck = StreamCheckpoint { config_hash: hash.to_string(), i: last.1, j: last.2, fibers_done: done as u64, orbits_done };
        write_atomic(&ck_path, &serde_json::to_string(&ck)?)?;
    }
    let mut summary = header("reduce", hash);
    writeln!(summary, "orbits={orbits_done} fibers={} out={}", order.len(), out_path.display())?;
    Ok(Outcome::ok(summary))
}

fn count_rows_csv(series: &CountSeries, hash: &str) -> String {
    let mut out = header("count-orbits", hash);
    writeln!(out, "# weight={}", series.weight).unwrap();
    out.push_str("X,class,filter,raw,weighted\n");
    for r in &series.rows {
        writeln!(out, "{},{},{},{},{}", r.x, r.class, r.filter, r.raw, r.weighted).unwrap();
    }
    out
}

/// Parse a count-orbits CSV back into rows (comment lines skipped).
pub fn parse_count_csv(text: &str) -> Result<Vec<CountRow>> {
    let mut rows = Vec::new();
    for line in text.lines() {
        if line.starts_with('#') || line.starts_with("X,") || line.trim().is_empty() {
            continue;
        }
        let c: Vec<&str> = line.split(',').collect();
        if c.len() != 5 {
            return Err(usage(format!("bad count row {line:?}")));
        }
        rows.push(CountRow {
            x: c[0].parse().map_err(|_| usage(format!("bad X in {line:?}")))?,
            class: c[1].to_string(),
            filter: c[2].to_string(),
            raw: c[3].parse().map_err(|_| usage(format!("bad count in {line:?}")))?,
            weighted: c[4].to_string(),
        });
    }
    Ok(rows)
}

#[allow(clippy::too_many_arguments)]
fn count_orbits(
    class: &str,
    height: &Option<String>,
    weight: &str,
    filter: &str,
    checkpoints: &Option<String>,
    checkpoint: Option<&Path>,
    cfg: &RunConfig,
    hash: &str,
) -> Result<Outcome> {
    let classes = parse_classes(Some(class))?;
    let phi: Weight = weight.parse().map_err(|e: quartic::QuarticError| usage(e.to_string()))?;
    let filter = parse_filter(filter)?;
    let top = height_arg(height, cfg)?;
    let xs = checkpoint_grid(checkpoints, top, 1000.min(top), 8)?;
    let params = cfg.reduction_params();

    let mut series = CountSeries { weight: phi.to_string(), rows: Vec::new(), config_hash: hash.to_string() };
    let mut done: BTreeSet<u64> = BTreeSet::new();
    if let Some(ck) = checkpoint {
        if let Ok(text) = fs::read_to_string(ck) {
            if !text.lines().next().is_some_and(|l| l.contains(&format!("config_hash={hash}"))) {
                return Err(usage(format!("checkpoint {} belongs to another configuration", ck.display())));
            }
            series.rows = parse_count_csv(&text)?;
            done = series.rows.iter().map(|r| r.x).collect();
        }
    }
    // One height at a time, so an interrupted run keeps every finished height.
    for &x in xs.iter().filter(|x| !done.contains(x)) {
        let s = count::count_orbits(&classes, &[x], &phi, filter, params)?;
        series.rows.extend(s.rows);
        if let Some(ck) = checkpoint {
            write_atomic(ck, &count_rows_csv(&series, hash))?;
        }
    }
    // Rows ordered by class then X, as the library emits them.
    let class_pos = |c: &str| classes.iter().position(|k| k.label() == c).unwrap_or(usize::MAX);
    series.rows.sort_by(|a, b| (class_pos(&a.class), a.x).cmp(&(class_pos(&b.class), b.x)));
    let text = match cfg.output_format {
        Some(OutputFormat::Json) | Some(OutputFormat::Jsonl) => {
            json_text(&json!({"schema": "qc1", "op": "count-orbits", "config_hash": hash, "weight": series.weight, "rows": series.rows})) + "\n"
        }
        _ => count_rows_csv(&series, hash),
    };
    Ok(Outcome::ok(text))
}

fn density_csv(checks: &[DensityCheck], out: &mut String) -> Vec<String> {
    let mut bad = Vec::new();
    for c in checks {
        let k = c.k.map(|k| k.to_string()).unwrap_or_else(|| "-".into());
        writeln!(out, "{},{},{},{},{},{},{}", c.p, c.sigma, c.maximal, k, rational_string(&c.closed), rational_string(&c.brute), c.matches()).unwrap();
        if !c.matches() {
            bad.push(format!("p={} k={} {}{}", c.p, k, c.sigma, if c.maximal { "^max" } else { "" }));
        }
    }
    bad
}

fn verify_density(p: Option<u64>, table: u32, k: &Option<String>, cfg: &RunConfig, hash: &str) -> Result<Outcome> {
    let primes = match p {
        Some(p) => vec![p],
        None => cfg.prime_list.clone(),
    };
    let ks: Vec<u32> = match k {
        Some(s) => parse_list(s).map_err(|e| usage(e.to_string()))?,
        None => vec![0, 1, 2, 3],
    };
    let mut out = header("verify-density", hash);
    out.push_str("p,sigma,maximal,k,closed_form,brute_force,match\n");
    let mut bad = Vec::new();
    for &p in &primes {
        match table {
            1 => bad.extend(density_csv(&localp::verify_splitting_densities(p)?, &mut out)),
            2 => {
                for &k in &ks {
                    bad.extend(density_csv(&localp::verify_slice_densities(p, k)?, &mut out));
                }
            }
            _ => return Err(usage("--table must be 1 or 2")),
        }
    }
    let failure = (!bad.is_empty()).then(|| format!("density mismatch: {}", bad.join("; ")));
    Ok(Outcome { text: out, failure })
}

fn solubility(form: &str, primes: &Option<String>, cfg: &RunConfig, hash: &str) -> Result<Outcome> {
    let f = parse_form(form)?;
    let ps: Vec<u64> = match primes {
        Some(s) => parse_list(s).map_err(|e| usage(e.to_string()))?,
        None => {
            let mut v = vec![2];
            v.extend(cfg.prime_list.iter().copied().filter(|&p| p != 2));
            v
        }
    };
    let mut out = header("solubility", hash);
    out.push_str("p,ell\n");
    writeln!(out, "inf,{}", localp::linf_soluble(&f)? as u8)?;
    for p in ps {
        writeln!(out, "{p},{}", localp::lp_soluble(&f, p)? as u8)?;
    }
    Ok(Outcome::ok(out))
}

fn levels(v: &[u64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn mp(form: &str, p: Option<u64>, hash: &str) -> Result<Outcome> {
    let f = parse_form(form)?;
    let mut out = header("mp", hash);
    out.push_str("p,ell_p,m_levels,m_p\n");
    match p {
        Some(p) => {
            let w = localp::local_weight(&f, p)?;
            writeln!(out, "{},{},{},{}", w.p, w.ell, levels(&w.m_levels), w.m_total)?;
        }
        None => {
            let g = localp::global_weights(&f)?;
            for w in &g.local {
                writeln!(out, "{},{},{},{}", w.p, w.ell, levels(&w.m_levels), w.m_total)?;
            }
            writeln!(out, "all,{},,{}", g.ell, g.m)?;
        }
    }
    Ok(Outcome::ok(out))
}

fn expsum(kind: &ExpsumKind, hash: &str) -> Result<Outcome> {
    let mut out = header("expsum", hash);
    match kind {
        ExpsumKind::Gauss { p, k } => {
            let n = p.checked_pow(*k).ok_or_else(|| usage("p^k too large"))?;
            out.push_str("p,k,a,regime,abs,scaled\n");
            for a in 0..n {
                let q = expsums::gauss_sum(a, *p, *k)?.norm();
                let r = Regime::of_residue(a, *p, *k);
                writeln!(out, "{p},{k},{a},{},{},{}", field(r.label()), sci(q), sci(q * (*p as f64).powf(r.exponent())))?;
            }
        }
        ExpsumKind::Orbital { p, k, f, h, pairing } => {
            let n = p.checked_pow(*k).ok_or_else(|| usage("p^k too large"))?;
            let pairing = match pairing.as_str() {
                "plain" => Pairing::Plain,
                "invariant" => Pairing::Invariant,
                other => return Err(usage(format!("unknown pairing {other:?}"))),
            };
            let fv = parse_residues(f, n)?;
            let hv = parse_residues(h, n)?;
            let g = expsums::orbital_sum(&fv, &hv, *p, *k, pairing)?.norm();
            let r = Regime::of_dual(&hv, *p, *k);
            out.push_str("p,k,f,h,regime,abs,scaled\n");
            let fs = fv.map(|x| x.to_string()).join(",");
            let hs = hv.map(|x| x.to_string()).join(",");
            writeln!(out, "{p},{k},{},{},{},{},{}", field(&fs), field(&hs), field(r.label()), sci(g), sci(g * (*p as f64).powf(r.exponent())))?;
        }
        ExpsumKind::Fourier { p, h } => {
            let n = p.checked_pow(2).ok_or_else(|| usage("p² too large"))?;
            let hv = parse_residues(h, n)?;
            let chi = expsums::chi_disc_p2(*p)?;
            let v = expsums::fourier_point(&chi, &hv)?;
            let r = Regime::of_dual(&hv, *p, 2);
            out.push_str("p,h,regime,re,im,abs\n");
            let hs = hv.map(|x| x.to_string()).join(",");
            writeln!(out, "{p},{},{},{},{},{}", field(&hs), field(r.label()), sci(v.re), sci(v.im), sci(v.norm()))?;
        }
    }
    Ok(Outcome::ok(out))
}

fn periods(i: &str, j: &str, hp: bool, hash: &str) -> Result<Outcome> {
    let i: i64 = i.replace('−', "-").parse().map_err(|_| usage(format!("bad I {i:?}")))?;
    let j: i64 = j.replace('−', "-").parse().map_err(|_| usage(format!("bad J {j:?}")))?;
    let v = if hp { period_report::<HpFloat>(i, j)? } else { period_report::<f64>(i, j)? };
    let mut obj = json!({"schema": "qc1", "op": "periods", "config_hash": hash, "I": i, "J": j});
    obj.as_object_mut().unwrap().extend(v.as_object().unwrap().clone());
    Ok(Outcome::ok(json_text(&obj) + "\n"))
}

fn period_report<R: Real + std::fmt::Display>(i: i64, j: i64) -> Result<Value> {
    let (ri, rj) = (R::from_i64(i), R::from_i64(j));
    let agm = arch::real_period_agm(&ri, &rj)?;
    let quad = arch::real_period_quadrature(&ri, &rj)?;
    let certified = arch::real_period(&ri, &rj)?;
    let tilde = arch::omega_tilde(&ri, &rj)?;
    let (a, q) = (agm.value.to_f64(), quad.value.to_f64());
    Ok(json!({
        "omega": certified.value.to_string(),
        "omega_agm": jf(a),
        "omega_quadrature": jf(q),
        "agreement": jf((a - q).abs() / a.abs()),
        "error_estimate": jf(certified.error_estimate),
        "omega_tilde": tilde.value.to_string(),
    }))
}

fn constants(name: Option<&str>, samples: u64, cfg: &RunConfig, hash: &str) -> Result<Outcome> {
    let names: Vec<ConstantName> = match name {
        None | Some("all") => ConstantName::ALL.to_vec(),
        Some(s) => vec![s.parse().map_err(|e: quartic::QuarticError| usage(e.to_string()))?],
    };
    let cc = ConstantConfig { mc_samples: samples, seed: cfg.rng_seed };
    let mut rows = Vec::new();
    for n in names {
        let r = arch::region_constant(n, cc)?;
        rows.push(json!({
            "name": n.label(),
            "value": jf(r.value),
            "error_estimate": jf(r.error_estimate),
            "method_a": r.method_a,
            "value_a": jf(r.value_a),
            "method_b": r.method_b,
            "value_b": jf(r.value_b),
            "agreement": jf(r.agreement),
        }));
    }
    let obj = json!({"schema": "qc1", "op": "constants", "config_hash": hash, "constants": rows});
    Ok(Outcome::ok(json_text(&obj) + "\n"))
}

fn selmer(height: &Option<String>, sign: &str, checkpoints: &Option<String>, cfg: &RunConfig, hash: &str) -> Result<Outcome> {
    let top = height_arg(height, cfg)?;
    let signs: Vec<bool> = match sign {
        "pos" | "+" => vec![true],
        "neg" | "-" => vec![false],
        "both" => vec![true, false],
        other => return Err(usage(format!("--sign must be pos, neg or both, not {other:?}"))),
    };
    let mut xs: Vec<u64> = match checkpoints {
        Some(_) => checkpoint_grid(checkpoints, top, top, 2)?,
        None => {
            let mut v = Vec::new();
            let mut x = 1000u64;
            while x < top {
                v.push(x);
                x *= 10;
            }
            v.push(top);
            v
        }
    };
    xs.dedup();
    let params = cfg.reduction_params();
    let jsonl = cfg.output_format == Some(OutputFormat::Jsonl);
    let mut out = if jsonl {
        json_text(&json!({"schema": "qc1", "op": "selmer", "config_hash": hash})) + "\n"
    } else {
        header("selmer", hash) + "X,sign,curves,torsion_curves,selmer_total,average\n"
    };
    for positive in signs {
        let (cks, recs) = count::selmer_series(&xs, positive, params)?;
        if jsonl {
            for r in &recs {
                out.push_str(&serde_json::to_string(r)?);
                out.push('\n');
            }
        } else {
            for c in cks {
                writeln!(out, "{},{},{},{},{},{}", c.x, if positive { "+" } else { "-" }, c.curves, c.torsion_curves, c.selmer_total, sci(c.average))?;
            }
        }
    }
    Ok(Outcome::ok(out))
}

fn fit(input: &Path, class: &str, c34: Option<f64>, cfg: &RunConfig, hash: &str) -> Result<Outcome> {
    let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display())).map_err(|e| usage(format!("{e:#}")))?;
    let rows = parse_count_csv(&text)?;
    let cls: SignatureClass = class.parse().map_err(|e: quartic::QuarticError| usage(e.to_string()))?;
    let c34 = match c34 {
        Some(v) => v,
        None => {
            let name = if cls.disc_positive() { ConstantName::C34Pos } else { ConstantName::C34Neg };
            arch::region_constant(name, ConstantConfig { mc_samples: 100_000, seed: cfg.rng_seed })?.value
        }
    };
    let series = CountSeries { weight: String::new(), rows, config_hash: String::new() };
    let r = count::fit_terms(&series, cls, c34)?;
    let table: Vec<Value> = r
        .primary_residuals
        .iter()
        .map(|&(x, res)| {
            let count = res + r.c1_theory * x.powf(5.0 / 6.0);
            json!({
                "X": x as u64,
                "count": count.round() as u64,
                "primary": jf(r.c1_theory * x.powf(5.0 / 6.0)),
                "ratio": jf(count / (r.c1_theory * x.powf(5.0 / 6.0))),
                "residual": jf(res),
                "two_term": jf(r.c1_theory * x.powf(5.0 / 6.0) + r.c2_theory * x.powf(0.75)),
            })
        })
        .collect();
    let obj = json!({
        "schema": "qc1",
        "op": "fit",
        "config_hash": hash,
        "class": r.class,
        "c34": jf(c34),
        "c1_hat": jf(r.c1_hat),
        "c1_theory": jf(r.c1_theory),
        "c2_hat": jf(r.c2_hat),
        "c2_theory": jf(r.c2_theory),
        "residual_exponent": jf(r.residual_exponent),
        "table": table,
    });
    Ok(Outcome::ok(json_text(&obj) + "\n"))
}

/// Fast self-check: the local density tables at p = 3, the discriminant
/// identity on a grid, a period cross-check, the C_{5/6} areas and a small
/// cross-strategy enumeration.
fn verify_all(hash: &str) -> Result<Outcome> {
    let mut out = header("verify-all", hash);
    out.push_str("check,result,detail\n");
    let mut bad = Vec::new();
    let mut record = |name: &str, ok: bool, detail: String| {
        writeln!(out, "{name},{},{}", if ok { "PASS" } else { "FAIL" }, field(&detail)).unwrap();
        if !ok {
            bad.push(name.to_string());
        }
    };

    let t1 = localp::verify_splitting_densities(3)?;
    let n1 = t1.iter().filter(|c| !c.matches()).count();
    record("splitting-densities-p3", n1 == 0, format!("{n1} of {} rows differ", t1.len()));

    let mut n2 = 0;
    let mut rows2 = 0;
    for k in 0..=3 {
        let t = localp::verify_slice_densities(3, k)?;
        rows2 += t.len();
        n2 += t.iter().filter(|c| !c.matches()).count();
    }
    record("slice-densities-p3", n2 == 0, format!("{n2} of {rows2} rows differ"));

    let mut n3 = 0;
    let mut total3 = 0;
    for a in -2i128..=2 {
        for b in -2..=2 {
            for c in -2..=2 {
                for d in -2..=2 {
                    for e in -2..=2 {
                        let f = Form::new(a, b, c, d, e);
                        let ij = f.invariants()?;
                        total3 += 1;
                        if num_rational::Ratio::from_integer(f.disc_direct()?) != ij.delta {
                            n3 += 1;
                        }
                    }
                }
            }
        }
    }
    record("discriminant-identity", n3 == 0, format!("{n3} of {total3} forms differ"));

    let agm = arch::real_period_agm(&3.0f64, &0.0)?.value;
    let quad = arch::real_period_quadrature(&3.0f64, &0.0)?.value;
    let rel = (agm - quad).abs() / agm;
    record("period-agm-vs-quadrature", rel <= 1e-9, format!("{} vs {} rel {}", sci(agm), sci(quad), sci(rel)));

    let cp = arch::region_constant(ConstantName::C56Pos, ConstantConfig::default())?;
    let cn = arch::region_constant(ConstantName::C56Neg, ConstantConfig::default())?;
    let ok = (cp.value - 1.6).abs() < 1e-6 && (cn.value - 6.4).abs() < 1e-6 && cp.agreement < 1e-6 && cn.agreement < 1e-6;
    record("c56-areas", ok, format!("{} {}", sci(cp.value), sci(cn.value)));

    let params = quartic::reduce::ReductionParams::default();
    let a = reduce::enumerate_orbits(None, 2000, OrbitFilter::All, params)?;
    let b = reduce::enumerate_orbits_box(None, 2000, OrbitFilter::All, 12)?;
    record("cross-strategy-2000", a == b, format!("{} vs {} orbits", a.len(), b.len()));

    let failure = (!bad.is_empty()).then(|| format!("failed checks: {}", bad.join(", ")));
    Ok(Outcome { text: out, failure })
}
