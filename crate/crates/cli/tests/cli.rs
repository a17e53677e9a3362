use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn quartic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quartic")).args(args).env_remove("QUARTIC_CACHE").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

/// Output without the header lines that carry the config hash.
fn body(text: &str) -> Vec<String> {
    text.lines().filter(|l| !l.starts_with('#') && !l.contains("\"schema\"")).map(str::to_string).collect()
}

#[test]
fn invariants_example() {
    let o = quartic(&["invariants", "--form", "1,0,0,1,1"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.starts_with("# schema=qc1 op=invariants config_hash="));
    assert!(text.contains("I=12 J=-27 disc=229 height=1728 class=2+ irreducible=true generic=true"), "{text}");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&quartic(&["invariants", "--form", "1,2,3"])), 2);
    assert_eq!(code(&quartic(&["no-such-command"])), 2);
    assert_eq!(code(&quartic(&["periods", "--i", "0", "--j", "0"])), 2);
    assert_eq!(code(&quartic(&["count-orbits", "--weight", "bogus", "--height", "100"])), 2);
}

#[test]
fn budget_errors_exit_3() {
    let o = quartic(&["expsum", "orbital", "--p", "13", "--k", "3", "--f", "1,0,0,1,1", "--h", "1,0,0,0,0"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn splitting_table_verifies() {
    let o = quartic(&["verify-density", "--p", "5", "--table", "1"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("p,sigma,maximal,k,closed_form,brute_force,match"));
    assert_eq!(body(&text).iter().filter(|l| l.ends_with(",true")).count(), 12);
}

#[test]
fn slice_table_reports_its_one_mismatch() {
    let o = quartic(&["verify-density", "--p", "3", "--table", "2"]);
    assert_eq!(code(&o), 1);
    let rows = body(&stdout(&o));
    let bad: Vec<&String> = rows.iter().filter(|l| l.ends_with(",false")).collect();
    assert_eq!(bad, vec!["3,(1^22),true,0,4/81,2/27,false"]);
    assert_eq!(rows.len(), 1 + 4 * 14);
}

#[test]
fn cache_hits_and_self_audit() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let args = ["--cache-dir", d, "solubility", "--form", "3,0,0,0,3"];
    let first = quartic(&args);
    assert_eq!(code(&first), 0);
    let entries: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(entries.len(), 1);
    assert_eq!(stdout(&quartic(&args)), stdout(&first));

    let mut audit = args.to_vec();
    audit.insert(0, "--no-cache");
    assert_eq!(code(&quartic(&audit)), 0);

    // A tampered cache entry is served on a hit but caught by the audit.
    fs::write(&entries[0], "tampered\n").unwrap();
    assert_eq!(stdout(&quartic(&args)), "tampered\n");
    assert_eq!(code(&quartic(&audit)), 1);
}

#[test]
fn cache_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_quartic"))
        .args(["mp", "--form", "1,0,0,0,9", "--p", "3"])
        .env("QUARTIC_CACHE", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn config_file_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "# test\nheight_bound = 2000\nbox_constant=4\n").unwrap();
    let c = cfg.to_str().unwrap();
    let a = quartic(&["--config", c, "count-orbits", "--checkpoints", "500,2000"]);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    // A flag overrides the file.
    let b = quartic(&["--config", c, "count-orbits", "--checkpoints", "500,2000", "--box-constant", "2"]);
    let cfg2 = dir.path().join("run2.conf");
    fs::write(&cfg2, "height_bound = 2000\nbox_constant=2\n").unwrap();
    let b2 = quartic(&["--config", cfg2.to_str().unwrap(), "count-orbits", "--checkpoints", "500,2000"]);
    assert_eq!(stdout(&b), stdout(&b2));
    assert_ne!(stdout(&a).lines().next(), stdout(&b).lines().next());
    // Enlarging the reduced sets beyond the calibrated size changes nothing.
    assert_eq!(body(&stdout(&a)), body(&stdout(&b)));

    fs::write(&cfg, "neighbourhood = 3\n").unwrap();
    assert_eq!(code(&quartic(&["--config", c, "invariants", "--form", "1,0,0,1,1"])), 2);
}

#[test]
fn thread_count_does_not_change_results() {
    let args = ["count-orbits", "--height", "5000", "--checkpoints", "1000,5000", "--filter", "all"];
    let one = quartic(&[&["--threads", "1"][..], &args[..]].concat());
    let many = quartic(&[&["--threads", "4"][..], &args[..]].concat());
    assert_eq!(code(&one), 0);
    assert_eq!(stdout(&one), stdout(&many));
}

#[test]
fn count_orbits_resumes_from_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("counts.csv");
    let c = ck.to_str().unwrap();
    let args = ["count-orbits", "--height", "5000", "--checkpoints", "500,1000,2000,5000", "--checkpoint", c];
    let full = quartic(&args);
    assert_eq!(code(&full), 0);

    // Keep the header and the first two finished heights, as if interrupted.
    let text = fs::read_to_string(&ck).unwrap();
    let kept: Vec<&str> = text.lines().take(3 + 2 * 4).collect();
    fs::write(&ck, kept.join("\n") + "\n").unwrap();
    let resumed = quartic(&args);
    assert_eq!(stdout(&resumed), stdout(&full));

    // A checkpoint from another configuration is refused.
    let other = quartic(&["count-orbits", "--height", "5000", "--checkpoints", "500,1000,2000,5000", "--checkpoint", c, "--filter", "all"]);
    assert_eq!(code(&other), 2);
}

fn fiber_of(line: &str) -> (i64, i64) {
    let v: serde_json::Value = serde_json::from_str(line).unwrap();
    (v["I"].as_i64().unwrap(), v["J"].as_i64().unwrap())
}

#[test]
fn orbit_stream_resumes_from_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("orbits.jsonl");
    let o = out.to_str().unwrap();
    assert_eq!(code(&quartic(&["reduce", "--height", "3000", "--out", o])), 0);
    let full = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = full.lines().collect();
    let ck_path = Path::new(o).with_extension("checkpoint");
    let ck: serde_json::Value = serde_json::from_str(&fs::read_to_string(&ck_path).unwrap()).unwrap();
    let hash = ck["config_hash"].as_str().unwrap().to_string();

    // Same orbits as the in-memory listing.
    let listed = stdout(&quartic(&["reduce", "--height", "3000"]));
    assert_eq!(body(&listed), body(&full));

    // Rewind to the end of the 100th fiber and leave a torn record behind.
    let mut fibers = 0;
    let mut cut = 0;
    let mut last = (0, 0);
    for (n, l) in lines.iter().enumerate().skip(1) {
        let f = fiber_of(l);
        if f != last {
            if fibers == 100 {
                cut = n;
                break;
            }
            fibers += 1;
            last = f;
        }
    }
    assert!(cut > 0);
    let partial = lines[..cut].join("\n") + "\n{\"a\":1,\"b\"";
    fs::write(&out, partial).unwrap();
    let ck = serde_json::json!({"config_hash": hash, "I": last.0, "J": last.1, "fibers_done": 100, "orbits_done": cut - 1});
    fs::write(&ck_path, ck.to_string()).unwrap();
    assert_eq!(code(&quartic(&["reduce", "--height", "3000", "--out", o])), 0);
    assert_eq!(fs::read_to_string(&out).unwrap(), full);
}

#[test]
fn constants_report_both_methods() {
    let o = quartic(&["constants", "--name", "C56_neg"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    let c = &v["constants"][0];
    assert_eq!(c["name"], "C56_neg");
    assert!((c["value"].as_f64().unwrap() - 6.4).abs() < 1e-12);
    assert!(c["agreement"].as_f64().unwrap() < 1e-9);
    assert_eq!(c["method_a"], "exact-area");
}

#[test]
fn fit_reads_count_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("c.csv");
    let o = quartic(&["count-orbits", "--class", "1", "--height", "1e5", "--checkpoints", "1000,2000,5000,10000,20000,40000,70000,100000"]);
    fs::write(&csv, stdout(&o)).unwrap();
    let f = quartic(&["fit", "--input", csv.to_str().unwrap(), "--class", "1", "--c34", "72.38124"]);
    assert_eq!(code(&f), 0, "{}", String::from_utf8_lossy(&f.stderr));
    let v: serde_json::Value = serde_json::from_str(stdout(&f).trim()).unwrap();
    assert_eq!(v["table"].as_array().unwrap().len(), 8);
    assert!(v["c2_theory"].as_f64().unwrap() < 0.0);

    // Too few checkpoints is a usage problem, not a crash.
    let o = quartic(&["count-orbits", "--class", "1", "--height", "1000", "--checkpoints", "100,1000"]);
    fs::write(&csv, stdout(&o)).unwrap();
    assert_ne!(code(&quartic(&["fit", "--input", csv.to_str().unwrap(), "--class", "1", "--c34", "72.38124"])), 0);
}

#[test]
fn selmer_sizes_are_powers_of_two() {
    let o = quartic(&["--format", "jsonl", "selmer", "--height", "3000", "--sign", "both"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut n = 0;
    for l in body(&text) {
        let v: serde_json::Value = serde_json::from_str(&l).unwrap();
        let s = v["sel2"].as_u64().expect("integral Selmer size");
        assert!(s >= 1 && s.is_power_of_two(), "{l}");
        n += 1;
    }
    assert!(n > 20);
}

#[test]
fn periods_in_high_precision() {
    let o = quartic(&["periods", "--i", "3", "--j", "0", "--high-precision"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("\"omega\":\"5.244115108584239620929679179782238827365"));
}
