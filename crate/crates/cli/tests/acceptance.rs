//! The acceptance criteria, one line each. Most checks drive the binary and
//! compare its reports against oracles from `malle-testkit`.

use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use malle_core::counting::{compose_disc, DiscMode, WildTable};
use malle_core::fields::{parse_field_file, FieldList};
use malle_core::permgroup::{product_index_coprime, product_index_general, CycleType};
use malle_testkit::{cubic, cyclic, perms};
use num_bigint::BigUint;
use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
}

fn lab(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_malle-lab")).args(args).output().expect("binary runs");
    Run { code: out.status.code().unwrap_or(-1), stdout: String::from_utf8(out.stdout).unwrap() }
}

fn lab_json(args: &[&str]) -> (i32, Value) {
    let run = lab(args);
    let v: Value = serde_json::from_str(&run.stdout).unwrap_or(Value::Null);
    (run.code, v["result"].clone())
}

fn read_list(path: &Path) -> FieldList {
    parse_field_file(std::io::BufReader::new(std::fs::File::open(path).unwrap())).unwrap()
}

fn schemes() -> String {
    concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/schemes/").to_string()
}

type Outcome = (bool, String);

fn tame_tables() -> Outcome {
    let mut rows = 0;
    for l in [3, 5, 7] {
        for k in [1, 2] {
            let run = lab(&["tame-table", "--l", &l.to_string(), "--k", &k.to_string(), "--format", "csv"]);
            if run.code != 0 {
                return (false, format!("l={l} k={k} exit {}", run.code));
            }
            for line in run.stdout.lines().filter(|s| !s.starts_with('#')).skip(1) {
                // class,r,a_cycle_type,a_index,exponent,...; the cycle type is quoted
                let cells: Vec<&str> = line.rsplitn(4, ',').collect();
                let exponent: u64 = cells[2].parse().unwrap();
                let head: Vec<&str> = cells[3].splitn(3, ',').collect();
                let (class, r): (&str, u32) = (head[0], head[1].parse().unwrap());
                let lk = (l as u64).pow(k);
                let lr = (l as u64).pow(r);
                // closed forms written out independently of the library
                let want = match (l, class) {
                    (3, "(12)") => 3 * lk - 2 * lr,
                    (3, _) => 3 * lk - 3 * lr,
                    (_, "(12)") => 3 * lk - 2 * lr,
                    _ => 3 * lk - lr,
                };
                if exponent != want {
                    return (false, format!("l={l} k={k} {class} r={r}: {exponent} != {want}"));
                }
                rows += 1;
            }
        }
    }
    (rows > 0, format!("{rows} rows match"))
}

fn index_formula() -> Outcome {
    let ct = |p: &[u32]| CycleType::new(p.to_vec()).unwrap();
    let (mut pairs, mut coprime) = (0, 0);
    for m in 1..=6 {
        for n in 1..=6 {
            for a in perms::partitions(m) {
                for b in perms::partitions(n) {
                    let embedded = perms::product_index(&a, &b) as u64;
                    if product_index_general(&ct(&a), &ct(&b)) != embedded {
                        return (false, format!("{a:?} x {b:?}"));
                    }
                    if let Ok(v) = product_index_coprime(&ct(&a), &ct(&b)) {
                        if v != embedded {
                            return (false, format!("coprime {a:?} x {b:?}"));
                        }
                        coprime += 1;
                    }
                    pairs += 1;
                }
            }
        }
    }
    (pairs == 29 * 29, format!("{pairs} pairs, {coprime} in the coprime domain"))
}

fn malle_invariants() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for (group, deg, order, a) in [("S3xC3", 9, 18, 3), ("S5xC7", 35, 840, 7)] {
        let (code, r) = lab_json(&["invariants", "--group", group]);
        let got = (r["degree"].as_u64(), r["order"].as_u64(), r["a"].as_u64(), r["b"].as_u64());
        ok &= code == 0 && got == (Some(deg), Some(order), Some(a), Some(1));
        details.push(format!("{group}: a={:?} b={:?}", got.2, got.3));
    }
    (ok, details.join(", "))
}

fn lemma_verifiers() -> Outcome {
    let (code, r) = lab_json(&["verify-lemmas", "--all"]);
    let cases = r["cases"].as_array().map_or(0, Vec::len);
    let (zcode, z) = lab_json(&["verify-lemmas", "--all", "--rk", "zeroed"]);
    let witnesses: usize = z["cases"]
        .as_array()
        .map_or(0, |cs| cs.iter().map(|c| c["unin"]["violations"].as_array().map_or(0, Vec::len)).sum());
    let ok = code == 0 && r["passed"] == true && cases > 0 && zcode == 1 && witnesses > 0;
    (ok, format!("{cases} cases pass; zeroed r_k gives {witnesses} witnesses"))
}

fn convolution_constants() -> Outcome {
    let (c1, r1) = lab_json(&["convolve", "--x", "1e8", "--tolerance", "0.02"]);
    let (c2, r2) = lab_json(&["convolve", "--b", "2", "--x", "1e8", "--tolerance", "0.01"]);
    let coef1 = r1["fit"]["coefficient"].as_f64().unwrap_or(f64::NAN);
    let coef2 = r2["fit"]["coefficient"].as_f64().unwrap_or(f64::NAN);
    let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
    let ok = c1 == 0
        && c2 == 0
        && r1["prediction"]["logpower"] == 1
        && (coef1 - 1.0).abs() <= 0.02
        && (coef2 / zeta2 - 1.0).abs() <= 0.01
        && coef2 <= 2.0
        && r2["bound"]["coefficient"].as_f64() == Some(2.0);
    (ok, format!("X ln X coefficient {coef1:.4}; X coefficient {coef2:.4} vs zeta(2) {zeta2:.4}, bound 2"))
}

fn field_oracles(dir: &Path) -> Outcome {
    let c3 = dir.join("c3_1e8.jsonl");
    let cub = dir.join("cubic_1e4.jsonl");
    let e1 = lab(&["enumerate-cyclic", "--l", "3", "--x", "1e8", "--out", c3.to_str().unwrap()]).code;
    let e2 = lab(&["enumerate-cubic", "--x", "1e4", "--out", cub.to_str().unwrap()]).code;
    if e1 != 0 || e2 != 0 {
        return (false, format!("exit codes {e1}, {e2}"));
    }
    let ours: Vec<u64> = read_list(&c3).records.iter().map(|r| r.abs_disc()).collect();
    let oracle = cyclic::cyclic_discriminants(3, 100_000_000);
    let cubic_ours: Vec<i64> = read_list(&cub).records.iter().map(|r| r.disc).collect();
    let cubic_oracle = cubic::cubic_discriminants(10_000);
    let ok = ours == oracle && cubic_ours == cubic_oracle && cubic_ours.first() == Some(&-23);
    (ok, format!("{} cyclic cubic fields, {} cubic fields, first disc {:?}", ours.len(), cubic_ours.len(), cubic_ours.first()))
}

fn abelian_uniformity(dir: &Path) -> Outcome {
    let c3 = dir.join("c3_1e8.jsonl");
    let fields_arg = c3.to_str().unwrap();
    let (code, r) = lab_json(&[
        "abelian-uniformity", "--l", "3", "--x", "1e8", "--q", "7,13,19,31,37,43,91", "--fields", fields_arg,
    ]);
    let ratios: Vec<f64> = r["rows"]
        .as_array()
        .map_or(vec![], |rows| rows.iter().filter(|x| x["q"] != 1).filter_map(|x| x["ratio"].as_f64()).collect());
    let max = ratios.iter().copied().fold(0.0, f64::max);
    (code == 0 && r["bounded"] == true && ratios.len() == 7, format!("max N_q/(X/q)^(1/2) = {max:.4} over 7 moduli"))
}

fn pair_counting(dir: &Path) -> Outcome {
    let s = dir.join("cubic_1e4.jsonl");
    let a = dir.join("c3_1e4.jsonl");
    lab(&["enumerate-cyclic", "--l", "3", "--x", "1e4", "--out", a.to_str().unwrap()]);
    let (code, r) = lab_json(&[
        "count-pairs", "--s-fields", s.to_str().unwrap(), "--a-fields", a.to_str().unwrap(), "--x", "1e12",
        "--steps", "10",
    ]);
    if code != 0 {
        return (false, format!("exit {code}"));
    }
    let (ks, ls) = (read_list(&s), read_list(&a));
    let mut discs = Vec::new();
    for k in &ks.records {
        for l in &ls.records {
            discs.push(compose_disc(k, l, &WildTable::new(), DiscMode::Interval).unwrap());
        }
    }
    let rows = r["rows"].as_array().cloned().unwrap_or_default();
    for row in &rows {
        let x = row["x"].as_u64().unwrap();
        let xb = BigUint::from(x);
        let lo = discs.iter().filter(|d| d.hi <= xb).count() as u64;
        let hi = discs.iter().filter(|d| d.lo <= xb).count() as u64;
        let (n_lo, n_hi) = (row["n_lo"].as_u64().unwrap(), row["n_hi"].as_u64().unwrap());
        if (n_lo, n_hi) != (lo, hi) || n_lo > n_hi {
            return (false, format!("X = {x}: ({n_lo}, {n_hi}) vs brute force ({lo}, {hi})"));
        }
    }
    let spread = &r["spread_lo"];
    let ok = r["truncation_below_full"] == true && r["monotone_in_y"] == true && spread["bounded"] == true;
    let top = rows.last().map_or(0, |row| row["n_lo"].as_u64().unwrap_or(0));
    (
        ok,
        format!(
            "{} grid points match brute force, N(1e12) = {top}; top-decade N/X^(1/3) max {:.3} vs median {:.3}",
            rows.len(),
            spread["max_ratio"].as_f64().unwrap_or(f64::NAN),
            spread["median_ratio"].as_f64().unwrap_or(f64::NAN)
        ),
    )
}

fn euler_constant() -> Outcome {
    let (code, r) = lab_json(&["euler-constant", "--p-max", "1e6"]);
    let c3 = 3058.0 / 243.0 + 4.0 * 3f64.powf(4.0 / 3.0);
    let change = r["product"]["doubling_change"].as_f64().unwrap_or(f64::NAN);
    let value = r["product"]["value"].as_f64().unwrap_or(f64::NAN);
    let ok = code == 0 && (c3 - 29.8914).abs() <= 1e-4 && r["c3_closed_form"].as_f64() == Some(c3) && change < 1e-4;
    (ok, format!("c3 = {c3:.6}, product {value:.6}, doubling change {change:.2e}"))
}

fn sieve_experiments() -> Outcome {
    let dir = schemes();
    let mut notes = Vec::new();
    let mut ok = true;
    for (file, n, k) in [("line_a2.json", 2usize, 1usize), ("line_a3.json", 3, 2), ("line_a4.json", 4, 3)] {
        let range = format!("{}:{}", -(k as f64) - 0.1, -(k as f64) + 0.1);
        let (code, r) = lab_json(&[
            "sieve-exp", "--scheme", &format!("{dir}{file}"), "--r", "10,100,1000", "--q", "primes:50",
            "--expect-q-exponent", &range,
        ]);
        let report = &r["report"];
        let cells = report["cells"].as_array().cloned().unwrap_or_default();
        // first k coordinates vanish: those contribute 2⌊r/q⌋+1, the rest 2r+1
        let exact = !cells.is_empty()
            && cells.iter().all(|c| {
                let rr = c["r"][0].as_f64().unwrap() as u64;
                let q = c["q"].as_u64().unwrap();
                let want = (2 * (rr / q) + 1).pow(k as u32) * (2 * rr + 1).pow((n - k) as u32);
                c["count"].as_u64() == Some(want)
            });
        ok &= code == 0 && exact && r["crt_exact"] == true;
        notes.push(format!("codim {k} slope {:.3}", report["q_exponent"].as_f64().unwrap_or(f64::NAN)));
    }
    let (code, r) = lab_json(&[
        "sieve-exp", "--scheme", &format!("{dir}disc_cubic.json"), "--r", "10,100,1000", "--q", "primes:50",
        "--expect-q-exponent", "-1.3:-0.8",
    ]);
    ok &= code == 0 && r["crt_exact"] == true;
    notes.push(format!("discriminant locus slope {:.3}", r["report"]["q_exponent"].as_f64().unwrap_or(f64::NAN)));
    (ok, notes.join(", "))
}

#[test]
fn acceptance_criteria() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let criteria: Vec<(&str, u64, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("tame exponent tables", 1, Box::new(tame_tables)),
        ("index formula vs embedding", 10, Box::new(index_formula)),
        ("Malle invariants", 30, Box::new(malle_invariants)),
        ("lemma verifiers", 10, Box::new(lemma_verifiers)),
        ("convolution constants", 60, Box::new(convolution_constants)),
        ("field enumeration oracles", 300, Box::new(|| field_oracles(dir))),
        ("abelian uniformity", 300, Box::new(|| abelian_uniformity(dir))),
        ("compositum counting coherence", 600, Box::new(|| pair_counting(dir))),
        ("Euler constant", 30, Box::new(euler_constant)),
        ("sieve experiments", 300, Box::new(sieve_experiments)),
    ];
    let mut failed = Vec::new();
    let mut out = std::io::stdout().lock();
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = check();
        let took = start.elapsed();
        // the tame tables run six processes; allow for process start-up
        let within = took <= Duration::from_secs(*limit) + Duration::from_millis(if i == 0 { 500 } else { 0 });
        let pass = ok && within;
        if !pass {
            failed.push(i + 1);
        }
        let verdict = if pass { "PASS" } else { "FAIL" };
        let line = format!("criterion {:>2} {verdict} {name}: {detail} [{:.2}s, limit {limit}s]\n", i + 1, took.as_secs_f64());
        // bypass the test harness capture so the lines land in the log
        out.write_all(line.as_bytes()).unwrap();
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
