use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dgft::generators;
use dgft::DiGraph;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tempfile::TempDir;

const PAW: &str = "a\tb\t1\nb\ta\t1\nb\tc\t1\nc\tb\t1\na\tc\t1\nc\ta\t1\nc\td\t1\nd\tc\t1\n";

fn dgft(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dgft")).args(args).env("DGFT_THREADS", "1").output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = dgft(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn code(args: &[&str]) -> i32 {
    dgft(args).status.code().expect("exit code")
}

fn file(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn tsv(g: &DiGraph) -> String {
    g.edges().iter().map(|e| format!("v{}\tv{}\t{}\n", e.src, e.dst, e.weight)).collect()
}

fn json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn laplacian_basis_of_paw() {
    let d = TempDir::new().unwrap();
    let g = file(&d, "paw.tsv", PAW);
    let out = d.path().join("b.json");
    ok(&["basis", "laplacian", "--graph", s(&g), "--out", s(&out)]);
    let f = floats(&json(&out)["frequencies"]);
    for (a, b) in f.iter().zip([0.0, 1.0, 3.0, 4.0]) {
        assert!((a - b).abs() < 1e-8, "{f:?}");
    }
}

#[test]
fn greedy_basis_on_ten_nodes() {
    let d = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let g = file(&d, "g.tsv", &tsv(&generators::weakly_connected(10, 0.2, &mut rng)));
    let out = d.path().join("b.json");
    ok(&["basis", "greedy", "--graph", s(&g), "--out", s(&out)]);
    let v = json(&out);
    let f = floats(&v["frequencies"]);
    assert_eq!(f.len(), 10);
    assert!(f[0].abs() < 1e-12);
    assert!(f.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(v["method_tag"], "greedy");

    let exact = d.path().join("e.json");
    ok(&["basis", "greedy", "--exact", "--graph", s(&g), "--out", s(&exact)]);
    let ve = json(&exact);
    assert!(ve["config"]["delta"].as_f64().unwrap() <= v["config"]["delta"].as_f64().unwrap() + 1e-12);
}

#[test]
fn feasible_basis_is_deterministic() {
    let d = TempDir::new().unwrap();
    let g = file(&d, "paw.tsv", PAW);
    let (a, b) = (d.path().join("a.json"), d.path().join("b.json"));
    let trace = d.path().join("trace.csv");
    let args = ["--restarts", "100", "--lambda", "1e3", "--seed", "7"];
    let mut first = vec!["basis", "feasible", "--graph", s(&g), "--out", s(&a), "--trace", s(&trace)];
    first.extend(args);
    let out = ok(&first);
    assert!(String::from_utf8_lossy(&out.stderr).contains("iterations="));
    let mut second = vec!["basis", "feasible", "--graph", s(&g), "--out", s(&b)];
    second.extend(args);
    ok(&second);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let t = fs::read_to_string(&trace).unwrap();
    assert!(t.starts_with("restart,iteration,objective,tau"));

    let v = json(&a);
    assert_eq!(v["config"]["seed"], 7);
    let f = floats(&v["frequencies"]);
    for (x, y) in f.iter().zip([0.0, 4.0 / 3.0, 8.0 / 3.0, 4.0]) {
        assert!((x - y).abs() < 5e-2, "{f:?}");
    }
}

#[test]
fn basis_file_round_trips() {
    let d = TempDir::new().unwrap();
    let g = file(&d, "paw.tsv", PAW);
    let out = d.path().join("b.json");
    ok(&["basis", "greedy", "--graph", s(&g), "--out", s(&out)]);
    let text = fs::read_to_string(&out).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    let again: Value = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(v, again);
    assert!(text.ends_with("}\n"));
    // every stored float parses back bit-exactly from its own text
    for col in v["columns"].as_array().unwrap() {
        for x in col.as_array().unwrap() {
            let f = x.as_f64().unwrap();
            assert_eq!(serde_json::to_string(&f).unwrap().parse::<f64>().unwrap().to_bits(), f.to_bits());
        }
    }
}

#[test]
fn corrupted_basis_rejected_on_load() {
    let d = TempDir::new().unwrap();
    let g = file(&d, "paw.tsv", PAW);
    let out = d.path().join("b.json");
    ok(&["basis", "laplacian", "--graph", s(&g), "--out", s(&out)]);
    let mut v = json(&out);
    v["columns"][0][0] = Value::from(0.9);
    fs::write(&out, serde_json::to_string(&v).unwrap()).unwrap();
    let sig = file(&d, "x.csv", "a,1\nb,2\nc,3\nd,4\n");
    let den = d.path().join("d.csv");
    let args = ["denoise", "--graph", s(&g), "--signal", s(&sig), "--basis", s(&out), "--sigma", "1", "--out", s(&den)];
    assert_eq!(code(&args), 2);
}

#[test]
fn fmax_methods() {
    let d = TempDir::new().unwrap();
    let path = file(&d, "p.tsv", "a\tb\t1\nb\tc\t3\nc\td\t2\n");
    let out = ok(&["fmax", "--graph", s(&path), "--method", "analytic", "--json"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["value"].as_f64().unwrap(), 6.0);
    assert_eq!(v["kind"], "analytic");

    let out = ok(&["fmax", "--graph", s(&path), "--method", "feasible", "--restarts", "100", "--json"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["value"].as_f64().unwrap() - 6.0).abs() < 1e-4);
    assert_eq!(v["witness"].as_array().unwrap().len(), 4);

    let out = ok(&["fmax", "--graph", s(&path), "--method", "bound"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("no witness"));

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let b = file(&d, "b.tsv", &tsv(&generators::unidirectional_bipartite(3, 4, 0.4, &mut rng)));
    let val = |m: &str| {
        let out = ok(&["fmax", "--graph", s(&b), "--method", m, "--json"]);
        serde_json::from_slice::<Value>(&out.stdout).unwrap()["value"].as_f64().unwrap()
    };
    assert!((val("bound") - val("approx")).abs() < 1e-9);

    let paw = file(&d, "paw.tsv", PAW);
    assert_eq!(code(&["fmax", "--graph", s(&paw), "--method", "analytic"]), 3);
}

fn compare_rows(p: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(p).unwrap().records().map(Result::unwrap).collect()
}

#[test]
fn compare_deduplicates_and_reports_failures() {
    let d = TempDir::new().unwrap();
    // a -> b -> c is not strongly connected, so chung fails
    let g = file(&d, "g.tsv", "a\tb\t1\nb\tc\t2\n");
    let out = d.path().join("c.csv");
    let res = dgft(&["compare", "--graph", s(&g), "--methods", "greedy,laplacian,greedy,chung", "--out", s(&out)]);
    assert!(res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("more than once"));
    let rows = compare_rows(&out);
    assert_eq!(rows.iter().filter(|r| &r[0] == "greedy").count(), 3);
    assert_eq!(rows.iter().filter(|r| &r[0] == "laplacian").count(), 3);
    let chung: Vec<_> = rows.iter().filter(|r| &r[0] == "chung").collect();
    assert_eq!(chung.len(), 1);
    assert!(chung[0][6].starts_with("error"));

    assert_eq!(code(&["compare", "--graph", s(&g), "--method", "chung", "--out", s(&out)]), 3);
}

#[test]
fn compare_single_method_matches_basis() {
    let d = TempDir::new().unwrap();
    let g = file(&d, "paw.tsv", PAW);
    let out = d.path().join("c.csv");
    let b = d.path().join("b.json");
    ok(&["compare", "--graph", s(&g), "--methods", "greedy", "--out", s(&out)]);
    ok(&["basis", "greedy", "--graph", s(&g), "--out", s(&b)]);
    let f = floats(&json(&b)["frequencies"]);
    let rows = compare_rows(&out);
    for (r, v) in rows.iter().zip(&f) {
        assert_eq!(r[2].parse::<f64>().unwrap(), *v);
        assert_eq!(r[4].parse::<f64>().unwrap(), json(&b)["dispersion_rescaled"].as_f64().unwrap());
    }
}

#[test]
fn compare_greedy_beats_laplacian_on_average() {
    let d = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let (mut sg, mut sl) = (0.0, 0.0);
    for i in 0..20 {
        let g = file(&d, &format!("g{i}.tsv"), &tsv(&generators::weakly_connected(12, 0.3, &mut rng)));
        let out = d.path().join(format!("c{i}.csv"));
        ok(&["compare", "--graph", s(&g), "--methods", "greedy,laplacian", "--out", s(&out)]);
        for r in compare_rows(&out).iter().filter(|r| &r[1] == "0") {
            let disp: f64 = r[4].parse().unwrap();
            if &r[0] == "greedy" {
                sg += disp
            } else {
                sl += disp
            }
        }
    }
    assert!(sg < sl, "greedy {sg} vs laplacian {sl}");
}

fn bandlimited_fixture(d: &TempDir) -> (PathBuf, PathBuf, PathBuf) {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let g = generators::weakly_connected(12, 0.3, &mut rng);
    let gp = file(d, "g.tsv", &tsv(&g));
    let bp = d.path().join("b.json");
    ok(&["basis", "greedy", "--graph", s(&gp), "--out", s(&bp)]);
    let v = json(&bp);
    let labels: Vec<String> = v["labels"].as_array().unwrap().iter().map(|l| l.as_str().unwrap().to_string()).collect();
    let cols: Vec<Vec<f64>> = v["columns"].as_array().unwrap().iter().map(floats).collect();
    let coef = [6.0, -5.0, 4.0];
    let text: String = (0..labels.len())
        .map(|i| format!("{},{}\n", labels[i], (0..3).map(|k| coef[k] * cols[k][i]).sum::<f64>()))
        .collect();
    let sp = file(d, "x.csv", &format!("label,value\n{text}"));
    (gp, bp, sp)
}

#[test]
fn denoise_reports() {
    let d = TempDir::new().unwrap();
    let (g, b, x) = bandlimited_fixture(&d);
    let (o1, o2) = (d.path().join("d1.csv"), d.path().join("d2.csv"));
    let spectra = d.path().join("s.csv");
    let base = ["denoise", "--graph", s(&g), "--signal", s(&x), "--basis", s(&b), "--trials", "300", "--seed", "3"];
    let mut a1 = base.to_vec();
    a1.extend(["--sigma", "0.5", "--out", s(&o1), "--emit-spectra", s(&spectra)]);
    ok(&a1);
    let mut a2 = base.to_vec();
    a2.extend(["--sigma", "0.5", "--out", s(&o2)]);
    ok(&a2);
    assert_eq!(fs::read(&o1).unwrap(), fs::read(&o2).unwrap());

    let rows = compare_rows(&o1);
    assert_eq!(rows.len(), 12);
    let best = rows.iter().min_by(|a, b| a[1].parse::<f64>().unwrap().total_cmp(&b[1].parse().unwrap())).unwrap();
    let w: usize = best[0].parse().unwrap();
    assert!((2..=4).contains(&w), "best window {w}");

    let sp = compare_rows(&spectra);
    assert_eq!(sp.len(), 12);
    assert!((sp[11][3].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);

    let o3 = d.path().join("d3.csv");
    let mut a3 = base.to_vec();
    a3.extend(["--sigma", "0", "--windows", "1,3,12", "--out", s(&o3)]);
    ok(&a3);
    let rows = compare_rows(&o3);
    assert_eq!(&rows[0][4], "noiseless");
    assert_eq!(&rows[1][4], "exact_recovery");
    assert_eq!(&rows[2][4], "exact_recovery");
}

#[test]
fn denoise_dimension_mismatch() {
    let d = TempDir::new().unwrap();
    let (g, b, _) = bandlimited_fixture(&d);
    let short = file(&d, "short.csv", "v0,1\n");
    let out = d.path().join("o.csv");
    assert_eq!(code(&["denoise", "--graph", s(&g), "--signal", s(&short), "--basis", s(&b), "--sigma", "1", "--out", s(&out)]), 3);
    let paw = file(&d, "paw.tsv", PAW);
    let pawsig = file(&d, "p.csv", "a,1\nb,1\nc,1\nd,2\n");
    assert_eq!(code(&["denoise", "--graph", s(&paw), "--signal", s(&pawsig), "--basis", s(&b), "--sigma", "1", "--out", s(&out)]), 3);
}

#[test]
fn orient_command() {
    let d = TempDir::new().unwrap();
    let out = d.path().join("o.tsv");
    let g = file(&d, "u.tsv", "x\ty\t1\n");
    let c = file(&d, "c.csv", "y,40\nx,30\n");
    ok(&["orient", "--graph", s(&g), "--coords", s(&c), "--out", s(&out)]);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.lines().any(|l| l == "x\ty\t1"));

    let g = file(&d, "u2.tsv", "y\tx\t1\n");
    let c = file(&d, "c2.csv", "x,5\ny,5\n");
    ok(&["orient", "--graph", s(&g), "--coords", s(&c), "--out", s(&out)]);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.lines().any(|l| l.starts_with('#') && l.contains("equal coordinates")));
    assert!(text.lines().any(|l| l == "y\tx\t1"));

    // five "states" with latitudes
    let g = file(&d, "us.tsv", "TX\tOK\t1\nOK\tKS\t1\nKS\tNE\t1\nNE\tSD\t1\nTX\tKS\t0.5\nOK\tNE\t0.5\n");
    let c = file(&d, "us.csv", "TX,31.0\nOK,35.5\nKS,38.5\nNE,41.5\nSD,44.4\n");
    ok(&["orient", "--graph", s(&g), "--coords", s(&c), "--out", s(&out)]);
    let lat = |l: &str| match l {
        "TX" => 31.0,
        "OK" => 35.5,
        "KS" => 38.5,
        "NE" => 41.5,
        _ => 44.4,
    };
    let arcs: Vec<_> = fs::read_to_string(&out).unwrap().lines().filter(|l| !l.starts_with('#')).map(String::from).collect();
    assert_eq!(arcs.len(), 6);
    for l in arcs {
        let f: Vec<&str> = l.split('\t').collect();
        assert!(lat(f[0]) < lat(f[1]), "{l}");
    }

    let missing = file(&d, "m.csv", "x,1\n");
    let g = file(&d, "u3.tsv", "x\ty\t1\n");
    assert_eq!(code(&["orient", "--graph", s(&g), "--coords", s(&missing), "--out", s(&out)]), 2);
}

#[test]
fn input_errors_exit_2() {
    let d = TempDir::new().unwrap();
    let out = d.path().join("b.json");
    let bad = file(&d, "bad.tsv", "a\tb\t1\nb\tc\n");
    assert_eq!(code(&["basis", "greedy", "--graph", s(&bad), "--out", s(&out)]), 2);
    let neg = file(&d, "neg.tsv", "a\tb\t-1\n");
    assert_eq!(code(&["basis", "greedy", "--graph", s(&neg), "--out", s(&out)]), 2);
    let missing = d.path().join("nope.tsv");
    assert_eq!(code(&["basis", "greedy", "--graph", s(&missing), "--out", s(&out)]), 2);
    assert_eq!(code(&["basis", "bogus", "--graph", s(&bad), "--out", s(&out)]), 2);
}

#[test]
fn precondition_errors_exit_3() {
    let d = TempDir::new().unwrap();
    let out = d.path().join("b.json");
    let g = file(&d, "g.tsv", "a\tb\t1\nb\tc\t2\n");
    assert_eq!(code(&["basis", "chung", "--graph", s(&g), "--out", s(&out)]), 3);
    let split = file(&d, "s.tsv", "a\tb\t1\nc\td\t2\n");
    assert_eq!(code(&["basis", "greedy", "--graph", s(&split), "--out", s(&out)]), 3);
    assert_eq!(code(&["basis", "feasible", "--graph", s(&g), "--out", s(&out), "--rho1", "0.95"]), 3);
}
