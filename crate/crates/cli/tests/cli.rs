use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

use netbatch_core::batchfile::parse_batches_str;
use netbatch_core::{GeneratorModel, Netlist};

fn netbatch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netbatch"))
        .args(args)
        .output()
        .expect("spawn netbatch")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Self {
            dir: TempDir::new().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn netlist(&self, name: &str, nets: &str, seed: &str) -> PathBuf {
        let p = self.path(name);
        let out = netbatch(&[
            "gen",
            "--grid",
            "100",
            "100",
            "6",
            "--nets",
            nets,
            "--seed",
            seed,
            "-o",
            s(&p),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        p
    }
}

#[test]
fn gen_is_deterministic_and_parseable() {
    let ws = Workspace::new();
    let a = ws.netlist("a.net", "1000", "1");
    let b = ws.netlist("b.net", "1000", "1");
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let nl = Netlist::parse_str(&text).unwrap();
    assert_eq!(nl.len(), 1000);
    assert_eq!(nl.grid().to_string(), "100x100x6");
}

#[test]
fn gen_rejects_zero_nets() {
    let out = netbatch(&["gen", "--grid", "10", "10", "2", "--nets", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn batch_then_validate() {
    let ws = Workspace::new();
    let net = ws.netlist("d.net", "1500", "4");
    let (bat, stats, json) = (ws.path("d.bat"), ws.path("d.stats"), ws.path("d.json"));
    let out = netbatch(&[
        "batch",
        "-i",
        s(&net),
        "-o",
        s(&bat),
        "--stats",
        s(&stats),
        "--stats-json",
        s(&json),
        "--workers",
        "2",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let stats = fs::read_to_string(&stats).unwrap();
    assert!(stats.starts_with("n_nets = 1500\n"));
    assert!(stats.contains("assignment = fallback\n"));
    assert!(stats.contains("workers = 2\n"));
    let json = fs::read_to_string(&json).unwrap();
    assert!(json.contains("\"final_batches\""));

    let out = netbatch(&["validate", "-i", s(&net), "-b", s(&bat)]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn batch_is_worker_invariant() {
    let ws = Workspace::new();
    let net = ws.netlist("w.net", "1200", "2");
    let run = |w: &str| {
        let bat = ws.path(&format!("w{w}.bat"));
        let out = netbatch(&[
            "batch",
            "-i",
            s(&net),
            "-o",
            s(&bat),
            "--workers",
            w,
            "--stats",
            s(&ws.path("st")),
        ]);
        assert!(out.status.success());
        fs::read_to_string(bat).unwrap()
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn batch_with_model_file() {
    let ws = Workspace::new();
    let net = ws.netlist("m.net", "600", "3");
    let model = ws.path("gen.model");
    fs::write(
        &model,
        GeneratorModel::random(12, 16, 2, 1).unwrap().to_bytes(),
    )
    .unwrap();
    let bat = ws.path("m.bat");
    let out = netbatch(&["batch", "-i", s(&net), "--model", s(&model), "-o", s(&bat)]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("assignment = generator"));
    assert!(stderr.contains("n_initial_batches = 12"));
}

#[test]
fn corrupt_model_fails() {
    let ws = Workspace::new();
    let net = ws.netlist("c.net", "50", "3");
    let model = ws.path("bad.model");
    let mut bytes = GeneratorModel::random(4, 8, 1, 1).unwrap().to_bytes();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0xff;
    fs::write(&model, bytes).unwrap();
    let out = netbatch(&["batch", "-i", s(&net), "--model", s(&model)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot load model"));
}

#[test]
fn validate_flags_corruption() {
    let ws = Workspace::new();
    let net = ws.path("v.net");
    fs::write(
        &net,
        "grid 8 8 1\nnet 0 1\npin 2 2 0\nnet 1 1\npin 2 2 0\nnet 2 1\npin 5 5 0\n",
    )
    .unwrap();

    let good = ws.path("good.bat");
    fs::write(&good, "batch 0: 0 2\nbatch 1: 1\n").unwrap();
    assert_eq!(
        netbatch(&["validate", "-i", s(&net), "-b", s(&good)])
            .status
            .code(),
        Some(0)
    );

    let cases = [
        ("batch 0: 0 1 2\n", "conflict in batch 0: nets 0 and 1"),
        (
            "batch 0: 0 2\nbatch 1: 1 2\n",
            "net 2 assigned more than once",
        ),
        ("batch 0: 0 2\nbatch 1: 1 9\n", "unknown net 9"),
        ("batch 0: 0\n", "net 1 not assigned"),
    ];
    for (text, needle) in cases {
        let bad = ws.path("bad.bat");
        fs::write(&bad, text).unwrap();
        let out = netbatch(&["validate", "-i", s(&net), "-b", s(&bad)]);
        assert_eq!(out.status.code(), Some(1), "{text:?}");
        assert!(
            String::from_utf8_lossy(&out.stderr).contains(needle),
            "{text:?}"
        );
    }
}

#[test]
fn io_errors_use_their_own_code() {
    let out = netbatch(&[
        "validate",
        "-i",
        "/nonexistent/x.net",
        "-b",
        "/nonexistent/x.bat",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn malformed_batch_file_is_a_data_error() {
    let ws = Workspace::new();
    let net = ws.netlist("p.net", "10", "1");
    let bat = ws.path("p.bat");
    fs::write(&bat, "batch 0: 1 2\nbatch 0: 3\n").unwrap();
    let out = netbatch(&["validate", "-i", s(&net), "-b", s(&bat)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn compare_prints_every_method() {
    let ws = Workspace::new();
    let net = ws.netlist("cmp.net", "400", "5");
    let out = netbatch(&["compare", "-i", s(&net)]);
    assert!(out.status.success());
    let table = String::from_utf8(out.stdout).unwrap();
    for method in [
        "first-fit/bbox",
        "first-fit/layer-agnostic",
        "first-fit/layer-aware",
        "pipeline",
    ] {
        assert!(table.contains(method), "{method}");
    }
    let out = netbatch(&["compare", "-i", s(&net), "--json"]);
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("\"method\": \"pipeline\""));
}

#[test]
fn export_training_filters_by_size() {
    let ws = Workspace::new();
    let net = ws.path("e.net");
    let mut text = String::from("grid 300 300 1\n");
    for i in 0..250u32 {
        text.push_str(&format!("net {i} 1\npin {} {} 0\n", i % 300, i / 300));
    }
    fs::write(&net, text).unwrap();
    let bat = ws.path("e.bat");
    let first: Vec<String> = (0..200).map(|i| i.to_string()).collect();
    let second: Vec<String> = (200..250).map(|i| i.to_string()).collect();
    fs::write(
        &bat,
        format!(
            "batch 0: {}\nbatch 1: {}\n",
            first.join(" "),
            second.join(" ")
        ),
    )
    .unwrap();

    let (rec, edges) = (ws.path("rec.txt"), ws.path("edges.txt"));
    let run = |extra: &[&str]| {
        let mut args = vec![
            "export-training",
            "-i",
            s(&net),
            "-b",
            s(&bat),
            "-o",
            s(&rec),
            "--edges",
            s(&edges),
        ];
        args.extend_from_slice(extra);
        let out = netbatch(&args);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        fs::read_to_string(&rec).unwrap()
    };
    let records = run(&[]);
    assert_eq!(
        records.lines().filter(|l| l.starts_with("net ")).count(),
        200
    );
    assert!(records
        .lines()
        .filter(|l| l.starts_with("net "))
        .all(|l| l.contains(" batch 0 ")));
    assert_eq!(fs::read_to_string(&edges).unwrap(), "");

    let all = run(&["--min-size", "0"]);
    assert_eq!(all.lines().filter(|l| l.starts_with("net ")).count(), 250);
}

#[test]
fn batch_output_partitions_nets() {
    let ws = Workspace::new();
    let net = ws.netlist("q.net", "900", "8");
    let bat = ws.path("q.bat");
    let out = netbatch(&[
        "batch",
        "-i",
        s(&net),
        "-o",
        s(&bat),
        "-B",
        "8",
        "--max-batch-size",
        "64",
    ]);
    assert!(out.status.success());
    let batches = parse_batches_str(&fs::read_to_string(&bat).unwrap()).unwrap();
    let mut ids: Vec<u32> = batches.iter().flatten().copied().collect();
    ids.sort_unstable();
    assert_eq!(ids, (0..900).collect::<Vec<u32>>());
    assert!(batches.iter().all(|b| b.len() <= 64));
}
