use std::path::PathBuf;
use std::process::{Command, Output};

use histq::examples::{build_teleportation, three_gate_text};
use histq::parse::emit_circuit;
use histq::rewrite::{run_passes, DEFAULT_PASSES};

fn scratch(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("histq-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn histq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_histq"))
        .args(args)
        .env_remove("HISTQ_MAX_WIRES")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

fn teleportation_file(tag: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("histq-cli-{}", std::process::id())).join(format!("tele_{tag}.circ"));
    std::fs::create_dir_all(p.parent().unwrap()).unwrap();
    let o = histq(&["examples", "teleportation", "--output", p.to_str().unwrap()]);
    assert!(o.status.success());
    p
}

#[test]
fn count_reports_history_reduction() {
    let full = scratch("full.circ", &three_gate_text(false));
    let o = histq(&["count", full.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "internal_wires=6 histories=64\n");
    let restricted = scratch("restricted.circ", &three_gate_text(true));
    let o = histq(&["count", restricted.to_str().unwrap()]);
    assert_eq!(stdout(&o), "internal_wires=4 histories=16\n");
}

#[test]
fn compare_teleportation_agrees() {
    let f = teleportation_file("t1");
    let o = histq(&["compare", f.to_str().unwrap(), "--in", "100", "--out", "101"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert_eq!(field(&out, "agree"), "true");
    assert!(field(&out, "delta").parse::<f64>().unwrap() <= 1e-10);
    assert_eq!(field(&out, "probability").parse::<f64>().unwrap(), 0.25);
}

#[test]
fn undeclared_wire_is_a_line_numbered_error() {
    let f = scratch("bad.circ", "version 1\nmode net\nwire a in out\nwire b in out\ngate CNOT a b zz\n");
    let o = histq(&["run", f.to_str().unwrap(), "--in", "00", "--out", "00"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 5"), "{err}");
    assert!(err.contains("zz"), "{err}");
}

#[test]
fn bad_bits_exit_two() {
    let f = teleportation_file("t2");
    let o = histq(&["run", f.to_str().unwrap(), "--in", "1", "--out", "101"]);
    assert_eq!(o.status.code(), Some(2));
    let o = histq(&["run", f.to_str().unwrap(), "--in", "110", "--out", "101"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn non_sequential_compare_exits_three() {
    let reduced = run_passes(&build_teleportation(), DEFAULT_PASSES).circuit;
    let f = scratch("reduced.circ", &emit_circuit(&reduced).unwrap());
    let o = histq(&["compare", f.to_str().unwrap(), "--in", "1", "--out", "101"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let o = histq(&["run", f.to_str().unwrap(), "--in", "1", "--out", "101"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(field(&stdout(&o), "probability").parse::<f64>().unwrap(), 0.25);
}

#[test]
fn guard_exits_four() {
    let f = teleportation_file("t3");
    let o = histq(&["run", f.to_str().unwrap(), "--in", "100", "--out", "101", "--max-wires", "2"]);
    assert_eq!(o.status.code(), Some(4));
    let o = Command::new(env!("CARGO_BIN_EXE_histq"))
        .args(["run", f.to_str().unwrap(), "--in", "100", "--out", "101"])
        .env("HISTQ_MAX_WIRES", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn dist_total_is_sum_of_lines() {
    let f = teleportation_file("t4");
    let o = histq(&["dist", f.to_str().unwrap(), "--in", "0--"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let sum: f64 = out
        .lines()
        .filter(|l| l.starts_with(['0', '1']))
        .map(|l| l.split_once('=').unwrap().1.parse::<f64>().unwrap())
        .sum();
    let total: f64 = field(&out, "total").parse().unwrap();
    assert!((sum - total).abs() <= 1e-12);
    assert!((total - 1.0).abs() <= 1e-10);
    assert_eq!(field(&out, "normalized"), "true");
    assert_eq!(out.lines().filter(|l| l.starts_with(['0', '1'])).count(), 4);
}

#[test]
fn json_and_threads_match_plain_output() {
    let f = teleportation_file("t5");
    let plain = stdout(&histq(&["run", f.to_str().unwrap(), "--in", "100", "--out", "011"]));
    let threaded = stdout(&histq(&["--threads", "4", "run", f.to_str().unwrap(), "--in", "100", "--out", "011"]));
    let json = stdout(&histq(&["run", f.to_str().unwrap(), "--in", "100", "--out", "011", "--json"]));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    for key in ["value_re", "value_im", "resolved_re", "probability"] {
        assert_eq!(field(&plain, key), field(&threaded, key));
        assert_eq!(field(&plain, key).parse::<f64>().unwrap(), v[key].as_f64().unwrap());
    }
    assert_eq!(v["norm_exponent"], 2);
}

#[test]
fn examples_round_trip() {
    for name in ["teleportation", "superdense"] {
        let o = histq(&["examples", name]);
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        let c = histq::parse::parse_circuit(&text).unwrap();
        assert!(histq::circuit::validate(&c).is_empty());
        let f = scratch(&format!("{name}.circ"), &text);
        let bits_in = "0".repeat(c.inputs().len());
        let bits_out = "0".repeat(c.outputs().len());
        let a = stdout(&histq(&["run", f.to_str().unwrap(), "--in", &bits_in, "--out", &bits_out]));
        let emitted = scratch(&format!("{name}_net.circ"), &emit_circuit(&c).unwrap());
        let b = stdout(&histq(&["run", emitted.to_str().unwrap(), "--in", &bits_in, "--out", &bits_out]));
        for key in ["value_re", "value_im", "norm_exponent", "internal_wires"] {
            assert_eq!(field(&a, key), field(&b, key));
        }
    }
}

#[test]
fn rewrite_prints_counts_and_netlist() {
    let f = teleportation_file("t6");
    let target = f.with_file_name("tele_rewritten.circ");
    let o = histq(&["rewrite", f.to_str().unwrap(), "--passes", "canonicalize,propagate", "--emit", target.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(field(&out, "before_internal_wires"), "3");
    assert_eq!(field(&out, "after_internal_wires"), "1");
    assert!(!out.contains("mode net"));
    let back = histq(&["count", target.to_str().unwrap()]);
    assert_eq!(stdout(&back), "internal_wires=1 histories=2\n");
    let o = histq(&["rewrite", f.to_str().unwrap(), "--passes", "nope"]);
    assert_eq!(o.status.code(), Some(2));
}
