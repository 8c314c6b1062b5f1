//! Bundled circuits.

use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;

use crate::circuit::{Circuit, GateInstance, Mode, Port, Wire, WireId};
use crate::gate::{builtin, GateDef};
use crate::lower::{lower_sequential, QubitDecl, SeqDesc, SeqOp};
use crate::parse::parse_circuit;

/// Teleportation with the fixup. Outputs `x`, `b`, `c` are the measured
/// pair and the teleported qubit.
pub const TELEPORTATION: &str = "\
# quantum teleportation
version 1
mode seq
name teleportation
qubit x
qubit b in=0
qubit c in=0
# Bell pair on b, c
apply H b
apply CNOT b c
# Bell measurement basis change on x, b
apply CNOT b x
apply H b
# fixup: Z from b, then xor from x
apply CZ b c
apply CNOT x c
";

/// Superdense coding: `r1`, `r2` are the classical bits, `A` carries them,
/// `B` is the other half of the Bell pair.
pub const SUPERDENSE: &str = "\
# superdense coding
version 1
mode seq
name superdense
qubit r1
qubit r2
qubit A in=0
qubit B in=0
apply H B
apply CNOT B A
# encoding: Z from r2, then xor from r1
apply CZ r2 A
apply CNOT r1 A
apply CNOT B A
apply H B
";

pub fn teleportation_desc(fixup: bool) -> SeqDesc {
    let g = |n: &str| Arc::new(builtin(n).unwrap());
    let mut d = SeqDesc::new("teleportation")
        .qubit(QubitDecl::new("x"))
        .qubit(QubitDecl::new("b").with_input(false))
        .qubit(QubitDecl::new("c").with_input(false))
        .apply(g("H"), &["b"])
        .apply(g("CNOT"), &["b", "c"])
        .apply(g("CNOT"), &["b", "x"])
        .apply(g("H"), &["b"]);
    if fixup {
        d.push(g("CZ"), &["b", "c"]);
        d.push(g("CNOT"), &["x", "c"]);
    }
    d
}

pub fn build_teleportation() -> Circuit {
    parse_circuit(TELEPORTATION).expect("bundled circuit parses")
}

pub fn build_teleportation_without_fixup() -> Circuit {
    lower_sequential(&teleportation_desc(false)).expect("well formed")
}

/// The superdense circuit with `fixup` as the encoding step on `A`.
pub fn superdense_desc(fixup: &[SeqOp]) -> SeqDesc {
    let g = |n: &str| Arc::new(builtin(n).unwrap());
    let mut d = SeqDesc::new("superdense")
        .qubit(QubitDecl::new("r1"))
        .qubit(QubitDecl::new("r2"))
        .qubit(QubitDecl::new("A").with_input(false))
        .qubit(QubitDecl::new("B").with_input(false))
        .apply(g("H"), &["B"])
        .apply(g("CNOT"), &["B", "A"]);
    d.ops.extend(fixup.iter().cloned());
    d.push(g("CNOT"), &["B", "A"]);
    d.push(g("H"), &["B"]);
    d
}

pub fn superdense_fixup() -> Vec<SeqOp> {
    vec![
        SeqOp {
            gate: Arc::new(builtin("CZ").unwrap()),
            qubits: vec!["r2".into(), "A".into()],
        },
        SeqOp {
            gate: Arc::new(builtin("CNOT").unwrap()),
            qubits: vec!["r1".into(), "A".into()],
        },
    ]
}

pub fn build_superdense() -> Circuit {
    parse_circuit(SUPERDENSE).expect("bundled circuit parses")
}

pub fn build_superdense_with(fixup: &[SeqOp]) -> Circuit {
    lower_sequential(&superdense_desc(fixup)).expect("well formed")
}

/// Three gates on `a`, `b`, `c`. The outer two are `H x H x H` written as
/// 8x8 matrices; the middle one is the same, or `H` on `b` alone when
/// `restricted`.
pub fn three_gate_text(restricted: bool) -> String {
    let mut s = String::from("version 1\nmode seq\nname three_gates\nmatrix HHH 3 norm=3\n");
    for r in 0..8u32 {
        let row: Vec<&str> = (0..8u32).map(|c| if (r & c).count_ones() % 2 == 0 { "1" } else { "-1" }).collect();
        writeln!(s, "  {}", row.join(" ")).unwrap();
    }
    s.push_str("qubit a\nqubit b\nqubit c\napply HHH a b c\n");
    if restricted {
        s.push_str("apply H b\n");
    } else {
        s.push_str("apply HHH a b c\n");
    }
    s.push_str("apply HHH a b c\n");
    s
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A on `a`, B on `b`, `c`, then C sitting on the backward-running
/// segment of the bent `c` wire: its output leg is bound to `c1` (which B
/// also drives) and its input leg to the outgoing `c2`.
pub fn build_bent_wire() -> Circuit {
    let a = GateDef::from_matrix("A", 1, &[vec![c(1.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(-1.0, 0.0)]], 1).unwrap();
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let m = c(-1.0, 0.0);
    let b = GateDef::from_matrix(
        "B",
        2,
        &[vec![o, z, o, z], vec![z, o, z, o], vec![z, o, z, m], vec![o, z, m, z]],
        1,
    )
    .unwrap();
    let cg = GateDef::from_matrix("C", 1, &[vec![o, o], vec![c(0.0, 1.0), c(0.0, -1.0)]], 1).unwrap();
    let names = ["a", "a1", "b", "b1", "c", "c1", "c2"];
    let wires = names.iter().map(|n| Wire { name: n.to_string() }).collect();
    let w = |n: &str| WireId(names.iter().position(|x| *x == n).unwrap());
    let gates = vec![
        GateInstance::new(Arc::new(a), vec![w("a1"), w("a")]),
        GateInstance::new(Arc::new(b), vec![w("b1"), w("c1"), w("b"), w("c")]),
        GateInstance::new(Arc::new(cg), vec![w("c1"), w("c2")]),
    ];
    let port = |label: &str, wire: &str| Port {
        label: label.to_string(),
        wire: w(wire),
        fixed: None,
    };
    Circuit::new(
        "bent_wire",
        Mode::Net,
        wires,
        gates,
        vec![port("a", "a"), port("b", "b"), port("c", "c")],
        vec![port("a", "a1"), port("b", "b1"), port("c", "c2")],
    )
    .expect("well formed")
}

/// Names accepted by the `examples` subcommand.
pub const EXAMPLE_NAMES: &[&str] = &["teleportation", "superdense"];

pub fn example_text(name: &str) -> Option<&'static str> {
    match name {
        "teleportation" => Some(TELEPORTATION),
        "superdense" => Some(SUPERDENSE),
        _ => None,
    }
}
