use std::sync::Arc;

use num_complex::Complex64;

use histq::canonical::{amplitude_for, distribution_canonical};
use histq::circuit::{Circuit, Side};
use histq::engine::{evaluate, output_distribution, BasisState, BoundaryAssignment, EvalOptions};
use histq::examples::{
    build_superdense, build_superdense_with, build_teleportation, build_teleportation_without_fixup, superdense_fixup,
    three_gate_text,
};
use histq::gate::builtin;
use histq::lower::SeqOp;
use histq::parse::parse_circuit;

fn amp(c: &Circuit, ins: &[(&str, bool)], outs: &[(&str, bool)]) -> Complex64 {
    let mut b = BoundaryAssignment::new();
    for (l, v) in ins {
        b = b.input(*l, *v);
    }
    for (l, v) in outs {
        b = b.output(*l, *v);
    }
    let soh = evaluate(c, &b, &EvalOptions::default()).unwrap().amplitude.resolved();
    let canon = amplitude_for(c, &b).unwrap();
    assert!((soh - canon).norm() <= 1e-10, "{soh} vs {canon}");
    soh
}

/// The map from data bit `x` to teleported bit `c` in branch `(p, q)`.
fn branch(c: &Circuit, p: bool, q: bool) -> [[Complex64; 2]; 2] {
    let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
    for x in [false, true] {
        for out in [false, true] {
            m[out as usize][x as usize] = amp(c, &[("x", x)], &[("x", p), ("b", q), ("c", out)]);
        }
    }
    m
}

fn is_scaled_identity(m: &[[Complex64; 2]; 2]) -> bool {
    m[0][1].norm() <= 1e-10 && m[1][0].norm() <= 1e-10 && (m[0][0] - m[1][1]).norm() <= 1e-10
}

#[test]
fn teleportation_branches_are_uniform() {
    let c = build_teleportation();
    for x in [false, true] {
        let mut b = BoundaryAssignment::new();
        b.bind_bits(&c, Side::In, if x { "1--" } else { "0--" }).unwrap();
        let d = output_distribution(&c, &b, &EvalOptions::default()).unwrap();
        let canon = distribution_canonical(&c, &BasisState { bits: vec![x, false, false] }).unwrap();
        assert_eq!(d.labels, ["x", "b", "c"]);
        let mut wrong = 0.0;
        for (s, p) in &d.outcomes {
            assert!((p - canon[s.index() as usize]).abs() <= 1e-10);
            if s.bits[2] == x {
                assert!((p - 0.25).abs() <= 1e-10, "{s}: {p}");
            } else {
                wrong += p;
            }
        }
        assert!(wrong <= 1e-10);
    }
}

#[test]
fn teleportation_carries_superpositions() {
    let c = build_teleportation();
    for p in [false, true] {
        for q in [false, true] {
            let m = branch(&c, p, q);
            assert!(is_scaled_identity(&m), "branch {p} {q}: {m:?}");
            assert!((m[0][0].norm() - 0.5).abs() <= 1e-10);
        }
    }
}

#[test]
fn teleportation_without_fixup_fails_three_branches() {
    let c = build_teleportation_without_fixup();
    let bad = [false, true]
        .into_iter()
        .flat_map(|p| [false, true].map(|q| (p, q)))
        .filter(|&(p, q)| !is_scaled_identity(&branch(&c, p, q)))
        .count();
    assert_eq!(bad, 3);
    // on basis inputs only the flipped branches show up
    let flipped = [false, true]
        .into_iter()
        .flat_map(|p| [false, true].map(|q| (p, q)))
        .filter(|&(p, q)| branch(&c, p, q)[0][0].norm() <= 1e-10)
        .count();
    assert_eq!(flipped, 2);
}

fn candidates() -> Vec<Vec<SeqOp>> {
    let mut moves = Vec::new();
    for g in ["CNOT", "CZ"] {
        for r in ["r1", "r2"] {
            moves.push(SeqOp {
                gate: Arc::new(builtin(g).unwrap()),
                qubits: vec![r.into(), "A".into()],
            });
        }
    }
    let mut out = vec![vec![]];
    for a in &moves {
        out.push(vec![a.clone()]);
        for b in &moves {
            out.push(vec![a.clone(), b.clone()]);
        }
    }
    out
}

/// Probability of reading `r1` on `A` and `r2` on `B` for every input.
fn decodes(c: &Circuit) -> bool {
    (0..4u64).all(|idx| {
        let input = BasisState::from_index(idx, 2);
        let (r1, r2) = (input.bits[0], input.bits[1]);
        let d = distribution_canonical(c, &BasisState { bits: vec![r1, r2, false, false] }).unwrap();
        let want = BasisState { bits: vec![r1, r2, r1, r2] }.index() as usize;
        (d[want] - 1.0).abs() <= 1e-10
    })
}

#[test]
fn superdense_fixup_found_by_search() {
    let found: Vec<Vec<SeqOp>> = candidates().into_iter().filter(|f| decodes(&build_superdense_with(f))).collect();
    assert!(!found.is_empty());
    let shipped = superdense_fixup();
    assert!(found.contains(&shipped));
    assert!(found.iter().all(|f| f.len() == 2));
    assert!(!decodes(&build_superdense_with(&[])));
}

#[test]
fn superdense_recovers_both_bits() {
    let c = build_superdense();
    for idx in 0..4u64 {
        let bits = BasisState::from_index(idx, 2).bits;
        let p = amp(&c, &[("r1", bits[0]), ("r2", bits[1])], &[("r1", bits[0]), ("r2", bits[1]), ("A", bits[0]), ("B", bits[1])]);
        assert!((p.norm_sqr() - 1.0).abs() <= 1e-10);
    }
}

#[test]
fn three_gate_history_counts() {
    let full = parse_circuit(&three_gate_text(false)).unwrap();
    let restricted = parse_circuit(&three_gate_text(true)).unwrap();
    assert_eq!(full.classify_wires().history_count(), 64);
    assert_eq!(restricted.classify_wires().history_count(), 16);
}
