#![allow(dead_code)]

use std::sync::Arc;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use histq::canonical::distribution_canonical;
use histq::circuit::{Circuit, Side};
use histq::engine::{BasisState, BoundaryAssignment};
use histq::gate::{builtin, GateDef, BUILTIN_NAMES};
use histq::lower::{lower_sequential, QubitDecl, SeqDesc};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn gate(name: &str) -> Arc<GateDef> {
    Arc::new(builtin(name).unwrap())
}

fn width(name: &str) -> usize {
    builtin(name).unwrap().lines().unwrap().len()
}

/// Up to `max_gates` gates drawn from `names` on `n` qubits.
pub fn random_desc(rng: &mut StdRng, name: &str, n: usize, max_gates: usize, names: &[&str], fixed_inputs: &[Option<bool>]) -> SeqDesc {
    let qubits: Vec<String> = (0..n).map(|q| format!("q{q}")).collect();
    let mut d = SeqDesc::new(name);
    for (q, qname) in qubits.iter().enumerate() {
        let mut decl = QubitDecl::new(qname.clone());
        if let Some(Some(v)) = fixed_inputs.get(q) {
            decl = decl.with_input(*v);
        }
        d = d.qubit(decl);
    }
    let usable: Vec<&str> = names.iter().copied().filter(|g| width(g) <= n).collect();
    let m = rng.gen_range(0..=max_gates);
    for _ in 0..m {
        let g = *usable.choose(rng).unwrap();
        let mut order: Vec<&str> = qubits.iter().map(String::as_str).collect();
        order.shuffle(rng);
        d.push(gate(g), &order[..width(g)]);
    }
    d
}

/// Sequential circuit on 1..=4 qubits with at most 8 built-in gates.
pub fn random_circuit(rng: &mut StdRng, idx: usize) -> Circuit {
    let n = rng.gen_range(1..=4);
    lower_sequential(&random_desc(rng, &format!("random{idx}"), n, 8, BUILTIN_NAMES, &[])).unwrap()
}

pub fn random_bits(rng: &mut StdRng, n: usize) -> String {
    (0..n).map(|_| if rng.gen_bool(0.5) { '1' } else { '0' }).collect()
}

/// Random basis-state query over every port.
pub fn random_query(rng: &mut StdRng, c: &Circuit) -> (String, String, BoundaryAssignment) {
    let i = random_bits(rng, c.inputs().len());
    let o = random_bits(rng, c.outputs().len());
    let b = BoundaryAssignment::from_bits(c, &i, &o).unwrap();
    (i, o, b)
}

/// Small circuits with at most three free boundary bits and some fixed
/// inputs, so constant passes have work to do.
pub fn rewrite_corpus(size: usize, seed: u64) -> Vec<Circuit> {
    let mut r = rng(seed);
    (0..size)
        .map(|i| {
            let n: usize = r.gen_range(1..=3);
            let must_fix = (2 * n).saturating_sub(3);
            let mut fixed: Vec<Option<bool>> = vec![None; n];
            let mut slots: Vec<usize> = (0..n).collect();
            slots.shuffle(&mut r);
            let extra = r.gen_range(0..=(n - must_fix));
            for &q in slots.iter().take(must_fix + extra) {
                fixed[q] = Some(r.gen_bool(0.5));
            }
            lower_sequential(&random_desc(&mut r, &format!("corpus{i}"), n, 8, BUILTIN_NAMES, &fixed)).unwrap()
        })
        .collect()
}

pub const CLASSICAL: &[&str] = &["X", "CNOT", "TOFFOLI", "SWAP", "XOR3"];

/// Classical circuit with every input fixed, plus its unique output.
pub fn random_classical(rng: &mut StdRng, idx: usize) -> (Circuit, BoundaryAssignment) {
    let n = rng.gen_range(1..=4);
    let fixed: Vec<Option<bool>> = (0..n).map(|_| Some(rng.gen_bool(0.5))).collect();
    let desc = random_desc(rng, &format!("classical{idx}"), n, 8, CLASSICAL, &fixed);
    let c = lower_sequential(&desc).unwrap();
    let input: Vec<bool> = fixed.iter().map(|v| v.unwrap()).collect();
    let dist = distribution_canonical(&c, &BasisState { bits: input }).unwrap();
    let out = dist.iter().position(|p| (p - 1.0).abs() < 1e-12).expect("classical output is a basis state");
    let bits = BasisState::from_index(out as u64, n);
    let mut b = BoundaryAssignment::new();
    for (p, v) in c.outputs().iter().zip(&bits.bits) {
        b = b.output(p.label.clone(), *v);
    }
    (c, b)
}

/// Every query over the free ports of `c`, in ascending index order.
pub fn all_queries(c: &Circuit) -> Vec<BoundaryAssignment> {
    let free: Vec<(Side, String)> = [Side::In, Side::Out]
        .into_iter()
        .flat_map(|s| c.ports(s).iter().filter(|p| p.fixed.is_none()).map(move |p| (s, p.label.clone())))
        .collect();
    (0..1usize << free.len())
        .map(|idx| {
            let mut b = BoundaryAssignment::new();
            for (k, (s, l)) in free.iter().enumerate() {
                let v = idx >> (free.len() - 1 - k) & 1 == 1;
                b = match s {
                    Side::In => b.input(l.clone(), v),
                    Side::Out => b.output(l.clone(), v),
                };
            }
            b
        })
        .collect()
}

fn ops_desc(ops: &[(&str, Vec<usize>)], n: usize) -> SeqDesc {
    let names: Vec<String> = (0..n).map(|q| format!("q{q}")).collect();
    let mut d = SeqDesc::new("swap_test");
    for q in &names {
        d = d.qubit(QubitDecl::new(q.clone()));
    }
    for (g, qs) in ops {
        let qs: Vec<&str> = qs.iter().map(|&q| names[q].as_str()).collect();
        d.push(gate(g), &qs);
    }
    d
}

fn pick(rng: &mut StdRng, room: usize) -> &'static str {
    loop {
        let g = *BUILTIN_NAMES.choose(rng).unwrap();
        if width(g) <= room {
            return g;
        }
    }
}

/// A random prefix followed by two gates on disjoint qubits, in both
/// orders.
pub fn commuting_pair(rng: &mut StdRng) -> (Circuit, Circuit) {
    let n = rng.gen_range(2..=4);
    let mut qs: Vec<usize> = (0..n).collect();
    qs.shuffle(rng);
    let g1 = pick(rng, n - 1);
    let g2 = pick(rng, n - width(g1));
    let a = (g1, qs[..width(g1)].to_vec());
    let b = (g2, qs[width(g1)..width(g1) + width(g2)].to_vec());
    let mut prefix = Vec::new();
    for _ in 0..rng.gen_range(0..3) {
        let g = pick(rng, n);
        let mut q: Vec<usize> = (0..n).collect();
        q.shuffle(rng);
        prefix.push((g, q[..width(g)].to_vec()));
    }
    let mut one = prefix.clone();
    one.extend([a.clone(), b.clone()]);
    let mut two = prefix;
    two.extend([b, a]);
    (lower_sequential(&ops_desc(&one, n)).unwrap(), lower_sequential(&ops_desc(&two, n)).unwrap())
}

pub fn single_qubit(ops: &[&str]) -> Circuit {
    let ops: Vec<(&str, Vec<usize>)> = ops.iter().map(|g| (*g, vec![0])).collect();
    lower_sequential(&ops_desc(&ops, 1)).unwrap()
}
