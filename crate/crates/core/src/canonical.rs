//! Dense state-vector simulation, used as the reference for the history sum.

use num_complex::Complex64;
use thiserror::Error;

use crate::circuit::Circuit;
use crate::engine::{resolve_boundary, BasisState, BoundaryAssignment, EvalError};
use crate::gate::{norm_scale, GateDef, Line};

pub const MAX_QUBITS: usize = 20;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CanonError {
    #[error("circuit is not sequential: {0}")]
    NonSequential(String),
    #[error("{0} qubits exceed the simulator limit of {MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("qubit {0} appears more than once in one gate")]
    RepeatedQubit(usize),
    #[error("gate acts on {lines} lines, {given} qubits given")]
    Arity { lines: usize, given: usize },
    #[error("basis state has {got} bits, expected {expected}")]
    StateLength { expected: usize, got: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

fn non_seq<T>(msg: impl Into<String>) -> Result<T, CanonError> {
    Err(CanonError::NonSequential(msg.into()))
}

/// A time order for a circuit together with its qubit lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    /// Gate indices in time order.
    pub order: Vec<usize>,
    /// Qubit line of each wire; qubit `k` starts at input port `k`.
    pub qubit_of_wire: Vec<usize>,
    /// Qubit line read by each output port.
    pub output_qubits: Vec<usize>,
    /// Per gate, the qubit of each of its lines.
    pub gate_qubits: Vec<Vec<usize>>,
}

impl Schedule {
    pub fn qubits(&self) -> usize {
        self.output_qubits.len()
    }
}

/// Recovers a time order. Every wire must start at exactly one input port
/// or through-line output and end at exactly one output port or
/// through-line input; taps may read it anywhere in between.
pub fn sequential_order(c: &Circuit) -> Result<Schedule, CanonError> {
    let nw = c.wires().len();
    let ng = c.gates().len();
    let mut producer: Vec<Option<usize>> = vec![None; nw];
    let mut consumer: Vec<Option<usize>> = vec![None; nw];
    let mut starts = vec![0usize; nw];
    let mut ends = vec![0usize; nw];
    let mut tappers: Vec<Vec<usize>> = vec![Vec::new(); nw];
    // through-line successor: (gate, line) consuming a wire -> wire it produces
    let mut next_wire: Vec<Option<usize>> = vec![None; nw];

    for p in c.inputs() {
        starts[p.wire.0] += 1;
    }
    for p in c.outputs() {
        ends[p.wire.0] += 1;
    }
    for (gi, g) in c.gates().iter().enumerate() {
        let Some(lines) = g.gate.lines() else {
            return non_seq(format!("gate {gi} ({}) has no qubit-line reading", g.gate.name()));
        };
        for l in lines {
            match *l {
                Line::Tap(leg) => tappers[g.binding[leg].0].push(gi),
                Line::Through { input, output } => {
                    let (wi, wo) = (g.binding[input].0, g.binding[output].0);
                    ends[wi] += 1;
                    consumer[wi] = Some(gi);
                    starts[wo] += 1;
                    producer[wo] = Some(gi);
                    next_wire[wi] = Some(wo);
                }
            }
        }
    }
    for w in 0..nw {
        let name = &c.wires()[w].name;
        if starts[w] != 1 {
            return non_seq(format!("wire `{name}` has {} starts", starts[w]));
        }
        if ends[w] != 1 {
            return non_seq(format!("wire `{name}` has {} ends", ends[w]));
        }
    }

    // Qubit chains from each input port.
    let mut qubit_of_wire = vec![usize::MAX; nw];
    for (q, p) in c.inputs().iter().enumerate() {
        let mut w = p.wire.0;
        loop {
            qubit_of_wire[w] = q;
            match next_wire[w] {
                Some(n) => w = n,
                None => break,
            }
        }
    }
    if let Some(w) = qubit_of_wire.iter().position(|&q| q == usize::MAX) {
        return non_seq(format!("wire `{}` lies on a closed loop", c.wires()[w].name));
    }
    let output_qubits: Vec<usize> = c.outputs().iter().map(|p| qubit_of_wire[p.wire.0]).collect();

    let mut gate_qubits = Vec::with_capacity(ng);
    for (gi, g) in c.gates().iter().enumerate() {
        let qs: Vec<usize> = g
            .gate
            .lines()
            .unwrap()
            .iter()
            .map(|l| match *l {
                Line::Tap(leg) => qubit_of_wire[g.binding[leg].0],
                Line::Through { input, .. } => qubit_of_wire[g.binding[input].0],
            })
            .collect();
        let mut sorted = qs.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|p| p[0] == p[1]) {
            return non_seq(format!("gate {gi} touches one qubit line twice"));
        }
        gate_qubits.push(qs);
    }

    // producer -> readers, tappers -> consumer
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); ng];
    for w in 0..nw {
        let readers = tappers[w].iter().copied().chain(consumer[w]);
        if let Some(p) = producer[w] {
            succ[p].extend(readers.clone());
        }
        if let Some(cons) = consumer[w] {
            for &t in &tappers[w] {
                succ[t].push(cons);
            }
        }
    }
    let mut indeg = vec![0usize; ng];
    for s in &succ {
        for &t in s {
            indeg[t] += 1;
        }
    }
    let mut ready: std::collections::BinaryHeap<std::cmp::Reverse<usize>> =
        (0..ng).filter(|&g| indeg[g] == 0).map(std::cmp::Reverse).collect();
    let mut order = Vec::with_capacity(ng);
    while let Some(std::cmp::Reverse(g)) = ready.pop() {
        order.push(g);
        for &t in &succ[g] {
            indeg[t] -= 1;
            if indeg[t] == 0 {
                ready.push(std::cmp::Reverse(t));
            }
        }
    }
    if order.len() != ng {
        return non_seq("gate dependencies form a cycle");
    }
    Ok(Schedule {
        order,
        qubit_of_wire,
        output_qubits,
        gate_qubits,
    })
}

/// `2^n` amplitudes, qubit 0 most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn basis(n: usize, index: usize) -> Result<Self, CanonError> {
        if n > MAX_QUBITS {
            return Err(CanonError::TooManyQubits(n));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self, CanonError> {
        let index = bits.iter().fold(0usize, |acc, &b| acc << 1 | b as usize);
        Self::basis(bits.len(), index)
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Applies `g`'s line matrix with line `j` on qubit `qubits[j]`. Zero
/// entries are skipped and unit entries copied, so the identity leaves the
/// state bit-identical.
pub fn apply_gate(s: &StateVector, g: &GateDef, qubits: &[usize]) -> Result<StateVector, CanonError> {
    let m = g.line_matrix().ok_or_else(|| CanonError::NonSequential(format!("gate {} has no qubit-line reading", g.name())))?;
    let k = qubits.len();
    let dim = 1usize << k;
    if m.len() != dim * dim {
        return Err(CanonError::Arity {
            lines: g.lines().map_or(0, |l| l.len()),
            given: k,
        });
    }
    for (i, &q) in qubits.iter().enumerate() {
        if q >= s.n {
            return Err(CanonError::StateLength { expected: s.n, got: q + 1 });
        }
        if qubits[..i].contains(&q) {
            return Err(CanonError::RepeatedQubit(q));
        }
    }
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let rows: Vec<Vec<(usize, Complex64)>> = (0..dim)
        .map(|r| (0..dim).filter(|&c| m[r * dim + c] != zero).map(|c| (c, m[r * dim + c])).collect())
        .collect();
    let masks: Vec<usize> = qubits.iter().map(|&q| 1usize << (s.n - 1 - q)).collect();
    let all: usize = masks.iter().sum();
    let offset = |local: usize| -> usize {
        (0..k).filter(|j| local >> (k - 1 - j) & 1 == 1).map(|j| masks[j]).sum()
    };
    let offsets: Vec<usize> = (0..dim).map(offset).collect();

    let mut out = s.amps.clone();
    let mut gathered = vec![zero; dim];
    for base in 0..s.amps.len() {
        if base & all != 0 {
            continue;
        }
        for (l, off) in offsets.iter().enumerate() {
            gathered[l] = s.amps[base + off];
        }
        for (r, row) in rows.iter().enumerate() {
            let mut acc: Option<Complex64> = None;
            for &(c, e) in row {
                let term = if e == one { gathered[c] } else { e * gathered[c] };
                acc = Some(match acc {
                    Some(a) => a + term,
                    None => term,
                });
            }
            out[base + offsets[r]] = acc.unwrap_or(zero);
        }
    }
    Ok(StateVector { n: s.n, amps: out })
}

/// Evolves an input basis state through the schedule.
pub fn evolve(c: &Circuit, sched: &Schedule, input: &[bool]) -> Result<StateVector, CanonError> {
    if input.len() != sched.qubits() {
        return Err(CanonError::StateLength { expected: sched.qubits(), got: input.len() });
    }
    let mut s = StateVector::from_bits(input)?;
    for &gi in &sched.order {
        s = apply_gate(&s, &c.gates()[gi].gate, &sched.gate_qubits[gi])?;
    }
    Ok(s)
}

/// `<output| U_m ... U_1 |input>`, with bits over the input and output
/// ports in declaration order.
pub fn amplitude_canonical(c: &Circuit, input: &BasisState, output: &BasisState) -> Result<Complex64, CanonError> {
    let sched = sequential_order(c)?;
    if output.bits.len() != c.outputs().len() {
        return Err(CanonError::StateLength { expected: c.outputs().len(), got: output.bits.len() });
    }
    let s = evolve(c, &sched, &input.bits)?;
    Ok(read_output(c, &sched, &s, &output.bits))
}

/// Same, resolving fixed ports and the query like the history engine.
pub fn amplitude_for(c: &Circuit, b: &BoundaryAssignment) -> Result<Complex64, CanonError> {
    let (ins, outs) = resolve_boundary(c, b)?;
    amplitude_canonical(c, &BasisState { bits: ins }, &BasisState { bits: outs })
}

fn read_output(c: &Circuit, sched: &Schedule, s: &StateVector, out_bits: &[bool]) -> Complex64 {
    let n = sched.qubits();
    let mut index = 0usize;
    for (&q, &b) in sched.output_qubits.iter().zip(out_bits) {
        if b {
            index |= 1 << (n - 1 - q);
        }
    }
    s.amplitude(index) * norm_scale(c.norm_offset() as i64)
}

/// Output-port probabilities from one evolution, indexed like the history
/// engine's distribution (output ports in declaration order).
pub fn distribution_canonical(c: &Circuit, input: &BasisState) -> Result<Vec<f64>, CanonError> {
    let sched = sequential_order(c)?;
    let s = evolve(c, &sched, &input.bits)?;
    let k = c.outputs().len();
    Ok((0..1u64 << k)
        .map(|i| read_output(c, &sched, &s, &BasisState::from_index(i, k).bits).norm_sqr())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::builtin;
    use crate::lower::{lower_sequential, QubitDecl, SeqDesc};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn g(n: &str) -> GateDef {
        builtin(n).unwrap()
    }

    #[test]
    fn basic_gates() {
        let s = StateVector::basis(1, 0).unwrap();
        assert_eq!(apply_gate(&s, &g("X"), &[0]).unwrap().amplitude(1), Complex64::new(1.0, 0.0));
        let h = apply_gate(&s, &g("H"), &[0]).unwrap();
        for i in 0..2 {
            assert!((h.amplitude(i) - Complex64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        }
        let s = StateVector::from_bits(&[true, false]).unwrap();
        let t = apply_gate(&s, &g("CNOT"), &[0, 1]).unwrap();
        assert_eq!(t.amplitude(3), Complex64::new(1.0, 0.0));
        assert!(matches!(apply_gate(&s, &g("CNOT"), &[1, 1]), Err(CanonError::RepeatedQubit(1))));
    }

    #[test]
    fn identity_is_bit_identical() {
        let s = StateVector::basis(2, 1).unwrap();
        let s = apply_gate(&s, &g("H"), &[1]).unwrap();
        let s = apply_gate(&s, &g("T"), &[0]).unwrap();
        let s = apply_gate(&s, &g("Y"), &[0]).unwrap();
        let t = apply_gate(&s, &g("I"), &[1]).unwrap();
        assert_eq!(s, t);
    }

    #[test]
    fn schedule_follows_file_order() {
        let c = lower_sequential(
            &SeqDesc::new("b")
                .qubit(QubitDecl::new("a"))
                .qubit(QubitDecl::new("b"))
                .apply(g("H"), &["a"])
                .apply(g("CNOT"), &["a", "b"])
                .apply(g("Z"), &["b"]),
        )
        .unwrap();
        let s = sequential_order(&c).unwrap();
        assert_eq!(s.order, vec![0, 1, 2]);
        assert_eq!(s.output_qubits, vec![0, 1]);
        let bell = |o: [bool; 2]| amplitude_canonical(&c, &BasisState { bits: vec![false, false] }, &BasisState { bits: o.to_vec() }).unwrap();
        assert_eq!(bell([false, true]), Complex64::new(0.0, 0.0));
        assert!((bell([true, true]).re + FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn empty_circuit_has_empty_order() {
        let c = lower_sequential(&SeqDesc::new("e").qubit(QubitDecl::new("a"))).unwrap();
        assert!(sequential_order(&c).unwrap().order.is_empty());
        let a = amplitude_canonical(&c, &BasisState { bits: vec![true] }, &BasisState { bits: vec![true] }).unwrap();
        assert_eq!(a, Complex64::new(1.0, 0.0));
    }
}
