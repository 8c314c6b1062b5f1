//! Sum over histories.
//!
//! Internal wires are the free variables. A history index is a binary
//! counter over the internal wires sorted by id, first wire most
//! significant. Evaluation walks the counter depth first: each gate is
//! scheduled right after the last of its variables is assigned, so a
//! structural zero prunes the whole subtree below it.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::circuit::{Circuit, GateInstance, History, Side};
use crate::gate::{norm_scale, GateClass, GateDef};

pub const DEFAULT_MAX_WIRES: usize = 40;
pub const DEFAULT_CHUNK_LOG2: u32 = 16;
/// Hard ceiling: the history counter is a `u64`.
pub const MAX_SUPPORTED_WIRES: usize = 63;
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalOptions {
    pub max_wires: usize,
    /// Histories per chunk, as a power of two.
    pub chunk_log2: u32,
    pub threads: usize,
    pub early_termination: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            max_wires: DEFAULT_MAX_WIRES,
            chunk_log2: DEFAULT_CHUNK_LOG2,
            threads: 1,
            early_termination: true,
        }
    }
}

impl EvalOptions {
    /// Defaults, with `HISTQ_MAX_WIRES` honoured when set to an integer.
    pub fn from_env() -> Self {
        let mut o = EvalOptions::default();
        if let Some(n) = std::env::var("HISTQ_MAX_WIRES").ok().and_then(|v| v.trim().parse().ok()) {
            o.max_wires = n;
        }
        o
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("{wires} internal wires exceed the guard of {max}")]
    GuardExceeded { wires: usize, max: usize },
    #[error("{side} port `{label}` is not bound")]
    UnboundPort { side: Side, label: String },
    #[error("no {side} port named `{label}`")]
    UnknownPort { side: Side, label: String },
    #[error("{side} port `{label}` is fixed to {fixed}, query asks for {given}")]
    BoundaryConflict {
        side: Side,
        label: String,
        fixed: u8,
        given: u8,
    },
    #[error("{side} bits `{bits}`: expected {expected} characters from 0, 1, -")]
    BadBits {
        side: Side,
        bits: String,
        expected: usize,
    },
    #[error("history assigns {got} wires, circuit has {expected}")]
    HistoryLength { expected: usize, got: usize },
}

/// `value * 2^(-norm_exponent/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitude {
    pub value: Complex64,
    pub norm_exponent: i64,
}

impl Amplitude {
    pub fn zero(norm_exponent: i64) -> Self {
        Amplitude {
            value: Complex64::new(0.0, 0.0),
            norm_exponent,
        }
    }

    pub fn resolved(&self) -> Complex64 {
        self.value * norm_scale(self.norm_exponent)
    }

    pub fn probability(&self) -> f64 {
        self.resolved().norm_sqr()
    }
}

/// Bit string over an ordered list of ports, most significant first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisState {
    pub bits: Vec<bool>,
}

impl BasisState {
    pub fn from_index(index: u64, len: usize) -> Self {
        BasisState {
            bits: (0..len).map(|i| index >> (len - 1 - i) & 1 == 1).collect(),
        }
    }

    pub fn index(&self) -> u64 {
        self.bits.iter().fold(0, |acc, &b| acc << 1 | b as u64)
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Query bits keyed by port label, per side.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BoundaryAssignment {
    pub inputs: BTreeMap<String, bool>,
    pub outputs: BTreeMap<String, bool>,
}

impl BoundaryAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn input(mut self, label: impl Into<String>, v: bool) -> Self {
        self.inputs.insert(label.into(), v);
        self
    }

    pub fn output(mut self, label: impl Into<String>, v: bool) -> Self {
        self.outputs.insert(label.into(), v);
        self
    }

    /// Binds ports from bit strings covering every port of a side in
    /// declaration order. `-` leaves a port unbound, which resolves to its
    /// fixed value if it has one.
    pub fn from_bits(c: &Circuit, inputs: &str, outputs: &str) -> Result<Self, EvalError> {
        let mut b = BoundaryAssignment::new();
        b.bind_bits(c, Side::In, inputs)?;
        b.bind_bits(c, Side::Out, outputs)?;
        Ok(b)
    }

    pub fn bind_bits(&mut self, c: &Circuit, side: Side, bits: &str) -> Result<(), EvalError> {
        let ports = c.ports(side);
        let chars: Vec<char> = bits.chars().collect();
        let bad = || EvalError::BadBits {
            side,
            bits: bits.to_string(),
            expected: ports.len(),
        };
        if chars.len() != ports.len() {
            return Err(bad());
        }
        let map = match side {
            Side::In => &mut self.inputs,
            Side::Out => &mut self.outputs,
        };
        for (p, ch) in ports.iter().zip(chars) {
            match ch {
                '0' => {
                    map.insert(p.label.clone(), false);
                }
                '1' => {
                    map.insert(p.label.clone(), true);
                }
                '-' => {}
                _ => return Err(bad()),
            }
        }
        Ok(())
    }

    fn side(&self, side: Side) -> &BTreeMap<String, bool> {
        match side {
            Side::In => &self.inputs,
            Side::Out => &self.outputs,
        }
    }
}

/// Per-port values on one side, after merging fixed values with a query.
fn resolve_side(c: &Circuit, b: &BoundaryAssignment, side: Side, allow_free: bool) -> Result<Vec<Option<bool>>, EvalError> {
    let ports = c.ports(side);
    for label in b.side(side).keys() {
        if !ports.iter().any(|p| p.label == *label) {
            return Err(EvalError::UnknownPort { side, label: label.clone() });
        }
    }
    ports
        .iter()
        .map(|p| match (p.fixed, b.side(side).get(&p.label).copied()) {
            (Some(f), Some(g)) if f != g => Err(EvalError::BoundaryConflict {
                side,
                label: p.label.clone(),
                fixed: f as u8,
                given: g as u8,
            }),
            (Some(f), _) => Ok(Some(f)),
            (None, Some(g)) => Ok(Some(g)),
            (None, None) if allow_free => Ok(None),
            (None, None) => Err(EvalError::UnboundPort { side, label: p.label.clone() }),
        })
        .collect()
}

/// Input and output port values for a query that binds every free port.
pub fn resolve_boundary(c: &Circuit, b: &BoundaryAssignment) -> Result<(Vec<bool>, Vec<bool>), EvalError> {
    let ins = resolve_side(c, b, Side::In, false)?;
    let outs = resolve_side(c, b, Side::Out, false)?;
    Ok((ins.into_iter().flatten().collect(), outs.into_iter().flatten().collect()))
}

pub fn classify_gate(g: &GateDef) -> GateClass {
    g.class()
}

/// Product of every gate factor for one total history. Stops at the first
/// structural zero.
pub fn history_contribution(c: &Circuit, h: &History) -> Result<Amplitude, EvalError> {
    if h.values.len() != c.wires().len() {
        return Err(EvalError::HistoryLength {
            expected: c.wires().len(),
            got: h.values.len(),
        });
    }
    let k = c.total_norm_exponent();
    let mut value = Complex64::new(1.0, 0.0);
    for g in c.gates() {
        let (e, _) = crate::circuit::gate_factor(g, h);
        if e.re == 0.0 && e.im == 0.0 {
            return Ok(Amplitude::zero(k));
        }
        value *= e;
    }
    Ok(Amplitude { value, norm_exponent: k })
}

struct PlannedGate<'a> {
    entries: &'a [num_complex::Complex64],
    wires: Vec<usize>,
}

/// Evaluation plan for one boundary: the variable order, external wire
/// values, and gates grouped by the depth at which they become decidable.
struct Plan<'a> {
    /// Wire index of each variable, ascending by id.
    vars: Vec<usize>,
    base: Vec<bool>,
    gates: Vec<PlannedGate<'a>>,
    /// `levels[d]` is the range of `gates` checked once `d` variables are set.
    levels: Vec<std::ops::Range<usize>>,
    /// A passthrough wire with differing in/out values.
    inconsistent: bool,
    norm_exponent: i64,
}

fn class_rank(c: GateClass) -> u8 {
    match c {
        GateClass::Classical => 0,
        GateClass::Phase => 1,
        GateClass::General => 2,
    }
}

impl<'a> Plan<'a> {
    fn compile(c: &'a Circuit, ins: &[Option<bool>], outs: &[Option<bool>]) -> Self {
        let n = c.wires().len();
        let mut base = vec![false; n];
        let mut inconsistent = false;
        let mut set = vec![None::<bool>; n];
        for (ports, vals) in [(c.inputs(), ins), (c.outputs(), outs)] {
            for (p, v) in ports.iter().zip(vals) {
                let v = v.expect("resolved boundary");
                match set[p.wire.0] {
                    Some(prev) if prev != v => inconsistent = true,
                    _ => set[p.wire.0] = Some(v),
                }
                base[p.wire.0] = v;
            }
        }
        let vars: Vec<usize> = c.classify_wires().internal.iter().map(|w| w.0).collect();
        let mut depth_of = vec![0usize; n];
        for (j, &w) in vars.iter().enumerate() {
            depth_of[w] = j + 1;
        }
        let mut order: Vec<(usize, u8, usize)> = c
            .gates()
            .iter()
            .enumerate()
            .map(|(gi, g): (usize, &GateInstance)| {
                let level = g.binding.iter().map(|w| depth_of[w.0]).max().unwrap_or(0);
                (level, class_rank(g.gate.class()), gi)
            })
            .collect();
        order.sort_unstable();
        let mut levels = vec![0..0; vars.len() + 1];
        let mut gates = Vec::with_capacity(order.len());
        for (pos, &(level, _, gi)) in order.iter().enumerate() {
            if levels[level].is_empty() {
                levels[level] = pos..pos;
            }
            levels[level].end = pos + 1;
            let g = &c.gates()[gi];
            gates.push(PlannedGate {
                entries: g.gate.entries(),
                wires: g.binding.iter().map(|w| w.0).collect(),
            });
        }
        Plan {
            vars,
            base,
            gates,
            levels,
            inconsistent,
            norm_exponent: c.total_norm_exponent(),
        }
    }

    #[inline]
    fn apply_level(&self, level: usize, mut prod: Complex64, mut rejected: bool, values: &[bool], early: bool) -> (Complex64, bool) {
        for g in &self.gates[self.levels[level].clone()] {
            let idx = g.wires.iter().fold(0usize, |acc, &w| acc << 1 | values[w] as usize);
            let e = g.entries[idx];
            if e.re == 0.0 && e.im == 0.0 {
                rejected = true;
                if early {
                    return (prod * e, true);
                }
            }
            prod *= e;
        }
        (prod, rejected)
    }

    fn descend(&self, depth: usize, prod: Complex64, rejected: bool, values: &mut [bool], early: bool, acc: &mut Tally) {
        if depth == self.vars.len() {
            acc.sum += prod;
            if !rejected {
                acc.accepted += 1;
            }
            return;
        }
        let w = self.vars[depth];
        for bit in [false, true] {
            values[w] = bit;
            let (p, r) = self.apply_level(depth + 1, prod, rejected, values, early);
            if r && early {
                continue;
            }
            self.descend(depth + 1, p, r, values, early, acc);
        }
    }

    /// Sum over the histories whose top `prefix_len` variables spell `chunk`.
    fn chunk(&self, chunk: u64, prefix_len: usize, values: &mut [bool], early: bool) -> Tally {
        let mut tally = Tally::default();
        let (mut prod, mut rejected) = self.apply_level(0, Complex64::new(1.0, 0.0), false, values, early);
        if rejected && early {
            return tally;
        }
        for d in 0..prefix_len {
            values[self.vars[d]] = chunk >> (prefix_len - 1 - d) & 1 == 1;
            (prod, rejected) = self.apply_level(d + 1, prod, rejected, values, early);
            if rejected && early {
                return tally;
            }
        }
        self.descend(prefix_len, prod, rejected, values, early, &mut tally);
        tally
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    sum: Complex64,
    accepted: u64,
}

/// Amplitude plus bookkeeping for one boundary query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub amplitude: Amplitude,
    pub internal_wires: usize,
    pub accepted: u64,
}

fn check_guard(w: usize, opts: &EvalOptions) -> Result<(), EvalError> {
    let max = opts.max_wires.min(MAX_SUPPORTED_WIRES);
    if w > max {
        return Err(EvalError::GuardExceeded { wires: w, max });
    }
    Ok(())
}

/// Full evaluation of a boundary query.
pub fn evaluate(c: &Circuit, b: &BoundaryAssignment, opts: &EvalOptions) -> Result<Evaluation, EvalError> {
    let ins = resolve_side(c, b, Side::In, false)?;
    let outs = resolve_side(c, b, Side::Out, false)?;
    let w = c.internal_wire_count();
    check_guard(w, opts)?;
    let plan = Plan::compile(c, &ins, &outs);
    Ok(run_plan(&plan, opts))
}

fn run_plan(plan: &Plan<'_>, opts: &EvalOptions) -> Evaluation {
    let w = plan.vars.len();
    if plan.inconsistent {
        return Evaluation {
            amplitude: Amplitude::zero(plan.norm_exponent),
            internal_wires: w,
            accepted: 0,
        };
    }
    let inner = (opts.chunk_log2 as usize).min(w);
    let prefix_len = w - inner;
    let chunks = 1u64 << prefix_len;
    let early = opts.early_termination;
    let mut total = Tally::default();

    if opts.threads <= 1 || chunks == 1 {
        let mut values = plan.base.clone();
        for ci in 0..chunks {
            let t = plan.chunk(ci, prefix_len, &mut values, early);
            total.sum += t.sum;
            total.accepted += t.accepted;
        }
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.threads)
            .build()
            .expect("thread pool");
        let batch = (opts.threads * 4) as u64;
        let slots = batch.min(chunks) as usize;
        let mut buf = vec![Tally::default(); slots];
        // one scratch history per slot, reused by every batch
        let mut scratch = vec![plan.base.clone(); slots];
        let mut start = 0u64;
        while start < chunks {
            let len = batch.min(chunks - start) as usize;
            pool.install(|| {
                buf[..len]
                    .par_iter_mut()
                    .zip(scratch[..len].par_iter_mut())
                    .enumerate()
                    .for_each(|(i, (slot, values))| *slot = plan.chunk(start + i as u64, prefix_len, values, early))
            });
            // Ascending chunk order keeps the result independent of threads.
            for t in &buf[..len] {
                total.sum += t.sum;
                total.accepted += t.accepted;
            }
            start += len as u64;
        }
    }
    Evaluation {
        amplitude: Amplitude {
            value: total.sum,
            norm_exponent: plan.norm_exponent,
        },
        internal_wires: w,
        accepted: total.accepted,
    }
}

pub fn transition_amplitude(c: &Circuit, b: &BoundaryAssignment, opts: &EvalOptions) -> Result<Amplitude, EvalError> {
    evaluate(c, b, opts).map(|e| e.amplitude)
}

pub fn transition_probability(c: &Circuit, b: &BoundaryAssignment, opts: &EvalOptions) -> Result<f64, EvalError> {
    transition_amplitude(c, b, opts).map(|a| a.probability())
}

/// Histories with no structurally zero factor.
pub fn accepted_history_count(c: &Circuit, b: &BoundaryAssignment, opts: &EvalOptions) -> Result<u64, EvalError> {
    evaluate(c, b, opts).map(|e| e.accepted)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    /// Output port labels, in declaration order.
    pub labels: Vec<String>,
    /// One entry per assignment of the free output ports, ascending.
    pub outcomes: Vec<(BasisState, f64)>,
    pub total: f64,
}

impl Distribution {
    pub fn probability(&self, s: &BasisState) -> f64 {
        self.outcomes.iter().find(|(b, _)| b == s).map_or(0.0, |(_, p)| *p)
    }

    /// Total probability outside `1 ± 1e-9`; expected for some bent-wire
    /// circuits.
    pub fn is_abnormal(&self) -> bool {
        (self.total - 1.0).abs() > DISTRIBUTION_TOLERANCE
    }
}

/// Probabilities over the output ports left free by `b` (output bindings
/// in `b` are honoured, so a partial distribution is a marginal slice).
pub fn output_distribution(c: &Circuit, b: &BoundaryAssignment, opts: &EvalOptions) -> Result<Distribution, EvalError> {
    let ins = resolve_side(c, b, Side::In, false)?;
    let outs = resolve_side(c, b, Side::Out, true)?;
    let w = c.internal_wire_count();
    check_guard(w, opts)?;
    let free: Vec<usize> = (0..outs.len()).filter(|&i| outs[i].is_none()).collect();
    if free.len() > MAX_SUPPORTED_WIRES {
        return Err(EvalError::GuardExceeded { wires: free.len(), max: MAX_SUPPORTED_WIRES });
    }
    let mut outcomes = Vec::with_capacity(1usize << free.len());
    let mut total = 0.0;
    let mut vals = outs.clone();
    for idx in 0..1u64 << free.len() {
        for (k, &port) in free.iter().enumerate() {
            vals[port] = Some(idx >> (free.len() - 1 - k) & 1 == 1);
        }
        let plan = Plan::compile(c, &ins, &vals);
        let p = run_plan(&plan, opts).amplitude.probability();
        total += p;
        let state = BasisState {
            bits: vals.iter().map(|v| v.unwrap()).collect(),
        };
        outcomes.push((state, p));
    }
    Ok(Distribution {
        labels: c.outputs().iter().map(|p| p.label.clone()).collect(),
        outcomes,
        total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::builtin;
    use crate::lower::{lower_sequential, QubitDecl, SeqDesc};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn seq(qubits: &[&str], ops: &[(&str, &[&str])]) -> Circuit {
        let mut d = SeqDesc::new("t");
        for q in qubits {
            d.qubits.push(QubitDecl::new(*q));
        }
        for (g, qs) in ops {
            d.push(builtin(g).unwrap(), qs);
        }
        lower_sequential(&d).unwrap()
    }

    fn amp(c: &Circuit, i: &str, o: &str) -> Amplitude {
        transition_amplitude(c, &BoundaryAssignment::from_bits(c, i, o).unwrap(), &EvalOptions::default()).unwrap()
    }

    #[test]
    fn single_hadamard() {
        let c = seq(&["q"], &[("H", &["q"])]);
        assert_eq!(amp(&c, "0", "0").resolved(), Complex64::new(FRAC_1_SQRT_2, 0.0));
        assert_eq!(amp(&c, "1", "1").resolved(), Complex64::new(-FRAC_1_SQRT_2, 0.0));
        assert!((amp(&c, "0", "1").probability() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn hh_cancels_exactly() {
        let c = seq(&["q"], &[("H", &["q"]), ("H", &["q"])]);
        let a = amp(&c, "0", "1");
        assert_eq!(a.value, Complex64::new(0.0, 0.0));
        assert_eq!(a.norm_exponent, 2);
        let b = BoundaryAssignment::from_bits(&c, "0", "0").unwrap();
        assert_eq!(accepted_history_count(&c, &b, &EvalOptions::default()).unwrap(), 2);
    }

    #[test]
    fn identity_wire() {
        let c = seq(&["q"], &[]);
        assert_eq!(amp(&c, "0", "0").resolved(), Complex64::new(1.0, 0.0));
        assert_eq!(amp(&c, "0", "1").probability(), 0.0);
    }

    #[test]
    fn bell_distribution() {
        let c = seq(&["a", "b"], &[("H", &["a"]), ("CNOT", &["a", "b"])]);
        let b = BoundaryAssignment::from_bits(&c, "00", "--").unwrap();
        let d = output_distribution(&c, &b, &EvalOptions::default()).unwrap();
        let ps: Vec<f64> = d.outcomes.iter().map(|(_, p)| *p).collect();
        for (p, want) in ps.iter().zip([0.5, 0.0, 0.0, 0.5]) {
            assert!((p - want).abs() < 1e-12);
        }
        assert!(!d.is_abnormal());
    }

    #[test]
    fn minus_one_gate() {
        let g = std::sync::Arc::new(GateDef::phase(std::f64::consts::PI, 0));
        let c = Circuit::new("m", crate::circuit::Mode::Net, vec![], vec![GateInstance::new(g, vec![])], vec![], vec![]).unwrap();
        let h = History { values: vec![] };
        assert_eq!(history_contribution(&c, &h).unwrap().value, Complex64::new(-1.0, 0.0));
        assert_eq!(amp(&c, "", "").resolved(), Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn query_errors() {
        let c = seq(&["q"], &[("H", &["q"])]);
        let e = transition_amplitude(&c, &BoundaryAssignment::new().input("q", false), &EvalOptions::default()).unwrap_err();
        assert!(matches!(e, EvalError::UnboundPort { side: Side::Out, .. }));
        let e = transition_amplitude(&c, &BoundaryAssignment::new().input("z", false), &EvalOptions::default()).unwrap_err();
        assert!(matches!(e, EvalError::UnknownPort { .. }));
        let hh = seq(&["q"], &[("H", &["q"]), ("H", &["q"])]);
        let opts = EvalOptions { max_wires: 0, ..Default::default() };
        let b = BoundaryAssignment::from_bits(&hh, "0", "0").unwrap();
        assert!(matches!(transition_amplitude(&hh, &b, &opts), Err(EvalError::GuardExceeded { wires: 1, max: 0 })));
    }

    #[test]
    fn pruning_chunks_and_threads_agree() {
        let c = seq(
            &["a", "b", "c"],
            &[
                ("H", &["a"]),
                ("H", &["b"]),
                ("CNOT", &["a", "c"]),
                ("T", &["c"]),
                ("H", &["c"]),
                ("TOFFOLI", &["a", "b", "c"]),
                ("H", &["a"]),
                ("H", &["b"]),
            ],
        );
        let b = BoundaryAssignment::from_bits(&c, "010", "110").unwrap();
        let base = evaluate(&c, &b, &EvalOptions::default()).unwrap();
        for (chunk_log2, threads, early) in [(16, 1, false), (1, 1, true), (1, 1, false), (0, 3, true), (2, 4, false)] {
            let opts = EvalOptions { chunk_log2, threads, early_termination: early, ..Default::default() };
            let e = evaluate(&c, &b, &opts).unwrap();
            assert_eq!(e.accepted, base.accepted);
            if chunk_log2 == 16 {
                assert_eq!(e.amplitude.value, base.amplitude.value);
            }
            assert!((e.amplitude.resolved() - base.amplitude.resolved()).norm() < 1e-14);
        }
        let fixed = EvalOptions { chunk_log2: 1, ..Default::default() };
        let a = evaluate(&c, &b, &fixed).unwrap();
        for threads in [2, 3, 8] {
            let e = evaluate(&c, &b, &EvalOptions { threads, ..fixed }).unwrap();
            assert_eq!(e.amplitude.value, a.amplitude.value);
        }
    }

    #[test]
    fn classes_follow_gates() {
        assert_eq!(classify_gate(&builtin("TOFFOLI").unwrap()), GateClass::Classical);
        assert_eq!(classify_gate(&builtin("CCZ").unwrap()), GateClass::Phase);
        assert_eq!(classify_gate(&builtin("H").unwrap()), GateClass::General);
    }

    #[test]
    fn basis_state_index() {
        let s = BasisState::from_index(5, 3);
        assert_eq!(s.to_string(), "101");
        assert_eq!(s.index(), 5);
    }
}
