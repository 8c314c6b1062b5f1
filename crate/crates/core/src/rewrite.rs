//! Circuit-to-circuit rewrites: canonical gate forms and constant folding.
//!
//! A wire is constant when it carries a fixed port. The folding passes
//! remove gates whose effect on constant wires is known, short wires that
//! an xor with a constant forces equal, and pin wires a classical gate
//! determines.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use thiserror::Error;

use crate::circuit::{validate, Circuit, GateInstance, Mode, Port, Side, Wire, WireId};
use crate::engine::{transition_amplitude, BoundaryAssignment, EvalError, EvalOptions};
use crate::gate::{builtin, builtin_name, GateClass, GateDef, LegRole, Line};

pub const EQUIVALENCE_TOLERANCE: f64 = 1e-10;
pub const MAX_EXHAUSTIVE_BITS: usize = 12;
const MAX_FIXED_POINT_ROUNDS: usize = 64;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum RewriteError {
    #[error("free {side} ports differ: {left:?} vs {right:?}")]
    InterfaceMismatch {
        side: Side,
        left: Vec<String>,
        right: Vec<String>,
    },
    #[error("{bits} free boundary bits exceed the exhaustive limit of {max}")]
    TooManyBits { bits: usize, max: usize },
    #[error("no gate {0}")]
    NoSuchGate(usize),
    #[error("unknown pass `{0}`")]
    UnknownPass(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Union-find over wire names with a polarity bit: `true` records that two
/// wires always carry complementary values.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WireMerge {
    index: HashMap<String, usize>,
    parent: Vec<usize>,
    flip: Vec<bool>,
    events: Vec<(String, String, bool)>,
}

impl WireMerge {
    fn id(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.parent.len();
        self.index.insert(name.to_string(), i);
        self.parent.push(i);
        self.flip.push(false);
        i
    }

    fn find(&self, mut x: usize) -> (usize, bool) {
        let mut parity = false;
        while self.parent[x] != x {
            parity ^= self.flip[x];
            x = self.parent[x];
        }
        (x, parity)
    }

    pub fn union(&mut self, a: &str, b: &str, complement: bool) {
        let (ia, ib) = (self.id(a), self.id(b));
        let (ra, pa) = self.find(ia);
        let (rb, pb) = self.find(ib);
        if ra != rb {
            self.parent[rb] = ra;
            self.flip[rb] = pa ^ pb ^ complement;
        }
        self.events.push((a.to_string(), b.to_string(), complement));
    }

    /// `Some(false)` for equal wires, `Some(true)` for complementary ones.
    pub fn relation(&self, a: &str, b: &str) -> Option<bool> {
        let (&ia, &ib) = (self.index.get(a)?, self.index.get(b)?);
        let (ra, pa) = self.find(ia);
        let (rb, pb) = self.find(ib);
        (ra == rb).then_some(pa ^ pb)
    }

    /// Merges in the order they were made.
    pub fn events(&self) -> &[(String, String, bool)] {
        &self.events
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Counts {
    pub wires: usize,
    pub gates: usize,
    pub internal_wires: usize,
    pub histories: u128,
}

impl Counts {
    pub fn of(c: &Circuit) -> Self {
        let cls = c.classify_wires();
        Counts {
            wires: c.wires().len(),
            gates: c.gates().len(),
            internal_wires: cls.internal.len(),
            histories: cls.history_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PassReport {
    pub name: &'static str,
    pub before: Counts,
    pub after: Counts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PassKind {
    Canonicalize,
    DropDead,
    ShortXor,
    Propagate,
}

pub const DEFAULT_PASSES: &[PassKind] = &[PassKind::Canonicalize, PassKind::Propagate];
pub const ALL_PASSES: &[PassKind] = &[
    PassKind::Canonicalize,
    PassKind::DropDead,
    PassKind::ShortXor,
    PassKind::Propagate,
];

impl PassKind {
    pub fn name(self) -> &'static str {
        match self {
            PassKind::Canonicalize => "canonicalize",
            PassKind::DropDead => "drop-dead",
            PassKind::ShortXor => "short-xor",
            PassKind::Propagate => "propagate",
        }
    }
}

impl fmt::Display for PassKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PassKind {
    type Err = RewriteError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ALL_PASSES
            .iter()
            .copied()
            .find(|p| p.name() == s)
            .ok_or_else(|| RewriteError::UnknownPass(s.to_string()))
    }
}

/// Mutable working copy of a circuit.
#[derive(Debug, Clone)]
struct Draft {
    name: String,
    mode: Mode,
    wires: Vec<Wire>,
    dead: Vec<bool>,
    gates: Vec<GateInstance>,
    inputs: Vec<Port>,
    outputs: Vec<Port>,
    norm_offset: u32,
    merges: WireMerge,
}

impl Draft {
    fn new(c: &Circuit, merges: WireMerge) -> Self {
        Draft {
            name: c.name().to_string(),
            mode: c.mode(),
            wires: c.wires().to_vec(),
            dead: vec![false; c.wires().len()],
            gates: c.gates().to_vec(),
            inputs: c.inputs().to_vec(),
            outputs: c.outputs().to_vec(),
            norm_offset: c.norm_offset(),
            merges,
        }
    }

    fn build(&self) -> Option<Circuit> {
        let mut remap = vec![usize::MAX; self.wires.len()];
        let mut wires = Vec::new();
        for (i, w) in self.wires.iter().enumerate() {
            if !self.dead[i] {
                remap[i] = wires.len();
                wires.push(w.clone());
            }
        }
        let map = |w: WireId| WireId(remap[w.0]);
        let gates = self
            .gates
            .iter()
            .map(|g| GateInstance::new(g.gate.clone(), g.binding.iter().map(|&w| map(w)).collect()))
            .collect();
        let ports = |ps: &[Port]| -> Vec<Port> {
            ps.iter()
                .map(|p| Port {
                    label: p.label.clone(),
                    wire: map(p.wire),
                    fixed: p.fixed,
                })
                .collect()
        };
        Circuit::new(self.name.clone(), self.mode, wires, gates, ports(&self.inputs), ports(&self.outputs))
            .ok()
            .map(|c| c.with_norm_offset(self.norm_offset))
    }

    fn diagnostics(&self) -> Option<usize> {
        self.build().map(|c| validate(&c).len())
    }

    /// Applies `f` to a copy and keeps it if the result still builds and
    /// validates no worse.
    fn attempt(&mut self, f: impl FnOnce(&mut Draft)) -> bool {
        let before = self.diagnostics().unwrap_or(usize::MAX);
        let mut trial = self.clone();
        f(&mut trial);
        match trial.diagnostics() {
            Some(n) if n <= before => {
                *self = trial;
                true
            }
            _ => false,
        }
    }

    fn port(&self, side: Side, w: usize) -> Option<&Port> {
        let ps = match side {
            Side::In => &self.inputs,
            Side::Out => &self.outputs,
        };
        ps.iter().find(|p| p.wire.0 == w)
    }

    fn fixed(&self, w: usize) -> Option<bool> {
        self.port(Side::In, w)
            .and_then(|p| p.fixed)
            .or_else(|| self.port(Side::Out, w).and_then(|p| p.fixed))
    }

    /// Shorts two wires; the lower id survives.
    fn merge(&mut self, a: usize, b: usize, record: bool) -> usize {
        if a == b {
            return a;
        }
        let (keep, gone) = (a.min(b), a.max(b));
        for g in &mut self.gates {
            for w in &mut g.binding {
                if w.0 == gone {
                    *w = WireId(keep);
                }
            }
        }
        for p in self.inputs.iter_mut().chain(self.outputs.iter_mut()) {
            if p.wire.0 == gone {
                p.wire = WireId(keep);
            }
        }
        self.dead[gone] = true;
        if record {
            let (k, g) = (self.wires[keep].name.clone(), self.wires[gone].name.clone());
            self.merges.union(&k, &g, false);
        }
        keep
    }

    fn has_legs(&self, w: usize) -> bool {
        self.gates.iter().any(|g| g.binding.iter().any(|b| b.0 == w))
    }

    fn has_role(&self, w: usize, role: LegRole) -> bool {
        self.gates
            .iter()
            .any(|g| g.binding.iter().zip(g.gate.legs()).any(|(b, r)| b.0 == w && *r == role))
    }

    /// Drops leg-free wires whose every port is fixed and consistent.
    fn cleanup(&mut self) -> bool {
        let mut changed = false;
        for w in 0..self.wires.len() {
            if self.dead[w] || self.has_legs(w) {
                continue;
            }
            let pin = self.port(Side::In, w).map(|p| p.fixed);
            let pout = self.port(Side::Out, w).map(|p| p.fixed);
            let removable = match (pin, pout) {
                (None, None) => false,
                (Some(Some(_)), None) | (None, Some(Some(_))) => true,
                (Some(Some(a)), Some(Some(b))) => a == b,
                _ => false,
            };
            if removable {
                self.inputs.retain(|p| p.wire.0 != w);
                self.outputs.retain(|p| p.wire.0 != w);
                self.dead[w] = true;
                changed = true;
            }
        }
        changed
    }

    fn fresh_label(&self, side: Side, base: &str) -> String {
        let ps = match side {
            Side::In => &self.inputs,
            Side::Out => &self.outputs,
        };
        let mut label = format!("{base}_c");
        let mut k = 1;
        while ps.iter().any(|p| p.label == label) {
            label = format!("{base}_c{k}");
            k += 1;
        }
        label
    }

    fn finish(self) -> (Circuit, WireMerge) {
        let c = self.build().expect("rewrite keeps the circuit well formed");
        (c, self.merges)
    }
}

fn is_sym_phase(g: &GateDef) -> bool {
    g.param().is_some() && g.legs().iter().all(|r| *r == LegRole::Symmetric)
}

fn is_xor3(g: &GateDef) -> bool {
    builtin_name(g) == Some("XOR3")
}

/// One variable per line; a through line reads its input and output leg
/// equal. `None` unless the gate is a single controlled phase over them.
fn phase_over_lines(g: &GateDef) -> Option<Complex64> {
    let lines = g.lines()?;
    let m = lines.len();
    let mut bits = vec![false; g.arity()];
    let one = Complex64::new(1.0, 0.0);
    let mut active = one;
    for idx in 0..1usize << m {
        for (j, l) in lines.iter().enumerate() {
            let b = idx >> (m - 1 - j) & 1 == 1;
            match *l {
                Line::Tap(leg) => bits[leg] = b,
                Line::Through { input, output } => {
                    bits[input] = b;
                    bits[output] = b;
                }
            }
        }
        let e = g.factor(&bits);
        if idx + 1 == 1 << m {
            active = e;
        } else if e != one {
            return None;
        }
    }
    ((active.norm() - 1.0).abs() <= 1e-12).then_some(active)
}

fn canonical_phase(e: Complex64, legs: usize) -> GateDef {
    let g = GateDef::phase(e.arg(), legs);
    if g.entries().last() == Some(&e) {
        g
    } else {
        GateDef::phase_entry(e, legs)
    }
}

fn pass_canonicalize(d: &mut Draft) -> bool {
    let mut changed = false;
    let mut gi = 0;
    while gi < d.gates.len() {
        let def = d.gates[gi].gate.clone();
        let b: Vec<usize> = d.gates[gi].binding.iter().map(|w| w.0).collect();
        match builtin_name(&def) {
            Some("H") => {
                let h = GateDef::phase_with(std::f64::consts::PI, 2, def.norm_exponent(), Some(vec![Line::Through { input: 1, output: 0 }]))
                    .expect("two legs, one line");
                d.gates[gi].gate = Arc::new(h);
                changed = true;
            }
            Some("CNOT") => {
                d.gates[gi].gate = Arc::new(builtin("XOR3").unwrap());
                changed = true;
            }
            Some("I") | Some("SWAP") => {
                let pairs: &[(usize, usize)] = if def.arity() == 2 { &[(0, 1)] } else { &[(0, 3), (1, 2)] };
                let ok = d.attempt(|t| {
                    t.gates.remove(gi);
                    let mut cur = b.clone();
                    for &(x, y) in pairs {
                        let (wx, wy) = (cur[x], cur[y]);
                        let keep = t.merge(wx, wy, true);
                        let gone = wx.max(wy);
                        for w in &mut cur {
                            if *w == gone {
                                *w = keep;
                            }
                        }
                    }
                });
                if ok {
                    changed = true;
                    continue;
                }
            }
            _ => {
                if def.param().is_none() && def.class() == GateClass::Phase {
                    if let Some(e) = phase_over_lines(&def) {
                        let lines = def.lines().unwrap().to_vec();
                        let ok = d.attempt_build(|t| {
                            let mut vars = Vec::with_capacity(lines.len());
                            for l in &lines {
                                match *l {
                                    Line::Tap(leg) => vars.push(leg),
                                    Line::Through { input, output } => {
                                        let (x, y) = (t.gates[gi].binding[input].0, t.gates[gi].binding[output].0);
                                        t.merge(x, y, true);
                                        vars.push(input);
                                    }
                                }
                            }
                            let binding = vars.iter().map(|&leg| t.gates[gi].binding[leg]).collect();
                            t.gates[gi] = GateInstance::new(Arc::new(canonical_phase(e, lines.len())), binding);
                        });
                        changed |= ok;
                    }
                }
            }
        }
        gi += 1;
    }
    changed
}

impl Draft {
    /// Like `attempt`, requiring only that the result builds.
    fn attempt_build(&mut self, f: impl FnOnce(&mut Draft)) -> bool {
        let mut trial = self.clone();
        f(&mut trial);
        if trial.build().is_some() {
            *self = trial;
            true
        } else {
            false
        }
    }
}

fn pass_drop_dead(d: &mut Draft) -> bool {
    let mut changed = false;
    let mut gi = 0;
    while gi < d.gates.len() {
        let g = d.gates[gi].clone();
        if !is_sym_phase(&g.gate) {
            gi += 1;
            continue;
        }
        let consts: Vec<Option<bool>> = g.binding.iter().map(|w| d.fixed(w.0)).collect();
        // a canonical H on a 0 wire would leave its other end unsourced
        if consts.contains(&Some(false))
            && d.attempt(|t| {
                t.norm_offset += g.gate.norm_exponent();
                t.gates.remove(gi);
            })
        {
            changed = true;
            continue;
        }
        if consts.contains(&Some(true)) {
            let mut def = (*g.gate).clone();
            let mut binding = g.binding.clone();
            for leg in (0..consts.len()).rev() {
                if consts[leg] == Some(true) {
                    def = def.restricted(leg, true).expect("restriction of a valid gate");
                    binding.remove(leg);
                }
            }
            changed |= d.attempt(|t| t.gates[gi] = GateInstance::new(Arc::new(def), binding));
        }
        gi += 1;
    }
    d.cleanup() | changed
}

fn pass_short_xor(d: &mut Draft) -> bool {
    let mut changed = false;
    let mut gi = 0;
    while gi < d.gates.len() {
        let g = d.gates[gi].clone();
        if !is_xor3(&g.gate) {
            gi += 1;
            continue;
        }
        let w: Vec<usize> = g.binding.iter().map(|x| x.0).collect();
        let consts: Vec<Option<bool>> = w.iter().map(|&x| d.fixed(x)).collect();
        let known: Vec<usize> = (0..3).filter(|&i| consts[i].is_some()).collect();
        match known.len() {
            3 => {
                let parity = consts.iter().fold(false, |acc, c| acc ^ c.unwrap());
                if !parity {
                    d.gates.remove(gi);
                    changed = true;
                    continue;
                }
            }
            1 => {
                let k = known[0];
                let rest: Vec<usize> = (0..3).filter(|&i| i != k).collect();
                let (u, v) = (w[rest[0]], w[rest[1]]);
                if consts[k] == Some(false) {
                    let ok = d.attempt(|t| {
                        t.gates.remove(gi);
                        t.merge(u, v, true);
                    });
                    if ok {
                        changed = true;
                        continue;
                    }
                } else if u != v {
                    let ok = d.attempt(|t| {
                        let neq = builtin("NEQ").unwrap();
                        t.gates[gi] = GateInstance::new(Arc::new(neq), vec![WireId(u), WireId(v)]);
                        let (a, b) = (t.wires[u].name.clone(), t.wires[v].name.clone());
                        t.merges.union(&a, &b, true);
                    });
                    changed |= ok;
                }
            }
            _ => {}
        }
        gi += 1;
    }
    d.cleanup() | changed
}

/// Classical gates that fix every unknown wire they touch are replaced by
/// fixed ports on those wires.
fn pass_classical(d: &mut Draft) -> bool {
    let mut changed = false;
    let mut gi = 0;
    while gi < d.gates.len() {
        let g = d.gates[gi].clone();
        if g.gate.class() != GateClass::Classical {
            gi += 1;
            continue;
        }
        let w: Vec<usize> = g.binding.iter().map(|x| x.0).collect();
        let mut unknown: Vec<usize> = w.iter().copied().filter(|&x| d.fixed(x).is_none()).collect();
        unknown.sort_unstable();
        unknown.dedup();
        if unknown.len() > 8 {
            gi += 1;
            continue;
        }
        let mut accepted = Vec::new();
        let mut bits = vec![false; w.len()];
        for a in 0..1usize << unknown.len() {
            for (leg, &x) in w.iter().enumerate() {
                bits[leg] = match d.fixed(x) {
                    Some(v) => v,
                    None => {
                        let j = unknown.iter().position(|&u| u == x).unwrap();
                        a >> (unknown.len() - 1 - j) & 1 == 1
                    }
                };
            }
            if g.gate.factor(&bits) != Complex64::new(0.0, 0.0) {
                accepted.push(a);
            }
        }
        if accepted.len() != 1 {
            gi += 1;
            continue;
        }
        let a = accepted[0];
        let mut trial = d.clone();
        trial.gates.remove(gi);
        let mut feasible = true;
        for (j, &x) in unknown.iter().enumerate() {
            let v = a >> (unknown.len() - 1 - j) & 1 == 1;
            let side = if trial.port(Side::In, x).is_none() && !trial.has_role(x, LegRole::Output) {
                Side::In
            } else if trial.port(Side::Out, x).is_none() && !trial.has_role(x, LegRole::Input) {
                Side::Out
            } else {
                feasible = false;
                break;
            };
            let label = trial.fresh_label(side, &trial.wires[x].name);
            let p = Port { label, wire: WireId(x), fixed: Some(v) };
            match side {
                Side::In => trial.inputs.push(p),
                Side::Out => trial.outputs.push(p),
            }
        }
        if feasible && trial.diagnostics().is_some_and(|n| n <= d.diagnostics().unwrap_or(usize::MAX)) {
            *d = trial;
            changed = true;
            continue;
        }
        gi += 1;
    }
    d.cleanup() | changed
}

fn pass_propagate(d: &mut Draft) -> bool {
    let mut changed = false;
    for _ in 0..MAX_FIXED_POINT_ROUNDS {
        let mut round = pass_drop_dead(d);
        round |= pass_short_xor(d);
        round |= pass_classical(d);
        round |= d.cleanup();
        if !round {
            break;
        }
        changed = true;
    }
    changed
}

fn run_on(c: &Circuit, kind: PassKind, merges: WireMerge) -> (Circuit, WireMerge) {
    let mut d = Draft::new(c, merges);
    match kind {
        PassKind::Canonicalize => pass_canonicalize(&mut d),
        PassKind::DropDead => pass_drop_dead(&mut d),
        PassKind::ShortXor => pass_short_xor(&mut d),
        PassKind::Propagate => pass_propagate(&mut d),
    };
    d.finish()
}

/// H becomes a two-leg PHASE(pi) with one normalization unit, CNOT becomes
/// XOR3, and a diagonal gate becomes a PHASE on its fused wires. I and
/// SWAP disappear into wire merges.
pub fn canonicalize(c: &Circuit) -> Circuit {
    run_on(c, PassKind::Canonicalize, WireMerge::default()).0
}

/// Removes PHASE gates with a leg on a constant-0 wire and strips legs on
/// constant-1 wires.
pub fn drop_dead_controlled_gates(c: &Circuit) -> Circuit {
    run_on(c, PassKind::DropDead, WireMerge::default()).0
}

/// Shorts the two free legs of an XOR3 whose third leg is constant 0; a
/// constant 1 leaves an inequality between them.
pub fn short_xor_constant(c: &Circuit) -> Circuit {
    short_xor_constant_merges(c).0
}

/// [`short_xor_constant`] with the merges it made.
pub fn short_xor_constant_merges(c: &Circuit) -> (Circuit, WireMerge) {
    run_on(c, PassKind::ShortXor, WireMerge::default())
}

/// All folding passes to a fixed point.
pub fn propagate_constants(c: &Circuit) -> Circuit {
    run_on(c, PassKind::Propagate, WireMerge::default()).0
}

#[derive(Debug, Clone)]
pub struct Rewritten {
    pub circuit: Circuit,
    pub reports: Vec<PassReport>,
    pub merges: WireMerge,
}

pub fn run_passes(c: &Circuit, passes: &[PassKind]) -> Rewritten {
    let mut circuit = c.clone();
    let mut merges = WireMerge::default();
    let mut reports = Vec::with_capacity(passes.len());
    for &p in passes {
        let before = Counts::of(&circuit);
        let (next, m) = run_on(&circuit, p, merges);
        merges = m;
        reports.push(PassReport {
            name: p.name(),
            before,
            after: Counts::of(&next),
        });
        circuit = next;
    }
    Rewritten { circuit, reports, merges }
}

/// Relabels gate `index` as its transpose. The tensor over wires is
/// unchanged, so amplitudes are too; only the time reading changes.
pub fn transpose(c: &Circuit, index: usize) -> Result<Circuit, RewriteError> {
    if index >= c.gates().len() {
        return Err(RewriteError::NoSuchGate(index));
    }
    let mut gates = c.gates().to_vec();
    gates[index].gate = Arc::new(gates[index].gate.transposed());
    Ok(Circuit::new(c.name(), c.mode(), c.wires().to_vec(), gates, c.inputs().to_vec(), c.outputs().to_vec())
        .expect("same wiring")
        .with_norm_offset(c.norm_offset()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    Exhaustive,
    Sampled { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equivalence {
    pub equivalent: bool,
    pub max_deviation: f64,
    pub checked: usize,
}

fn free_labels(c: &Circuit, side: Side) -> Vec<String> {
    let mut v: Vec<String> = c.ports(side).iter().filter(|p| p.fixed.is_none()).map(|p| p.label.clone()).collect();
    v.sort();
    v
}

/// Compares resolved amplitudes over assignments of the free ports.
pub fn equivalent(a: &Circuit, b: &Circuit, mode: CheckMode) -> Result<Equivalence, RewriteError> {
    let mut sides = Vec::new();
    for side in [Side::In, Side::Out] {
        let (la, lb) = (free_labels(a, side), free_labels(b, side));
        if la != lb {
            return Err(RewriteError::InterfaceMismatch { side, left: la, right: lb });
        }
        sides.push(la);
    }
    let (ins, outs) = (&sides[0], &sides[1]);
    let bits = ins.len() + outs.len();
    let opts = EvalOptions::default();
    let query = |idx: &dyn Fn(usize) -> bool| {
        let mut q = BoundaryAssignment::new();
        for (i, l) in ins.iter().enumerate() {
            q = q.input(l.clone(), idx(i));
        }
        for (i, l) in outs.iter().enumerate() {
            q = q.output(l.clone(), idx(ins.len() + i));
        }
        q
    };
    let mut max_dev = 0.0f64;
    let mut checked = 0;
    let mut check = |q: BoundaryAssignment| -> Result<(), RewriteError> {
        let x = transition_amplitude(a, &q, &opts)?.resolved();
        let y = transition_amplitude(b, &q, &opts)?.resolved();
        max_dev = max_dev.max((x - y).norm());
        checked += 1;
        Ok(())
    };
    match mode {
        CheckMode::Exhaustive => {
            if bits > MAX_EXHAUSTIVE_BITS {
                return Err(RewriteError::TooManyBits { bits, max: MAX_EXHAUSTIVE_BITS });
            }
            for n in 0..1usize << bits {
                check(query(&|i| n >> (bits - 1 - i) & 1 == 1))?;
            }
        }
        CheckMode::Sampled { samples, seed } => {
            let mut rng = StdRng::seed_from_u64(seed);
            for _ in 0..samples {
                let draw: Vec<bool> = (0..bits).map(|_| rng.gen()).collect();
                check(query(&|i| draw[i]))?;
            }
        }
    }
    Ok(Equivalence {
        equivalent: max_dev <= EQUIVALENCE_TOLERANCE,
        max_deviation: max_dev,
        checked,
    })
}
