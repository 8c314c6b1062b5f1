//! Lowering of time-ordered qubit-line descriptions to netlists.
//!
//! Each qubit line is cut into a fresh wire segment wherever a gate's
//! through line passes, while taps (controls, phases) attach to the current
//! segment. Segments are named after the qubit and the time slices they
//! span, so the segment of `a` between gates 1 and 3 is `a12`.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, GateInstance, Mode, Port, Wire, WireId};
use crate::gate::{GateDef, Line};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QubitDecl {
    pub name: String,
    pub input: Option<bool>,
    pub output: Option<bool>,
}

impl QubitDecl {
    pub fn new(name: impl Into<String>) -> Self {
        QubitDecl {
            name: name.into(),
            input: None,
            output: None,
        }
    }

    pub fn with_input(mut self, v: bool) -> Self {
        self.input = Some(v);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeqOp {
    pub gate: Arc<GateDef>,
    pub qubits: Vec<String>,
}

/// Qubit lines plus gates in time order.
#[derive(Debug, Clone, Default)]
pub struct SeqDesc {
    pub name: String,
    pub qubits: Vec<QubitDecl>,
    pub ops: Vec<SeqOp>,
}

impl SeqDesc {
    pub fn new(name: impl Into<String>) -> Self {
        SeqDesc {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn qubit(mut self, q: QubitDecl) -> Self {
        self.qubits.push(q);
        self
    }

    pub fn apply(mut self, gate: impl Into<Arc<GateDef>>, qubits: &[&str]) -> Self {
        self.push(gate, qubits);
        self
    }

    pub fn push(&mut self, gate: impl Into<Arc<GateDef>>, qubits: &[&str]) {
        self.ops.push(SeqOp {
            gate: gate.into(),
            qubits: qubits.iter().map(|q| q.to_string()).collect(),
        });
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum LowerError {
    #[error("op {op}: undeclared qubit `{qubit}`")]
    UndeclaredQubit { op: usize, qubit: String },
    #[error("op {op}: qubit `{qubit}` appears more than once")]
    RepeatedQubit { op: usize, qubit: String },
    #[error("op {op}: gate {gate} acts on {lines} qubits, {given} given")]
    Arity {
        op: usize,
        gate: String,
        lines: usize,
        given: usize,
    },
    #[error("op {op}: gate {gate} has no qubit-line reading")]
    NotSequential { op: usize, gate: String },
    #[error("duplicate qubit `{0}`")]
    DuplicateQubit(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

struct Segment {
    qubit: usize,
    start: usize,
    end: usize,
}

pub fn lower_sequential(desc: &SeqDesc) -> Result<Circuit, LowerError> {
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, q) in desc.qubits.iter().enumerate() {
        if index.insert(q.name.as_str(), i).is_some() {
            return Err(LowerError::DuplicateQubit(q.name.clone()));
        }
    }
    let m = desc.ops.len();
    let mut segments: Vec<Segment> = (0..desc.qubits.len())
        .map(|q| Segment { qubit: q, start: 0, end: m })
        .collect();
    let mut current: Vec<usize> = (0..desc.qubits.len()).collect();
    let mut gates = Vec::with_capacity(m);

    for (op_idx, op) in desc.ops.iter().enumerate() {
        let t = op_idx + 1;
        let lines = op.gate.lines().ok_or_else(|| LowerError::NotSequential {
            op: t,
            gate: op.gate.name().to_string(),
        })?;
        if lines.len() != op.qubits.len() {
            return Err(LowerError::Arity {
                op: t,
                gate: op.gate.name().to_string(),
                lines: lines.len(),
                given: op.qubits.len(),
            });
        }
        let mut seen = HashSet::new();
        let mut binding = vec![WireId(usize::MAX); op.gate.arity()];
        for (line, qname) in lines.iter().zip(&op.qubits) {
            let q = *index.get(qname.as_str()).ok_or_else(|| LowerError::UndeclaredQubit {
                op: t,
                qubit: qname.clone(),
            })?;
            if !seen.insert(q) {
                return Err(LowerError::RepeatedQubit {
                    op: t,
                    qubit: qname.clone(),
                });
            }
            match *line {
                Line::Tap(l) => binding[l] = WireId(current[q]),
                Line::Through { input, output } => {
                    let old = current[q];
                    segments[old].end = t - 1;
                    binding[input] = WireId(old);
                    segments.push(Segment { qubit: q, start: t, end: m });
                    current[q] = segments.len() - 1;
                    binding[output] = WireId(current[q]);
                }
            }
        }
        gates.push(GateInstance::new(op.gate.clone(), binding));
    }

    let names = segment_names(desc, &segments, m);
    let wires = names.into_iter().map(|name| Wire { name }).collect();
    let inputs = desc
        .qubits
        .iter()
        .enumerate()
        .map(|(q, decl)| Port {
            label: decl.name.clone(),
            wire: WireId(q),
            fixed: decl.input,
        })
        .collect();
    let outputs = desc
        .qubits
        .iter()
        .enumerate()
        .map(|(q, decl)| Port {
            label: decl.name.clone(),
            wire: WireId(current[q]),
            fixed: decl.output,
        })
        .collect();
    Ok(Circuit::new(desc.name.clone(), Mode::Seq, wires, gates, inputs, outputs)?)
}

fn segment_names(desc: &SeqDesc, segments: &[Segment], m: usize) -> Vec<String> {
    let compact = m < 10;
    let mut used: HashSet<String> = HashSet::new();
    segments
        .iter()
        .map(|s| {
            let q = &desc.qubits[s.qubit].name;
            let base = if s.start == s.end {
                format!("{q}{}", s.start)
            } else if compact {
                format!("{q}{}{}", s.start, s.end)
            } else {
                format!("{q}{}_{}", s.start, s.end)
            };
            let mut name = base.clone();
            let mut k = 1;
            while !used.insert(name.clone()) {
                name = format!("{base}_{k}");
                k += 1;
            }
            name
        })
        .collect()
}
