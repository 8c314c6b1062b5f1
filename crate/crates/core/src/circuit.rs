//! Topological netlist IR.
//!
//! A circuit is a set of wires, each carrying one classical bit per
//! history, and a list of gate instances binding their legs to wires.
//! Boundary ports attach circuit inputs and outputs to wires; a wire with
//! at least one port is external, every other wire is internal and is
//! summed over.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::gate::{GateDef, LegRole};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WireId(pub usize);

impl WireId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wire {
    pub name: String,
}

/// A circuit boundary end. `fixed` pins the value (a constant preparation
/// or postselection); otherwise the query supplies it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Port {
    pub label: String,
    pub wire: WireId,
    pub fixed: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    In,
    Out,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::In => "input",
            Side::Out => "output",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateInstance {
    pub gate: Arc<GateDef>,
    pub binding: Vec<WireId>,
}

impl GateInstance {
    pub fn new(gate: Arc<GateDef>, binding: Vec<WireId>) -> Self {
        GateInstance { gate, binding }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Net,
    Seq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WireKind {
    Internal,
    External,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CircuitError {
    #[error("gate {index} ({name}) has {legs} legs but {bound} wires bound")]
    Arity {
        index: usize,
        name: String,
        legs: usize,
        bound: usize,
    },
    #[error("gate {index} binds unknown wire #{wire}")]
    UnknownWire { index: usize, wire: usize },
    #[error("duplicate wire name `{0}`")]
    DuplicateWire(String),
    #[error("duplicate {side} port label `{label}`")]
    DuplicatePort { side: Side, label: String },
    #[error("port `{label}` refers to unknown wire #{wire}")]
    PortWire { label: String, wire: usize },
    #[error("wire `{wire}` has more than one {side} port")]
    PortConflict { wire: String, side: Side },
}

/// Immutable netlist. Rewrites build new circuits.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    name: String,
    mode: Mode,
    wires: Vec<Wire>,
    gates: Vec<GateInstance>,
    inputs: Vec<Port>,
    outputs: Vec<Port>,
    norm_offset: u32,
}

impl Circuit {
    pub fn new(
        name: impl Into<String>,
        mode: Mode,
        wires: Vec<Wire>,
        gates: Vec<GateInstance>,
        inputs: Vec<Port>,
        outputs: Vec<Port>,
    ) -> Result<Self, CircuitError> {
        let mut names = HashSet::new();
        for w in &wires {
            if !names.insert(w.name.as_str()) {
                return Err(CircuitError::DuplicateWire(w.name.clone()));
            }
        }
        for (index, g) in gates.iter().enumerate() {
            if g.binding.len() != g.gate.arity() {
                return Err(CircuitError::Arity {
                    index,
                    name: g.gate.name().to_string(),
                    legs: g.gate.arity(),
                    bound: g.binding.len(),
                });
            }
            if let Some(w) = g.binding.iter().find(|w| w.0 >= wires.len()) {
                return Err(CircuitError::UnknownWire { index, wire: w.0 });
            }
        }
        for (side, ports) in [(Side::In, &inputs), (Side::Out, &outputs)] {
            let mut labels = HashSet::new();
            let mut used = HashSet::new();
            for p in ports {
                if p.wire.0 >= wires.len() {
                    return Err(CircuitError::PortWire {
                        label: p.label.clone(),
                        wire: p.wire.0,
                    });
                }
                if !labels.insert(p.label.as_str()) {
                    return Err(CircuitError::DuplicatePort {
                        side,
                        label: p.label.clone(),
                    });
                }
                if !used.insert(p.wire) {
                    return Err(CircuitError::PortConflict {
                        wire: wires[p.wire.0].name.clone(),
                        side,
                    });
                }
            }
        }
        Ok(Circuit {
            name: name.into(),
            mode,
            wires,
            gates,
            inputs,
            outputs,
            norm_offset: 0,
        })
    }

    /// Adds `k` to the global normalization exponent (an overall factor
    /// `2^(-k/2)` left behind by removed gates).
    pub fn with_norm_offset(mut self, k: u32) -> Self {
        self.norm_offset = k;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn wires(&self) -> &[Wire] {
        &self.wires
    }

    pub fn wire(&self, id: WireId) -> &Wire {
        &self.wires[id.0]
    }

    pub fn wire_ids(&self) -> impl Iterator<Item = WireId> {
        (0..self.wires.len()).map(WireId)
    }

    pub fn wire_by_name(&self, name: &str) -> Option<WireId> {
        self.wires.iter().position(|w| w.name == name).map(WireId)
    }

    pub fn gates(&self) -> &[GateInstance] {
        &self.gates
    }

    pub fn inputs(&self) -> &[Port] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Port] {
        &self.outputs
    }

    pub fn ports(&self, side: Side) -> &[Port] {
        match side {
            Side::In => &self.inputs,
            Side::Out => &self.outputs,
        }
    }

    pub fn norm_offset(&self) -> u32 {
        self.norm_offset
    }

    /// Sum of every gate's normalization exponent plus the global offset.
    pub fn total_norm_exponent(&self) -> i64 {
        self.norm_offset as i64
            + self
                .gates
                .iter()
                .map(|g| g.gate.norm_exponent() as i64)
                .sum::<i64>()
    }

    pub fn boundary_in(&self, w: WireId) -> Option<&Port> {
        self.inputs.iter().find(|p| p.wire == w)
    }

    pub fn boundary_out(&self, w: WireId) -> Option<&Port> {
        self.outputs.iter().find(|p| p.wire == w)
    }

    pub fn kind(&self, w: WireId) -> WireKind {
        if self.boundary_in(w).is_some() || self.boundary_out(w).is_some() {
            WireKind::External
        } else {
            WireKind::Internal
        }
    }

    /// Value pinned on the wire by a fixed port, if any.
    pub fn fixed_value(&self, w: WireId) -> Option<bool> {
        self.boundary_in(w)
            .and_then(|p| p.fixed)
            .or_else(|| self.boundary_out(w).and_then(|p| p.fixed))
    }

    /// Legs bound to `w` as `(gate index, leg index)`.
    pub fn legs_on(&self, w: WireId) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.gates.iter().enumerate().flat_map(move |(gi, g)| {
            g.binding
                .iter()
                .enumerate()
                .filter(move |(_, &b)| b == w)
                .map(move |(li, _)| (gi, li))
        })
    }

    pub fn classify_wires(&self) -> WireClasses {
        let (internal, external) = self
            .wire_ids()
            .partition(|&w| self.kind(w) == WireKind::Internal);
        WireClasses { internal, external }
    }

    pub fn internal_wire_count(&self) -> usize {
        self.wire_ids()
            .filter(|&w| self.kind(w) == WireKind::Internal)
            .count()
    }
}

/// Partition of a circuit's wires; both lists ascend by id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireClasses {
    pub internal: Vec<WireId>,
    pub external: Vec<WireId>,
}

impl WireClasses {
    /// Number of histories, `2^w`, saturating at `u128::MAX`.
    pub fn history_count(&self) -> u128 {
        1u128.checked_shl(self.internal.len() as u32).unwrap_or(u128::MAX)
    }
}

/// A total assignment of bits to wires, indexed by wire id.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct History {
    pub values: Vec<bool>,
}

impl History {
    pub fn get(&self, w: WireId) -> bool {
        self.values[w.0]
    }
}

/// Listed tensor entry a gate instance contributes to a history, with the
/// gate's normalization exponent.
pub fn gate_factor(g: &GateInstance, h: &History) -> (Complex64, u32) {
    let idx = g
        .binding
        .iter()
        .fold(0usize, |acc, &w| (acc << 1) | h.get(w) as usize);
    (g.gate.entries()[idx], g.gate.norm_exponent())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DiagnosticKind {
    NonUnitary { gate: usize, defect: f64 },
    MultipleProducers { wire: WireId },
    MultipleConsumers { wire: WireId },
    BoundaryOnInternal { wire: WireId, side: Side },
    DanglingLeg { gate: usize, leg: usize },
    OverConstrained { wire: WireId },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub kind: DiagnosticKind,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{sev}: {}", self.message)
    }
}

pub const UNITARITY_TOLERANCE: f64 = 1e-12;

/// Structural and numerical checks. An empty list means the circuit is
/// clean; warnings flag topological features (bent or forked wires) that
/// the sum over histories handles but a time-ordered circuit cannot.
pub fn validate(c: &Circuit) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (gi, g) in c.gates().iter().enumerate() {
        if let Some(defect) = g.gate.unitarity_defect() {
            if defect > UNITARITY_TOLERANCE {
                out.push(Diagnostic {
                    severity: Severity::Error,
                    kind: DiagnosticKind::NonUnitary { gate: gi, defect },
                    message: format!(
                        "gate {gi} ({}) is not unitary (defect {defect:.3e})",
                        g.gate.name()
                    ),
                });
            }
        }
    }
    for w in c.wire_ids() {
        let name = &c.wire(w).name;
        let mut producers = 0;
        let mut consumers = 0;
        let mut unoriented = 0;
        for (gi, li) in c.legs_on(w) {
            match c.gates()[gi].gate.legs()[li] {
                LegRole::Output => producers += 1,
                LegRole::Input => consumers += 1,
                LegRole::Symmetric => unoriented += 1,
                LegRole::Control => {}
            }
        }
        let port_in = c.boundary_in(w);
        let port_out = c.boundary_out(w);
        if port_in.is_some() && producers > 0 {
            out.push(Diagnostic {
                severity: Severity::Error,
                kind: DiagnosticKind::BoundaryOnInternal { wire: w, side: Side::In },
                message: format!("wire `{name}` has an input port but is driven by a gate output"),
            });
        } else if producers > 1 {
            out.push(Diagnostic {
                severity: Severity::Warning,
                kind: DiagnosticKind::MultipleProducers { wire: w },
                message: format!("wire `{name}` is the output of {producers} gates"),
            });
        }
        if port_out.is_some() && consumers > 0 {
            out.push(Diagnostic {
                severity: Severity::Error,
                kind: DiagnosticKind::BoundaryOnInternal { wire: w, side: Side::Out },
                message: format!("wire `{name}` has an output port but feeds a gate input"),
            });
        } else if consumers > 1 {
            out.push(Diagnostic {
                severity: Severity::Warning,
                kind: DiagnosticKind::MultipleConsumers { wire: w },
                message: format!("wire `{name}` is the input of {consumers} gates"),
            });
        }
        // An oriented leg with nothing on the opposite end.
        let has_end = |side_ports: bool, opposite: usize| side_ports || opposite > 0 || unoriented > 0;
        if producers > 0 && !has_end(port_out.is_some(), consumers) {
            let (gi, li) = c
                .legs_on(w)
                .find(|&(gi, li)| c.gates()[gi].gate.legs()[li] == LegRole::Output)
                .unwrap();
            out.push(Diagnostic {
                severity: Severity::Warning,
                kind: DiagnosticKind::DanglingLeg { gate: gi, leg: li },
                message: format!("output leg {li} of gate {gi} drives wire `{name}` which ends nowhere"),
            });
        }
        if consumers > 0 && !has_end(port_in.is_some(), producers) {
            let (gi, li) = c
                .legs_on(w)
                .find(|&(gi, li)| c.gates()[gi].gate.legs()[li] == LegRole::Input)
                .unwrap();
            out.push(Diagnostic {
                severity: Severity::Warning,
                kind: DiagnosticKind::DanglingLeg { gate: gi, leg: li },
                message: format!("input leg {li} of gate {gi} reads wire `{name}` which starts nowhere"),
            });
        }
        if let (Some(Port { fixed: Some(a), .. }), Some(Port { fixed: Some(b), .. })) = (port_in, port_out) {
            if a != b {
                out.push(Diagnostic {
                    severity: Severity::Warning,
                    kind: DiagnosticKind::OverConstrained { wire: w },
                    message: format!("wire `{name}` is fixed to different values at its two ports"),
                });
            }
        }
    }
    out
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::builtin;

    fn wires(names: &[&str]) -> Vec<Wire> {
        names.iter().map(|n| Wire { name: n.to_string() }).collect()
    }

    fn port(label: &str, w: usize) -> Port {
        Port {
            label: label.into(),
            wire: WireId(w),
            fixed: None,
        }
    }

    #[test]
    fn empty_circuit_has_one_external_wire() {
        let c = Circuit::new("e", Mode::Net, wires(&["a"]), vec![], vec![port("a", 0)], vec![port("a", 0)]).unwrap();
        let cls = c.classify_wires();
        assert!(cls.internal.is_empty());
        assert_eq!(cls.external, vec![WireId(0)]);
        assert!(validate(&c).is_empty());
    }

    #[test]
    fn arity_is_checked() {
        let g = GateInstance::new(Arc::new(builtin("CNOT").unwrap()), vec![WireId(0)]);
        let err = Circuit::new("x", Mode::Net, wires(&["a"]), vec![g], vec![], vec![]).unwrap_err();
        assert!(matches!(err, CircuitError::Arity { legs: 3, bound: 1, .. }));
    }

    #[test]
    fn two_producers_are_reported() {
        let x = Arc::new(builtin("X").unwrap());
        let gates = vec![
            GateInstance::new(x.clone(), vec![WireId(1), WireId(0)]),
            GateInstance::new(x, vec![WireId(1), WireId(2)]),
        ];
        let c = Circuit::new(
            "mp",
            Mode::Net,
            wires(&["a", "b", "c"]),
            gates,
            vec![port("a", 0), port("c", 2)],
            vec![port("b", 1)],
        )
        .unwrap();
        let d = validate(&c);
        assert!(d
            .iter()
            .any(|d| matches!(d.kind, DiagnosticKind::MultipleProducers { wire: WireId(1) })));
    }

    #[test]
    fn gate_factor_reads_bound_wires() {
        let xor = Arc::new(builtin("XOR3").unwrap());
        let g = GateInstance::new(xor, vec![WireId(0), WireId(1), WireId(2)]);
        let h = History { values: vec![true, true, false] };
        assert_eq!(gate_factor(&g, &h).0, Complex64::new(1.0, 0.0));
        let h = History { values: vec![true, false, false] };
        assert_eq!(gate_factor(&g, &h).0, Complex64::new(0.0, 0.0));
    }
}
