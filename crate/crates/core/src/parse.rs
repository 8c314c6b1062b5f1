//! Circuit file format: reader and writer.
//!
//! ```text
//! version 1
//! mode net|seq
//! # net mode
//! wire <name> [in[=<0|1>]] [out[=<0|1>]]
//! input <label> <wire> [<0|1>]
//! output <label> <wire> [<0|1>]
//! gate <GATENAME> <wire>[:in|:out|:tap|:s]...
//! phase <theta> [norm=<k>] <wire>[:in|:out|:tap|:s]...
//! norm <k>
//! # seq mode
//! qubit <name> [in=<0|1>] [out=<0|1>]
//! apply <GATENAME> <qubit>...
//! phase <theta> <qubit>...
//! # either mode
//! name <ident>
//! matrix <NAME> <k> [norm=<n>]
//!   <re:im> ... (2^k rows of 2^k entries)
//! ```
//!
//! Leg suffixes override a gate's qubit-line reading: `:in`/`:out` pair up
//! as through lines, `:tap` is a tap, `:s` marks an unoriented leg (no line
//! reading at all).

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::circuit::{
    has_errors, validate, Circuit, CircuitError, GateInstance, Mode, Port, Severity, Wire, WireId,
};
use crate::gate::{builtin, builtin_name, GateDef, GateError, LegRole, Line, BUILTIN_NAMES};
use crate::lower::{lower_sequential, LowerError, QubitDecl, SeqDesc, SeqOp};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown directive `{0}`")]
    UnknownDirective(String),
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("gate `{gate}` expects {expected} operands, got {got}")]
    Arity {
        gate: String,
        expected: usize,
        got: usize,
    },
    #[error("duplicate wire `{0}`")]
    DuplicateWire(String),
    #[error("undeclared wire `{0}`")]
    UndeclaredWire(String),
    #[error("gate `{gate}` is not unitary (defect {defect:.3e})")]
    NonUnitary { gate: String, defect: f64 },
    #[error("`{0}` redefines a built-in gate")]
    Redefinition(String),
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error(transparent)]
    Lower(#[from] LowerError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("invalid circuit: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Error, PartialEq)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

fn err<T>(line: usize, kind: ParseErrorKind) -> Result<T, ParseError> {
    Err(ParseError { line, kind })
}

fn syntax<T>(line: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    err(line, ParseErrorKind::Syntax(msg.into()))
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn ident(line: usize, s: &str) -> Result<String, ParseError> {
    if is_identifier(s) {
        Ok(s.to_string())
    } else {
        syntax(line, format!("`{s}` is not a valid name"))
    }
}

fn bit(line: usize, s: &str) -> Result<bool, ParseError> {
    match s {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => syntax(line, format!("expected 0 or 1, got `{s}`")),
    }
}

fn uint(line: usize, s: &str) -> Result<u32, ParseError> {
    s.parse()
        .or_else(|_| syntax(line, format!("expected a nonnegative integer, got `{s}`")))
}

fn real(line: usize, s: &str) -> Result<f64, ParseError> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => syntax(line, format!("expected a decimal number, got `{s}`")),
    }
}

/// Parses an angle: a decimal, or a multiple of `pi` such as `pi`, `-pi/2`,
/// `3pi/4`, `2*pi/3`.
pub fn parse_angle(s: &str) -> Option<f64> {
    if let Ok(v) = s.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let (sign, rest) = match s.strip_prefix('-') {
        Some(r) => (-1.0, r),
        None => (1.0, s.strip_prefix('+').unwrap_or(s)),
    };
    let (num, den) = match rest.split_once('/') {
        Some((n, d)) => (n, d.parse::<f64>().ok().filter(|d| *d != 0.0 && d.is_finite())?),
        None => (rest, 1.0),
    };
    let coef = num.strip_suffix("pi")?;
    let coef = coef.strip_suffix('*').unwrap_or(coef);
    let coef = if coef.is_empty() { 1.0 } else { coef.parse::<f64>().ok()? };
    Some(sign * coef * PI / den)
}

/// Renders an angle so that [`parse_angle`] returns the same value.
pub fn format_angle(theta: f64) -> String {
    for den in [1i64, 2, 4, 8] {
        let k = theta * den as f64 / PI;
        let kr = k.round();
        if kr.abs() < 64.0 && PI * kr / den as f64 == theta {
            let k = kr as i64;
            if k == 0 {
                return "0".into();
            }
            let sign = if k < 0 { "-" } else { "" };
            let mag = k.abs();
            let num = if mag == 1 { "pi".to_string() } else { format!("{mag}pi") };
            return if den == 1 {
                format!("{sign}{num}")
            } else {
                format!("{sign}{num}/{den}")
            };
        }
    }
    format!("{theta:?}")
}

fn entry(line: usize, s: &str) -> Result<Complex64, ParseError> {
    let (re, im) = match s.split_once(':') {
        Some((re, im)) => (real(line, re)?, real(line, im)?),
        None => (real(line, s)?, 0.0),
    };
    Ok(Complex64::new(re, im))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum LegHint {
    In,
    Out,
    Tap,
    Unoriented,
}

fn split_leg(line: usize, tok: &str) -> Result<(&str, Option<LegHint>), ParseError> {
    match tok.split_once(':') {
        None => Ok((tok, None)),
        Some((name, hint)) => {
            let h = match hint {
                "in" => LegHint::In,
                "out" => LegHint::Out,
                "tap" => LegHint::Tap,
                "s" => LegHint::Unoriented,
                _ => return syntax(line, format!("unknown leg suffix `:{hint}`")),
            };
            Ok((name, Some(h)))
        }
    }
}

fn lines_from_hints(line: usize, hints: &[Option<LegHint>]) -> Result<Option<Option<Vec<Line>>>, ParseError> {
    if hints.iter().all(Option::is_none) {
        return Ok(None);
    }
    if hints.iter().any(Option::is_none) {
        return syntax(line, "leg suffixes must be given for all legs or none");
    }
    if hints.contains(&Some(LegHint::Unoriented)) {
        return Ok(Some(None));
    }
    let ins: Vec<usize> = (0..hints.len()).filter(|&i| hints[i] == Some(LegHint::In)).collect();
    let outs: Vec<usize> = (0..hints.len()).filter(|&i| hints[i] == Some(LegHint::Out)).collect();
    if ins.len() != outs.len() {
        return syntax(line, "unbalanced :in/:out legs");
    }
    let mut lines: Vec<Line> = (0..hints.len())
        .filter(|&i| hints[i] == Some(LegHint::Tap))
        .map(Line::Tap)
        .collect();
    lines.extend(ins.into_iter().zip(outs).map(|(input, output)| Line::Through { input, output }));
    Ok(Some(Some(lines)))
}

struct PendingMatrix {
    line: usize,
    name: String,
    k: usize,
    norm: u32,
    rows: Vec<Vec<Complex64>>,
}

#[derive(Default)]
struct NetState {
    wires: Vec<Wire>,
    index: HashMap<String, WireId>,
    decl_line: Vec<usize>,
    inputs: Vec<Port>,
    outputs: Vec<Port>,
    gates: Vec<GateInstance>,
    gate_lines: Vec<usize>,
    norm: u32,
}

impl NetState {
    fn wire(&self, line: usize, name: &str) -> Result<WireId, ParseError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| ParseError {
                line,
                kind: ParseErrorKind::UndeclaredWire(name.to_string()),
            })
    }

    fn add_port(&mut self, line: usize, out: bool, label: String, wire: WireId, fixed: Option<bool>) -> Result<(), ParseError> {
        let ports = if out { &mut self.outputs } else { &mut self.inputs };
        if ports.iter().any(|p| p.label == label || p.wire == wire) {
            return syntax(line, format!("duplicate {} port `{label}`", if out { "output" } else { "input" }));
        }
        ports.push(Port { label, wire, fixed });
        Ok(())
    }
}

/// Parses and validates a circuit file. Seq-mode files are lowered to a
/// netlist.
pub fn parse_circuit(text: &str) -> Result<Circuit, ParseError> {
    let mut mode: Option<Mode> = None;
    let mut name = String::from("circuit");
    let mut customs: HashMap<String, Arc<GateDef>> = HashMap::new();
    let mut pending: Option<PendingMatrix> = None;
    let mut net = NetState::default();
    let mut seq = SeqDesc::default();
    let mut seq_lines: Vec<usize> = Vec::new();
    let mut seen_version = false;
    let mut seen_content = false;

    let lookup = |customs: &HashMap<String, Arc<GateDef>>, line: usize, g: &str| -> Result<Arc<GateDef>, ParseError> {
        if let Some(d) = customs.get(g) {
            return Ok(d.clone());
        }
        builtin(g).map(Arc::new).ok_or_else(|| ParseError {
            line,
            kind: ParseErrorKind::UnknownGate(g.to_string()),
        })
    };

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = content.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }

        if let Some(pm) = pending.as_mut() {
            let dim = 1usize << pm.k;
            if toks.len() != dim {
                return syntax(line, format!("matrix `{}` row needs {dim} entries, got {}", pm.name, toks.len()));
            }
            let row = toks.iter().map(|t| entry(line, t)).collect::<Result<Vec<_>, _>>()?;
            pm.rows.push(row);
            if pm.rows.len() == dim {
                let pm = pending.take().unwrap();
                let def = GateDef::from_matrix(pm.name.clone(), pm.k, &pm.rows, pm.norm)
                    .map_err(|e| ParseError { line: pm.line, kind: e.into() })?;
                let defect = def.unitarity_defect().unwrap_or(0.0);
                if defect > crate::circuit::UNITARITY_TOLERANCE {
                    return err(pm.line, ParseErrorKind::NonUnitary { gate: pm.name, defect });
                }
                customs.insert(pm.name, Arc::new(def));
            }
            continue;
        }

        let current_mode = |seen_content: &mut bool| {
            *seen_content = true;
            mode.unwrap_or(Mode::Net)
        };

        match toks[0] {
            "version" => {
                if seen_version || seen_content || mode.is_some() {
                    return syntax(line, "`version` must come first");
                }
                if toks.len() != 2 || toks[1] != "1" {
                    return syntax(line, "only `version 1` is supported");
                }
                seen_version = true;
            }
            "mode" => {
                if mode.is_some() || seen_content {
                    return syntax(line, "`mode` must precede circuit content and appear once");
                }
                mode = Some(match toks.get(1..) {
                    Some(["net"]) => Mode::Net,
                    Some(["seq"]) => Mode::Seq,
                    _ => return syntax(line, "expected `mode net` or `mode seq`"),
                });
            }
            "name" => {
                if toks.len() != 2 {
                    return syntax(line, "expected `name <ident>`");
                }
                name = ident(line, toks[1])?;
            }
            "matrix" => {
                if toks.len() < 3 || toks.len() > 4 {
                    return syntax(line, "expected `matrix <NAME> <k> [norm=<n>]`");
                }
                let gname = ident(line, toks[1])?;
                if BUILTIN_NAMES.contains(&gname.as_str()) || gname == "PHASE" {
                    return err(line, ParseErrorKind::Redefinition(gname));
                }
                if customs.contains_key(&gname) {
                    return syntax(line, format!("matrix `{gname}` defined twice"));
                }
                let k = uint(line, toks[2])? as usize;
                if k > crate::gate::MAX_LEGS / 2 {
                    return syntax(line, format!("matrix `{gname}` is too large"));
                }
                let norm = match toks.get(3) {
                    Some(t) => match t.strip_prefix("norm=") {
                        Some(v) => uint(line, v)?,
                        None => return syntax(line, format!("unexpected `{t}`")),
                    },
                    None => 0,
                };
                pending = Some(PendingMatrix { line, name: gname, k, norm, rows: Vec::new() });
            }
            "wire" => {
                if current_mode(&mut seen_content) != Mode::Net {
                    return syntax(line, "`wire` is only valid in net mode");
                }
                if toks.len() < 2 {
                    return syntax(line, "expected `wire <name>`");
                }
                let wname = ident(line, toks[1])?;
                if net.index.contains_key(&wname) {
                    return err(line, ParseErrorKind::DuplicateWire(wname));
                }
                let id = WireId(net.wires.len());
                net.wires.push(Wire { name: wname.clone() });
                net.index.insert(wname.clone(), id);
                net.decl_line.push(line);
                for t in &toks[2..] {
                    let (key, val) = match t.split_once('=') {
                        Some((k, v)) => (k, Some(bit(line, v)?)),
                        None => (*t, None),
                    };
                    match key {
                        "in" => net.add_port(line, false, wname.clone(), id, val)?,
                        "out" => net.add_port(line, true, wname.clone(), id, val)?,
                        _ => return syntax(line, format!("unexpected `{t}`")),
                    }
                }
            }
            d @ ("input" | "output") => {
                if current_mode(&mut seen_content) != Mode::Net {
                    return syntax(line, format!("`{d}` is only valid in net mode"));
                }
                if toks.len() < 3 || toks.len() > 4 {
                    return syntax(line, format!("expected `{d} <label> <wire> [<0|1>]`"));
                }
                let label = ident(line, toks[1])?;
                let w = net.wire(line, toks[2])?;
                let fixed = toks.get(3).map(|t| bit(line, t)).transpose()?;
                net.add_port(line, d == "output", label, w, fixed)?;
            }
            "norm" => {
                if current_mode(&mut seen_content) != Mode::Net {
                    return syntax(line, "`norm` is only valid in net mode");
                }
                if toks.len() != 2 {
                    return syntax(line, "expected `norm <k>`");
                }
                net.norm += uint(line, toks[1])?;
            }
            "qubit" => {
                if current_mode(&mut seen_content) != Mode::Seq {
                    return syntax(line, "`qubit` is only valid in seq mode");
                }
                if toks.len() < 2 {
                    return syntax(line, "expected `qubit <name>`");
                }
                let qname = ident(line, toks[1])?;
                if seq.qubits.iter().any(|q| q.name == qname) {
                    return err(line, ParseErrorKind::DuplicateWire(qname));
                }
                let mut decl = QubitDecl::new(qname);
                for t in &toks[2..] {
                    match t.split_once('=') {
                        Some(("in", v)) => decl.input = Some(bit(line, v)?),
                        Some(("out", v)) => decl.output = Some(bit(line, v)?),
                        _ => return syntax(line, format!("unexpected `{t}`")),
                    }
                }
                seq.qubits.push(decl);
            }
            "apply" => {
                if current_mode(&mut seen_content) != Mode::Seq {
                    return syntax(line, "`apply` is only valid in seq mode");
                }
                if toks.len() < 2 {
                    return syntax(line, "expected `apply <GATE> <qubit>...`");
                }
                let def = lookup(&customs, line, toks[1])?;
                let operands = &toks[2..];
                let expected = def.lines().map(|l| l.len()).ok_or_else(|| ParseError {
                    line,
                    kind: ParseErrorKind::Syntax(format!("gate `{}` cannot be applied to qubit lines", toks[1])),
                })?;
                if operands.len() != expected {
                    return err(line, ParseErrorKind::Arity { gate: toks[1].into(), expected, got: operands.len() });
                }
                seq_push(&mut seq, &mut seq_lines, line, def, operands)?;
            }
            "phase" => {
                let m = current_mode(&mut seen_content);
                if toks.len() < 2 {
                    return syntax(line, "expected `phase <theta> <wire>...`");
                }
                let theta = parse_angle(toks[1])
                    .map_or_else(|| syntax(line, format!("bad angle `{}`", toks[1])), Ok)?;
                let mut rest = &toks[2..];
                let mut norm = 0;
                if let Some(v) = rest.first().and_then(|t| t.strip_prefix("norm=")) {
                    if m == Mode::Seq {
                        return syntax(line, "`norm=` is only valid in net mode");
                    }
                    norm = uint(line, v)?;
                    rest = &rest[1..];
                }
                if rest.len() > crate::gate::MAX_LEGS {
                    return syntax(line, "too many phase legs");
                }
                match m {
                    Mode::Seq => {
                        let def = Arc::new(GateDef::phase(theta, rest.len()));
                        seq_push(&mut seq, &mut seq_lines, line, def, rest)?;
                    }
                    Mode::Net => {
                        let (ids, hints) = net_legs(&net, line, rest)?;
                        let mut def = GateDef::phase_with(theta, ids.len(), norm, Some((0..ids.len()).map(Line::Tap).collect()))
                            .map_err(|e| ParseError { line, kind: e.into() })?;
                        if let Some(lines) = lines_from_hints(line, &hints)? {
                            def = def.with_lines(lines).map_err(|e| ParseError { line, kind: e.into() })?;
                        }
                        net.gates.push(GateInstance::new(Arc::new(def), ids));
                        net.gate_lines.push(line);
                    }
                }
            }
            "gate" => {
                if current_mode(&mut seen_content) != Mode::Net {
                    return syntax(line, "`gate` is only valid in net mode (use `apply` in seq mode)");
                }
                if toks.len() < 2 {
                    return syntax(line, "expected `gate <GATE> <wire>...`");
                }
                let mut def = lookup(&customs, line, toks[1])?;
                let (ids, hints) = net_legs(&net, line, &toks[2..])?;
                if ids.len() != def.arity() {
                    return err(line, ParseErrorKind::Arity { gate: toks[1].into(), expected: def.arity(), got: ids.len() });
                }
                if let Some(lines) = lines_from_hints(line, &hints)? {
                    let d = (*def).clone().with_lines(lines).map_err(|e| ParseError { line, kind: e.into() })?;
                    def = Arc::new(d);
                }
                net.gates.push(GateInstance::new(def, ids));
                net.gate_lines.push(line);
            }
            other => return err(line, ParseErrorKind::UnknownDirective(other.to_string())),
        }
    }
    if let Some(pm) = pending {
        return syntax(pm.line, format!("matrix `{}` is missing rows", pm.name));
    }

    let last_line = text.lines().count().max(1);
    let circuit = match mode.unwrap_or(Mode::Net) {
        Mode::Seq => {
            seq.name = name;
            lower_sequential(&seq).map_err(|e| {
                let line = match &e {
                    LowerError::UndeclaredQubit { op, .. }
                    | LowerError::RepeatedQubit { op, .. }
                    | LowerError::Arity { op, .. }
                    | LowerError::NotSequential { op, .. } => seq_lines.get(op - 1).copied().unwrap_or(last_line),
                    _ => last_line,
                };
                ParseError { line, kind: e.into() }
            })?
        }
        Mode::Net => Circuit::new(name, Mode::Net, net.wires, net.gates, net.inputs, net.outputs)
            .map_err(|e| ParseError { line: last_line, kind: e.into() })?
            .with_norm_offset(net.norm),
    };
    let diags = validate(&circuit);
    if has_errors(&diags) {
        let first = diags.iter().find(|d| d.severity == Severity::Error).unwrap();
        let line = match first.kind {
            crate::circuit::DiagnosticKind::NonUnitary { gate, .. } => net.gate_lines.get(gate).copied(),
            crate::circuit::DiagnosticKind::BoundaryOnInternal { wire, .. } => net.decl_line.get(wire.0).copied(),
            _ => None,
        }
        .unwrap_or(last_line);
        return err(line, ParseErrorKind::Invalid(first.message.clone()));
    }
    Ok(circuit)
}

fn seq_push(seq: &mut SeqDesc, seq_lines: &mut Vec<usize>, line: usize, def: Arc<GateDef>, operands: &[&str]) -> Result<(), ParseError> {
    for q in operands {
        if !seq.qubits.iter().any(|d| d.name == *q) {
            return err(line, ParseErrorKind::UndeclaredWire(q.to_string()));
        }
    }
    seq.ops.push(SeqOp {
        gate: def,
        qubits: operands.iter().map(|s| s.to_string()).collect(),
    });
    seq_lines.push(line);
    Ok(())
}

fn net_legs(net: &NetState, line: usize, toks: &[&str]) -> Result<(Vec<WireId>, Vec<Option<LegHint>>), ParseError> {
    let mut ids = Vec::with_capacity(toks.len());
    let mut hints = Vec::with_capacity(toks.len());
    for t in toks {
        let (name, hint) = split_leg(line, t)?;
        ids.push(net.wire(line, name)?);
        hints.push(hint);
    }
    Ok((ids, hints))
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EmitError {
    #[error("gate {index} ({name}) has no file representation")]
    Unrepresentable { index: usize, name: String },
}

fn leg_hints(lines: Option<&[Line]>, arity: usize) -> Vec<&'static str> {
    let mut hints = vec![":s"; arity];
    if let Some(ls) = lines {
        for l in ls {
            match *l {
                Line::Tap(i) => hints[i] = ":tap",
                Line::Through { input, output } => {
                    hints[input] = ":in";
                    hints[output] = ":out";
                }
            }
        }
    }
    hints
}

/// Writes a circuit as a net-mode file that [`parse_circuit`] reads back to
/// the same netlist (up to custom-gate naming).
pub fn emit_circuit(c: &Circuit) -> Result<String, EmitError> {
    let mut header = String::new();
    let mut body = String::new();
    writeln!(header, "version 1").unwrap();
    writeln!(header, "mode net").unwrap();
    if is_identifier(c.name()) {
        writeln!(header, "name {}", c.name()).unwrap();
    }
    if c.norm_offset() > 0 {
        writeln!(header, "norm {}", c.norm_offset()).unwrap();
    }

    let ordered = |ports: &[Port]| {
        ports.windows(2).all(|w| w[0].wire < w[1].wire) && ports.iter().all(|p| p.label == c.wire(p.wire).name)
    };
    let shorthand = ordered(c.inputs()) && ordered(c.outputs());
    for w in c.wire_ids() {
        let mut l = format!("wire {}", c.wire(w).name);
        if shorthand {
            for (tag, port) in [("in", c.boundary_in(w)), ("out", c.boundary_out(w))] {
                match port {
                    Some(Port { fixed: Some(v), .. }) => write!(l, " {tag}={}", *v as u8).unwrap(),
                    Some(_) => write!(l, " {tag}").unwrap(),
                    None => {}
                }
            }
        }
        writeln!(body, "{l}").unwrap();
    }
    if !shorthand {
        for (tag, ports) in [("input", c.inputs()), ("output", c.outputs())] {
            for p in ports {
                let mut l = format!("{tag} {} {}", p.label, c.wire(p.wire).name);
                if let Some(v) = p.fixed {
                    write!(l, " {}", v as u8).unwrap();
                }
                writeln!(body, "{l}").unwrap();
            }
        }
    }

    let mut matrices: Vec<(String, Arc<GateDef>)> = Vec::new();
    for (index, g) in c.gates().iter().enumerate() {
        let names: Vec<&str> = g.binding.iter().map(|&w| c.wire(w).name.as_str()).collect();
        let def = &g.gate;
        if let Some(theta) = def.param() {
            if def.legs().iter().all(|r| *r == LegRole::Symmetric) {
                let mut l = format!("phase {}", format_angle(theta));
                if def.norm_exponent() > 0 {
                    write!(l, " norm={}", def.norm_exponent()).unwrap();
                }
                let default = GateDef::phase(theta, def.arity());
                let hinted = def.lines() != default.lines();
                let hints = leg_hints(def.lines(), def.arity());
                for (i, n) in names.iter().enumerate() {
                    write!(l, " {n}{}", if hinted { hints[i] } else { "" }).unwrap();
                }
                writeln!(body, "{l}").unwrap();
                continue;
            }
        }
        // Built-in up to its line reading.
        let base = builtin(def.name()).filter(|b| {
            b.legs() == def.legs() && b.entries() == def.entries() && b.norm_exponent() == def.norm_exponent()
        });
        if let Some(b) = base {
            let hinted = b.lines() != def.lines();
            let hints = leg_hints(def.lines(), def.arity());
            let mut l = format!("gate {}", def.name());
            for (i, n) in names.iter().enumerate() {
                write!(l, " {n}{}", if hinted { hints[i] } else { "" }).unwrap();
            }
            writeln!(body, "{l}").unwrap();
            continue;
        }
        // Anything with only through lines is a matrix over those lines.
        let throughs: Option<Vec<(usize, usize)>> = def.lines().and_then(|ls| {
            ls.iter()
                .map(|l| match *l {
                    Line::Through { input, output } => Some((input, output)),
                    Line::Tap(_) => None,
                })
                .collect()
        });
        let Some(throughs) = throughs.filter(|t| !t.is_empty()) else {
            return Err(EmitError::Unrepresentable { index, name: def.name().to_string() });
        };
        let mname = match matrices.iter().find(|(_, d)| Arc::ptr_eq(d, def) || **d == **def) {
            Some((n, _)) => n.clone(),
            None => {
                let mut base = if is_identifier(def.name()) { def.name().to_string() } else { "U".into() };
                if BUILTIN_NAMES.contains(&base.as_str()) || base == "PHASE" {
                    base.push_str("_m");
                }
                let mut n = base.clone();
                let mut k = 1;
                while matrices.iter().any(|(m, _)| *m == n) {
                    n = format!("{base}_{k}");
                    k += 1;
                }
                matrices.push((n.clone(), def.clone()));
                n
            }
        };
        let mut l = format!("gate {mname}");
        for &(_, o) in &throughs {
            write!(l, " {}", names[o]).unwrap();
        }
        for &(i, _) in &throughs {
            write!(l, " {}", names[i]).unwrap();
        }
        writeln!(body, "{l}").unwrap();
    }

    let mut defs = String::new();
    for (name, def) in &matrices {
        let k = def.lines().unwrap().len();
        let m = def.listed_line_matrix().unwrap();
        let dim = 1usize << k;
        if def.norm_exponent() > 0 {
            writeln!(defs, "matrix {name} {k} norm={}", def.norm_exponent()).unwrap();
        } else {
            writeln!(defs, "matrix {name} {k}").unwrap();
        }
        for r in 0..dim {
            let row: Vec<String> = (0..dim)
                .map(|col| {
                    let e = m[r * dim + col];
                    format!("{:?}:{:?}", e.re, e.im)
                })
                .collect();
            writeln!(defs, "  {}", row.join(" ")).unwrap();
        }
    }
    Ok(format!("{header}{defs}{body}"))
}

/// Canonical display name for a gate definition.
pub fn gate_label(def: &GateDef) -> String {
    match def.param() {
        Some(theta) => format!("PHASE({})", format_angle(theta)),
        None => builtin_name(def).map(str::to_string).unwrap_or_else(|| def.name().to_string()),
    }
}
