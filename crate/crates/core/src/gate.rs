//! Gate library: leg roles, dense leg tensors and the built-in gate set.
//!
//! A gate's tensor is indexed by one bit per leg, leg 0 being the most
//! significant bit of the flat index. Listed entries are kept free of the
//! `1/sqrt(2)` factors of Hadamard-like gates; those live in
//! [`GateDef::norm_exponent`] and are applied once per amplitude.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

/// Structural role of a gate leg.
///
/// `Input` and `Output` legs terminate a wire on the consumer or producer
/// side. `Control` and `Symmetric` legs read the wire value without fixing
/// an orientation; symmetric legs are the ones a canonical gate (xor, phase)
/// uses in place of an input/output pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LegRole {
    Input,
    Output,
    Control,
    Symmetric,
}

/// Reading of a gate's legs as qubit lines of a time-ordered circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Line {
    /// The line passes through unchanged; the leg only reads its value.
    Tap(usize),
    /// The line enters on `input` and leaves on `output`.
    Through { input: usize, output: usize },
}

impl Line {
    fn legs(&self) -> [Option<usize>; 2] {
        match *self {
            Line::Tap(l) => [Some(l), None],
            Line::Through { input, output } => [Some(input), Some(output)],
        }
    }

    fn min_leg(&self) -> usize {
        match *self {
            Line::Tap(l) => l,
            Line::Through { input, output } => input.min(output),
        }
    }
}

/// Coarse behavior of a gate in the sum over histories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateClass {
    /// Accepts with factor 1 or rejects with 0.
    Classical,
    /// Diagonal with unit-modulus entries.
    Phase,
    General,
}

impl fmt::Display for GateClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateClass::Classical => "classical",
            GateClass::Phase => "phase",
            GateClass::General => "general",
        })
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GateError {
    #[error("gate {name}: expected {expected} entries for {legs} legs, got {got}")]
    EntryCount {
        name: String,
        legs: usize,
        expected: usize,
        got: usize,
    },
    #[error("gate {name}: line reading does not cover every leg exactly once")]
    BadLines { name: String },
    #[error("gate {name}: too many legs ({legs}, at most {max})")]
    TooManyLegs { name: String, legs: usize, max: usize },
    #[error("gate {name}: entry {index} is not finite")]
    NonFinite { name: String, index: usize },
}

/// Upper bound on legs per gate; keeps tensors at 2^16 entries.
pub const MAX_LEGS: usize = 16;

/// A gate's tensor together with the roles of its legs.
#[derive(Debug, Clone, PartialEq)]
pub struct GateDef {
    name: String,
    legs: Vec<LegRole>,
    entries: Vec<Complex64>,
    norm_exponent: u32,
    param: Option<f64>,
    symmetric: bool,
    lines: Option<Vec<Line>>,
}

impl GateDef {
    /// Builds a gate from its leg roles and listed entries, deriving the
    /// default line reading: control and symmetric legs are taps, inputs
    /// and outputs are paired in order.
    pub fn new(
        name: impl Into<String>,
        legs: Vec<LegRole>,
        entries: Vec<Complex64>,
        norm_exponent: u32,
    ) -> Result<Self, GateError> {
        let name = name.into();
        if legs.len() > MAX_LEGS {
            return Err(GateError::TooManyLegs {
                name,
                legs: legs.len(),
                max: MAX_LEGS,
            });
        }
        let expected = 1usize << legs.len();
        if entries.len() != expected {
            return Err(GateError::EntryCount {
                name,
                legs: legs.len(),
                expected,
                got: entries.len(),
            });
        }
        if let Some(index) = entries.iter().position(|e| !(e.re.is_finite() && e.im.is_finite())) {
            return Err(GateError::NonFinite { name, index });
        }
        let symmetric = popcount_invariant(&entries, legs.len());
        let lines = default_lines(&legs);
        Ok(GateDef {
            name,
            legs,
            entries,
            norm_exponent,
            param: None,
            symmetric,
            lines,
        })
    }

    /// Replaces the line reading. `None` marks a gate with no sequential
    /// interpretation.
    pub fn with_lines(mut self, lines: Option<Vec<Line>>) -> Result<Self, GateError> {
        if let Some(ls) = &lines {
            let mut seen = vec![false; self.legs.len()];
            for leg in ls.iter().flat_map(|l| l.legs()).flatten() {
                if leg >= seen.len() || seen[leg] {
                    return Err(GateError::BadLines { name: self.name });
                }
                seen[leg] = true;
            }
            if seen.iter().any(|s| !s) {
                return Err(GateError::BadLines { name: self.name });
            }
            let mut ls = ls.clone();
            ls.sort_by_key(Line::min_leg);
            self.lines = Some(ls);
        } else {
            self.lines = None;
        }
        Ok(self)
    }

    pub fn with_roles(mut self, legs: Vec<LegRole>) -> Self {
        assert_eq!(legs.len(), self.legs.len(), "role count must match leg count");
        self.legs = legs;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Generalized controlled-phase gate on `legs` symmetric legs: factor
    /// `e^{i theta}` when every leg reads 1, else 1. With zero legs this is
    /// a global phase; `theta = pi` gives the -1 gate.
    pub fn phase(theta: f64, legs: usize) -> Self {
        let mut entries = vec![Complex64::new(1.0, 0.0); 1 << legs];
        *entries.last_mut().unwrap() = unit_phase(theta);
        GateDef {
            name: "PHASE".to_string(),
            legs: vec![LegRole::Symmetric; legs],
            entries,
            norm_exponent: 0,
            param: Some(theta),
            symmetric: true,
            lines: Some((0..legs).map(Line::Tap).collect()),
        }
    }

    /// Same tensor as [`GateDef::phase`] with an explicit line reading and
    /// normalization exponent; the canonical Hadamard is
    /// `phase_with(pi, 2, 1, [Through { input: 1, output: 0 }])`.
    pub fn phase_with(
        theta: f64,
        legs: usize,
        norm_exponent: u32,
        lines: Option<Vec<Line>>,
    ) -> Result<Self, GateError> {
        let mut g = GateDef::phase(theta, legs);
        g.norm_exponent = norm_exponent;
        g.with_lines(lines)
    }

    /// Controlled phase whose active entry is exactly `e` (unit modulus).
    pub fn phase_entry(e: Complex64, legs: usize) -> Self {
        let theta = e.arg();
        let mut g = GateDef::phase(theta, legs);
        *g.entries.last_mut().unwrap() = e;
        g
    }

    /// A `k`-qubit matrix gate; legs are the `k` outputs followed by the
    /// `k` inputs, so `rows[r][c]` is the entry for output bits `r` and
    /// input bits `c`.
    pub fn from_matrix(
        name: impl Into<String>,
        k: usize,
        rows: &[Vec<Complex64>],
        norm_exponent: u32,
    ) -> Result<Self, GateError> {
        let name = name.into();
        let dim = 1usize << k;
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            entries.extend_from_slice(row);
        }
        if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
            return Err(GateError::EntryCount {
                name,
                legs: 2 * k,
                expected: dim * dim,
                got: entries.len(),
            });
        }
        let mut legs = vec![LegRole::Output; k];
        legs.extend(std::iter::repeat_n(LegRole::Input, k));
        GateDef::new(name, legs, entries, norm_exponent)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn legs(&self) -> &[LegRole] {
        &self.legs
    }

    pub fn arity(&self) -> usize {
        self.legs.len()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn norm_exponent(&self) -> u32 {
        self.norm_exponent
    }

    pub fn param(&self) -> Option<f64> {
        self.param
    }

    /// True when the factor is invariant under every permutation of legs.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn lines(&self) -> Option<&[Line]> {
        self.lines.as_deref()
    }

    pub fn is_phase(&self) -> bool {
        self.param.is_some()
    }

    /// Listed entry for the given leg bits, leg 0 first.
    pub fn factor(&self, bits: &[bool]) -> Complex64 {
        debug_assert_eq!(bits.len(), self.legs.len());
        self.entries[leg_index(bits)]
    }

    /// Dense `2^m x 2^m` row-major matrix over the gate's `m` lines, with
    /// the normalization applied. Row bits are line outputs, column bits
    /// line inputs; taps contribute zero off their diagonal.
    pub fn line_matrix(&self) -> Option<Vec<Complex64>> {
        let scale = norm_scale(self.norm_exponent as i64);
        let mut m = self.listed_line_matrix()?;
        for e in &mut m {
            *e *= scale;
        }
        Some(m)
    }

    /// [`GateDef::line_matrix`] without the normalization factor.
    pub fn listed_line_matrix(&self) -> Option<Vec<Complex64>> {
        let lines = self.lines.as_ref()?;
        let m = lines.len();
        let dim = 1usize << m;
        let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
        let mut bits = vec![false; self.legs.len()];
        for r in 0..dim {
            'col: for c in 0..dim {
                for (j, line) in lines.iter().enumerate() {
                    let shift = m - 1 - j;
                    let rb = (r >> shift) & 1 == 1;
                    let cb = (c >> shift) & 1 == 1;
                    match *line {
                        Line::Tap(l) => {
                            if rb != cb {
                                continue 'col;
                            }
                            bits[l] = rb;
                        }
                        Line::Through { input, output } => {
                            bits[input] = cb;
                            bits[output] = rb;
                        }
                    }
                }
                out[r * dim + c] = self.factor(&bits);
            }
        }
        Some(out)
    }

    /// Maximum deviation of `M M^dagger` from the identity, or `None` for
    /// gates without a line reading.
    pub fn unitarity_defect(&self) -> Option<f64> {
        let m = self.line_matrix()?;
        let dim = (m.len() as f64).sqrt() as usize;
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..dim {
                    acc += m[i * dim + k] * m[j * dim + k].conj();
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((acc - target).norm());
            }
        }
        Some(worst)
    }

    /// Gate class used for pruning order and reporting.
    pub fn class(&self) -> GateClass {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        if self.norm_exponent == 0 && self.entries.iter().all(|&e| e == zero || e == one) {
            return GateClass::Classical;
        }
        let unit = self.norm_exponent == 0
            && self
                .entries
                .iter()
                .all(|&e| e == zero || (e.norm() - 1.0).abs() <= 1e-12);
        if unit && self.is_diagonal() {
            GateClass::Phase
        } else {
            GateClass::General
        }
    }

    /// Nonzero entries occur only where every through line reads the same
    /// bit on its input and output leg.
    fn is_diagonal(&self) -> bool {
        let throughs: Vec<(usize, usize)> = match &self.lines {
            Some(ls) => ls
                .iter()
                .filter_map(|l| match *l {
                    Line::Through { input, output } => Some((input, output)),
                    Line::Tap(_) => None,
                })
                .collect(),
            None => {
                // Without lines, pair inputs with outputs by role order.
                let ins: Vec<usize> = self.legs_with(LegRole::Input).collect();
                let outs: Vec<usize> = self.legs_with(LegRole::Output).collect();
                if ins.len() != outs.len() {
                    return false;
                }
                ins.into_iter().zip(outs).collect()
            }
        };
        let n = self.legs.len();
        self.entries.iter().enumerate().all(|(idx, e)| {
            e.norm_sqr() == 0.0
                || throughs
                    .iter()
                    .all(|&(i, o)| bit_of(idx, i, n) == bit_of(idx, o, n))
        })
    }

    pub fn legs_with(&self, role: LegRole) -> impl Iterator<Item = usize> + '_ {
        self.legs
            .iter()
            .enumerate()
            .filter(move |(_, r)| **r == role)
            .map(|(i, _)| i)
    }

    /// The transpose: inputs and outputs trade roles, entries stay indexed
    /// by the same legs.
    pub fn transposed(&self) -> Self {
        let mut g = self.clone();
        g.name = format!("{}_t", self.name);
        for r in &mut g.legs {
            *r = match *r {
                LegRole::Input => LegRole::Output,
                LegRole::Output => LegRole::Input,
                other => other,
            };
        }
        if let Some(ls) = &mut g.lines {
            for l in ls.iter_mut() {
                if let Line::Through { input, output } = *l {
                    *l = Line::Through {
                        input: output,
                        output: input,
                    };
                }
            }
        }
        g
    }

    /// The gate with leg `leg` pinned to `value`. Lines touching the leg
    /// are dropped from the reading; if that leaves a through line half
    /// attached the result has no line reading.
    pub fn restricted(&self, leg: usize, value: bool) -> Result<Self, GateError> {
        let n = self.legs.len();
        let mut entries = Vec::with_capacity(1 << (n - 1));
        for idx in 0..(1usize << n) {
            if bit_of(idx, leg, n) == value {
                entries.push(self.entries[idx]);
            }
        }
        let mut legs = self.legs.clone();
        legs.remove(leg);
        let remap = |l: usize| if l > leg { l - 1 } else { l };
        let lines = self.lines.as_ref().and_then(|ls| {
            let mut out = Vec::new();
            for line in ls {
                match *line {
                    Line::Tap(l) if l == leg => {}
                    Line::Tap(l) => out.push(Line::Tap(remap(l))),
                    Line::Through { input, output } if input == leg || output == leg => return None,
                    Line::Through { input, output } => out.push(Line::Through {
                        input: remap(input),
                        output: remap(output),
                    }),
                }
            }
            Some(out)
        });
        let mut g = GateDef::new(self.name.clone(), legs, entries, self.norm_exponent)?;
        g.param = self.param;
        g.with_lines(lines)
    }
}

/// Flat tensor index for the given leg bits, leg 0 most significant.
pub fn leg_index(bits: &[bool]) -> usize {
    bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize)
}

fn bit_of(idx: usize, leg: usize, legs: usize) -> bool {
    (idx >> (legs - 1 - leg)) & 1 == 1
}

fn popcount_invariant(entries: &[Complex64], legs: usize) -> bool {
    let mut by_weight: Vec<Option<Complex64>> = vec![None; legs + 1];
    for (idx, &e) in entries.iter().enumerate() {
        let w = idx.count_ones() as usize;
        match by_weight[w] {
            None => by_weight[w] = Some(e),
            Some(prev) if prev == e => {}
            Some(_) => return false,
        }
    }
    true
}

fn default_lines(legs: &[LegRole]) -> Option<Vec<Line>> {
    let ins: Vec<usize> = (0..legs.len()).filter(|&i| legs[i] == LegRole::Input).collect();
    let outs: Vec<usize> = (0..legs.len()).filter(|&i| legs[i] == LegRole::Output).collect();
    if ins.len() != outs.len() {
        return None;
    }
    let mut lines: Vec<Line> = legs
        .iter()
        .enumerate()
        .filter(|(_, r)| matches!(r, LegRole::Control | LegRole::Symmetric))
        .map(|(i, _)| Line::Tap(i))
        .collect();
    lines.extend(
        ins.into_iter()
            .zip(outs)
            .map(|(input, output)| Line::Through { input, output }),
    );
    lines.sort_by_key(Line::min_leg);
    Some(lines)
}

/// `2^(-k/2)`, exact for even `k`.
pub fn norm_scale(k: i64) -> f64 {
    let half = (k.div_euclid(2)) as i32;
    let base = 2f64.powi(-half);
    if k.rem_euclid(2) == 1 {
        base * std::f64::consts::FRAC_1_SQRT_2
    } else {
        base
    }
}

/// `e^{i theta}`, exact at multiples of `pi/2`.
pub fn unit_phase(theta: f64) -> Complex64 {
    let quarters = theta / (PI / 2.0);
    let rounded = quarters.round();
    if (quarters - rounded).abs() <= 1e-12 * rounded.abs().max(1.0) {
        return match (rounded as i64).rem_euclid(4) {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    Complex64::from_polar(1.0, theta)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn single_qubit(name: &str, m: [[Complex64; 2]; 2], norm: u32) -> GateDef {
    let rows: Vec<Vec<Complex64>> = m.iter().map(|r| r.to_vec()).collect();
    GateDef::from_matrix(name, 1, &rows, norm).expect("built-in gate is well formed")
}

/// Controlled gate with `controls` leading control legs followed by a
/// target input and output leg. `target(c, i)` is the listed entry for
/// target output `o` given all controls set; otherwise identity.
fn controlled(name: &str, controls: usize, target: [[Complex64; 2]; 2]) -> GateDef {
    let mut legs = vec![LegRole::Control; controls];
    legs.push(LegRole::Input);
    legs.push(LegRole::Output);
    let n = legs.len();
    let mut entries = vec![c(0.0, 0.0); 1 << n];
    for (idx, e) in entries.iter_mut().enumerate() {
        let all_set = (0..controls).all(|l| bit_of(idx, l, n));
        let i = bit_of(idx, controls, n) as usize;
        let o = bit_of(idx, controls + 1, n) as usize;
        *e = if all_set {
            target[o][i]
        } else if i == o {
            c(1.0, 0.0)
        } else {
            c(0.0, 0.0)
        };
    }
    GateDef::new(name, legs, entries, 0).expect("built-in gate is well formed")
}

/// Names the file format accepts after `gate`/`apply`.
pub const BUILTIN_NAMES: &[&str] = &[
    "I", "X", "Y", "Z", "S", "T", "H", "CNOT", "CZ", "CCZ", "TOFFOLI", "SWAP", "XOR3", "NEQ",
];

/// Looks up a built-in gate by name.
pub fn builtin(name: &str) -> Option<GateDef> {
    let zero = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let x = [[zero, one], [one, zero]];
    let z = [[one, zero], [zero, c(-1.0, 0.0)]];
    let g = match name {
        "I" => single_qubit("I", [[one, zero], [zero, one]], 0),
        "X" => single_qubit("X", x, 0),
        "Y" => single_qubit("Y", [[zero, c(0.0, -1.0)], [c(0.0, 1.0), zero]], 0),
        "Z" => single_qubit("Z", z, 0),
        "S" => single_qubit("S", [[one, zero], [zero, unit_phase(PI / 2.0)]], 0),
        "T" => single_qubit("T", [[one, zero], [zero, unit_phase(FRAC_PI_4)]], 0),
        "H" => single_qubit("H", [[one, one], [one, c(-1.0, 0.0)]], 1),
        "CNOT" => controlled("CNOT", 1, x),
        "CZ" => controlled("CZ", 1, z),
        "CCZ" => controlled("CCZ", 2, z),
        "TOFFOLI" => controlled("TOFFOLI", 2, x),
        "SWAP" => {
            // legs: out_a, out_b, in_a, in_b
            let entries = (0..16usize)
                .map(|idx| {
                    let (oa, ob, ia, ib) = (idx >> 3 & 1, idx >> 2 & 1, idx >> 1 & 1, idx & 1);
                    if oa == ib && ob == ia { one } else { zero }
                })
                .collect();
            let legs = vec![LegRole::Output, LegRole::Output, LegRole::Input, LegRole::Input];
            GateDef::new("SWAP", legs, entries, 0).expect("built-in gate is well formed")
        }
        "XOR3" => {
            let entries = (0..8usize)
                .map(|idx| if idx.count_ones() % 2 == 0 { one } else { zero })
                .collect();
            GateDef::new("XOR3", vec![LegRole::Symmetric; 3], entries, 0)
                .and_then(|g| {
                    g.with_lines(Some(vec![Line::Tap(0), Line::Through { input: 1, output: 2 }]))
                })
                .expect("built-in gate is well formed")
        }
        "NEQ" => GateDef::new("NEQ", vec![LegRole::Symmetric; 2], vec![zero, one, one, zero], 0)
            .and_then(|g| g.with_lines(Some(vec![Line::Through { input: 0, output: 1 }])))
            .expect("built-in gate is well formed"),
        _ => return None,
    };
    Some(g)
}

/// Name of the built-in this definition is structurally identical to.
pub fn builtin_name(g: &GateDef) -> Option<&'static str> {
    BUILTIN_NAMES
        .iter()
        .copied()
        .find(|n| builtin(n).as_ref() == Some(g))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_bits(n: usize) -> impl Iterator<Item = Vec<bool>> {
        (0..1usize << n).map(move |idx| (0..n).map(|l| bit_of(idx, l, n)).collect())
    }

    #[test]
    fn builtins_are_unitary() {
        for name in BUILTIN_NAMES {
            let g = builtin(name).unwrap();
            let defect = g.unitarity_defect().unwrap();
            assert!(defect <= 1e-12, "{name}: defect {defect}");
        }
        for legs in 0..=4 {
            for theta in [0.0, PI, PI / 2.0, 0.3, -1.7] {
                assert!(GateDef::phase(theta, legs).unitarity_defect().unwrap() <= 1e-12);
            }
        }
    }

    #[test]
    fn xor_accepts_even_parity() {
        let xor = builtin("XOR3").unwrap();
        assert_eq!(xor.factor(&[true, true, false]), c(1.0, 0.0));
        assert_eq!(xor.factor(&[true, false, false]), c(0.0, 0.0));
    }

    #[test]
    fn hadamard_listed_core() {
        let h = builtin("H").unwrap();
        assert_eq!(h.factor(&[true, true]), c(-1.0, 0.0));
        assert_eq!(h.norm_exponent(), 1);
    }

    #[test]
    fn minus_one_gate() {
        let g = GateDef::phase(PI, 0);
        assert_eq!(g.factor(&[]), c(-1.0, 0.0));
    }

    #[test]
    fn symmetric_flags_hold_exhaustively() {
        let mut gates: Vec<GateDef> = vec![builtin("XOR3").unwrap(), builtin("NEQ").unwrap()];
        for legs in 0..=4 {
            gates.push(GateDef::phase(0.7, legs));
        }
        for g in gates {
            assert!(g.is_symmetric(), "{}", g.name());
            let n = g.arity();
            for bits in all_bits(n) {
                let base = g.factor(&bits);
                // every transposition of two legs generates the symmetric group
                for a in 0..n {
                    for b in a + 1..n {
                        let mut p = bits.clone();
                        p.swap(a, b);
                        assert_eq!(g.factor(&p), base);
                    }
                }
            }
        }
        // CNOT is XOR3 read with roles; its tensor is symmetric
        assert!(builtin("CNOT").unwrap().is_symmetric());
        assert!(!builtin("TOFFOLI").unwrap().is_symmetric());
    }

    #[test]
    fn classes() {
        for n in ["CNOT", "TOFFOLI", "X", "SWAP", "XOR3"] {
            assert_eq!(builtin(n).unwrap().class(), GateClass::Classical, "{n}");
        }
        for n in ["Z", "T", "S", "CCZ", "CZ"] {
            assert_eq!(builtin(n).unwrap().class(), GateClass::Phase, "{n}");
        }
        assert_eq!(builtin("H").unwrap().class(), GateClass::General);
        assert_eq!(builtin("Y").unwrap().class(), GateClass::General);
        assert_eq!(GateDef::phase(0.4, 2).class(), GateClass::Phase);
    }

    #[test]
    fn transposed_swaps_rows_and_columns() {
        let y = builtin("Y").unwrap();
        let yt = y.transposed();
        let m = y.line_matrix().unwrap();
        let mt = yt.line_matrix().unwrap();
        for r in 0..2 {
            for col in 0..2 {
                assert_eq!(m[r * 2 + col], mt[col * 2 + r]);
            }
        }
        assert_eq!(y.entries(), yt.entries());
    }

    #[test]
    fn restricting_phase_leg_to_one_removes_a_control() {
        let g = GateDef::phase(PI, 3).restricted(1, true).unwrap();
        assert_eq!(g.entries(), GateDef::phase(PI, 2).entries());
        let g0 = GateDef::phase(PI, 3).restricted(0, false).unwrap();
        assert!(g0.entries().iter().all(|&e| e == c(1.0, 0.0)));
    }

    #[test]
    fn norm_scale_values() {
        assert_eq!(norm_scale(0), 1.0);
        assert_eq!(norm_scale(2), 0.5);
        assert_eq!(norm_scale(1), std::f64::consts::FRAC_1_SQRT_2);
        assert_eq!(norm_scale(-2), 2.0);
    }

    #[test]
    fn unit_phase_is_exact_on_quarter_turns() {
        assert_eq!(unit_phase(PI), c(-1.0, 0.0));
        assert_eq!(unit_phase(-PI / 2.0), c(0.0, -1.0));
        assert_eq!(unit_phase(4.0 * PI), c(1.0, 0.0));
    }

    #[test]
    fn entry_count_is_checked() {
        let err = GateDef::new("bad", vec![LegRole::Control], vec![c(1.0, 0.0)], 0).unwrap_err();
        assert!(matches!(err, GateError::EntryCount { expected: 2, .. }));
    }
}
