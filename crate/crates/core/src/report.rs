//! Query reports: `key=value` lines or one JSON object.

use serde::Serialize;

use crate::engine::{Distribution, Evaluation};
use crate::rewrite::{Counts, PassReport};

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct AmplitudeReport {
    pub circuit: String,
    pub input: String,
    pub output: String,
    pub value_re: f64,
    pub value_im: f64,
    pub norm_exponent: i64,
    pub resolved_re: f64,
    pub resolved_im: f64,
    pub probability: f64,
    pub internal_wires: usize,
    pub histories: String,
    pub accepted_histories: u64,
    pub elapsed_ms: f64,
}

impl AmplitudeReport {
    pub fn new(circuit: &str, input: &str, output: &str, e: &Evaluation, elapsed_ms: f64) -> Self {
        let r = e.amplitude.resolved();
        AmplitudeReport {
            circuit: circuit.to_string(),
            input: input.to_string(),
            output: output.to_string(),
            value_re: e.amplitude.value.re,
            value_im: e.amplitude.value.im,
            norm_exponent: e.amplitude.norm_exponent,
            resolved_re: r.re,
            resolved_im: r.im,
            probability: r.norm_sqr(),
            internal_wires: e.internal_wires,
            histories: history_count(e.internal_wires),
            accepted_histories: e.accepted,
            elapsed_ms,
        }
    }

    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("circuit", self.circuit.clone()),
            ("in", self.input.clone()),
            ("out", self.output.clone()),
            ("value_re", fmt_f(self.value_re)),
            ("value_im", fmt_f(self.value_im)),
            ("norm_exponent", self.norm_exponent.to_string()),
            ("resolved_re", fmt_f(self.resolved_re)),
            ("resolved_im", fmt_f(self.resolved_im)),
            ("probability", fmt_f(self.probability)),
            ("internal_wires", self.internal_wires.to_string()),
            ("histories", self.histories.clone()),
            ("accepted_histories", self.accepted_histories.to_string()),
            ("elapsed_ms", format!("{:.3}", self.elapsed_ms)),
        ]
    }
}

/// `2^w` as decimal text.
pub fn history_count(w: usize) -> String {
    match 1u128.checked_shl(w as u32) {
        Some(n) => n.to_string(),
        None => format!("2^{w}"),
    }
}

/// Shortest text that reads back as the same `f64`.
pub fn fmt_f(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Outcome {
    pub state: String,
    pub probability: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct DistReport {
    pub circuit: String,
    pub input: String,
    pub labels: Vec<String>,
    pub outcomes: Vec<Outcome>,
    pub total: f64,
    pub normalized: bool,
    pub elapsed_ms: f64,
}

impl DistReport {
    /// Keeps outcomes with nonzero probability.
    pub fn new(circuit: &str, input: &str, d: &Distribution, elapsed_ms: f64) -> Self {
        DistReport {
            circuit: circuit.to_string(),
            input: input.to_string(),
            labels: d.labels.clone(),
            outcomes: d
                .outcomes
                .iter()
                .filter(|(_, p)| *p > 0.0)
                .map(|(s, p)| Outcome {
                    state: s.to_string(),
                    probability: *p,
                })
                .collect(),
            total: d.total,
            normalized: !d.is_abnormal(),
            elapsed_ms,
        }
    }

    pub fn text(&self) -> String {
        let mut s = format!("circuit={}\nin={}\nlabels={}\n", self.circuit, self.input, self.labels.join(","));
        for o in &self.outcomes {
            s.push_str(&format!("{}={}\n", o.state, fmt_f(o.probability)));
        }
        s.push_str(&format!(
            "total={}\nnormalized={}\nelapsed_ms={:.3}\n",
            fmt_f(self.total),
            self.normalized,
            self.elapsed_ms
        ));
        s
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CompareReport {
    pub soh: AmplitudeReport,
    pub canonical_re: f64,
    pub canonical_im: f64,
    pub delta: f64,
    pub agree: bool,
}

impl CompareReport {
    pub fn text(&self) -> String {
        let mut s = kv(&self.soh.pairs());
        s.push_str(&kv(&[
            ("canonical_re", fmt_f(self.canonical_re)),
            ("canonical_im", fmt_f(self.canonical_im)),
            ("delta", fmt_f(self.delta)),
            ("agree", self.agree.to_string()),
        ]));
        s
    }
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct CountReport {
    pub circuit: String,
    pub wires: usize,
    pub gates: usize,
    pub internal_wires: usize,
    pub histories: String,
}

impl CountReport {
    pub fn new(circuit: &str, c: Counts) -> Self {
        CountReport {
            circuit: circuit.to_string(),
            wires: c.wires,
            gates: c.gates,
            internal_wires: c.internal_wires,
            histories: history_count(c.internal_wires),
        }
    }

    pub fn text(&self) -> String {
        format!("internal_wires={} histories={}\n", self.internal_wires, self.histories)
    }
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct PassLine {
    pub pass: String,
    pub before: CountReport,
    pub after: CountReport,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct RewriteReport {
    pub circuit: String,
    pub before: CountReport,
    pub after: CountReport,
    pub passes: Vec<PassLine>,
    /// `a=b` for shorted wires, `a!=b` for complementary ones.
    pub merges: Vec<String>,
    pub netlist: String,
}

impl RewriteReport {
    pub fn pass_line(circuit: &str, r: &PassReport) -> PassLine {
        PassLine {
            pass: r.name.to_string(),
            before: CountReport::new(circuit, r.before),
            after: CountReport::new(circuit, r.after),
        }
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let side = |s: &mut String, tag: &str, c: &CountReport| {
            s.push_str(&format!(
                "{tag}_wires={}\n{tag}_gates={}\n{tag}_internal_wires={}\n{tag}_histories={}\n",
                c.wires, c.gates, c.internal_wires, c.histories
            ));
        };
        side(&mut s, "before", &self.before);
        for p in &self.passes {
            s.push_str(&format!(
                "pass={} gates={}->{} wires={}->{} internal_wires={}->{}\n",
                p.pass, p.before.gates, p.after.gates, p.before.wires, p.after.wires, p.before.internal_wires, p.after.internal_wires
            ));
        }
        side(&mut s, "after", &self.after);
        s.push_str(&format!("merges={}\n", self.merges.join(",")));
        s
    }
}

pub fn kv(pairs: &[(&str, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Amplitude;
    use num_complex::Complex64;

    #[test]
    fn resolved_fields_come_from_one_value() {
        let e = Evaluation {
            amplitude: Amplitude {
                value: Complex64::new(-1.0, 0.0),
                norm_exponent: 3,
            },
            internal_wires: 2,
            accepted: 4,
        };
        let r = AmplitudeReport::new("c", "0", "1", &e, 0.0);
        assert_eq!(r.resolved_re, e.amplitude.resolved().re);
        assert_eq!(r.probability, e.amplitude.probability());
        assert_eq!(r.histories, "4");
        let text = kv(&r.pairs());
        assert!(text.contains("norm_exponent=3\n"));
        assert_eq!(fmt_f(r.resolved_re).parse::<f64>().unwrap(), r.resolved_re);
    }

    #[test]
    fn huge_history_counts() {
        assert_eq!(history_count(6), "64");
        assert_eq!(history_count(200), "2^200");
    }
}
