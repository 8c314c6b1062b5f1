use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use histq::canonical::{amplitude_for, CanonError};
use histq::circuit::{validate, Circuit};
use histq::engine::{evaluate, output_distribution, BoundaryAssignment, EvalError, EvalOptions, DEFAULT_MAX_WIRES};
use histq::examples::{example_text, EXAMPLE_NAMES};
use histq::parse::{emit_circuit, parse_circuit};
use histq::report::{AmplitudeReport, CompareReport, CountReport, DistReport, RewriteReport};
use histq::rewrite::{run_passes, Counts, PassKind, DEFAULT_PASSES};

const EXIT_MISMATCH: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NON_SEQUENTIAL: u8 = 3;
const EXIT_GUARD: u8 = 4;
const COMPARE_TOLERANCE: f64 = 1e-10;

#[derive(Parser)]
#[command(name = "histq", version, about = "Quantum circuit amplitudes by summing over histories")]
struct Cli {
    /// Refuse circuits with more internal wires than this.
    #[arg(long, global = true, env = "HISTQ_MAX_WIRES", default_value_t = DEFAULT_MAX_WIRES)]
    max_wires: usize,
    /// Worker threads for history chunks. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Emit one JSON object instead of key=value lines.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Transition amplitude for one boundary assignment.
    Run {
        file: PathBuf,
        /// Input port bits in declaration order, MSB first; `-` uses a fixed value.
        #[arg(long = "in")]
        input: String,
        #[arg(long = "out")]
        output: String,
    },
    /// Probabilities of every free output assignment.
    Dist {
        file: PathBuf,
        #[arg(long = "in")]
        input: String,
    },
    /// History sum against the state-vector simulator.
    Compare {
        file: PathBuf,
        #[arg(long = "in")]
        input: String,
        #[arg(long = "out")]
        output: String,
    },
    /// Apply rewrite passes and print the result.
    Rewrite {
        file: PathBuf,
        /// Comma-separated: canonicalize, drop-dead, short-xor, propagate.
        #[arg(long, value_delimiter = ',')]
        passes: Option<Vec<String>>,
        /// Write the rewritten netlist here instead of standard output.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Internal wire and history counts.
    Count { file: PathBuf },
    /// Print a bundled circuit file.
    Examples {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(EXAMPLE_NAMES))]
        name: String,
        /// Write to this file instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        let code = match e {
            EvalError::GuardExceeded { .. } => EXIT_GUARD,
            _ => EXIT_INPUT,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<CanonError> for Failure {
    fn from(e: CanonError) -> Self {
        match e {
            CanonError::NonSequential(_) => Failure::new(EXIT_NON_SEQUENTIAL, e.to_string()),
            CanonError::Eval(inner) => inner.into(),
            other => Failure::new(EXIT_INPUT, other.to_string()),
        }
    }
}

fn load(path: &PathBuf) -> Result<Circuit, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))?;
    let c = parse_circuit(&text).map_err(|e| Failure::new(EXIT_INPUT, format!("{}:{e}", path.display())))?;
    for d in validate(&c) {
        eprintln!("{}: {d}", path.display());
    }
    Ok(c)
}

fn print_json<T: Serialize>(v: &T) {
    println!("{}", serde_json::to_string(v).expect("reports serialize"));
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let opts = EvalOptions {
        max_wires: cli.max_wires,
        threads: cli.threads.max(1),
        ..EvalOptions::default()
    };
    match cli.command {
        Command::Run { file, input, output } => {
            let c = load(&file)?;
            let b = BoundaryAssignment::from_bits(&c, &input, &output)?;
            let t = Instant::now();
            let e = evaluate(&c, &b, &opts)?;
            let r = AmplitudeReport::new(c.name(), &input, &output, &e, ms(t));
            if cli.json {
                print_json(&r);
            } else {
                print!("{}", histq::report::kv(&r.pairs()));
            }
            Ok(0)
        }
        Command::Dist { file, input } => {
            let c = load(&file)?;
            let mut b = BoundaryAssignment::new();
            b.bind_bits(&c, histq::circuit::Side::In, &input)?;
            let t = Instant::now();
            let d = output_distribution(&c, &b, &opts)?;
            let r = DistReport::new(c.name(), &input, &d, ms(t));
            if cli.json {
                print_json(&r);
            } else {
                print!("{}", r.text());
            }
            Ok(0)
        }
        Command::Compare { file, input, output } => {
            let c = load(&file)?;
            let b = BoundaryAssignment::from_bits(&c, &input, &output)?;
            let canonical = amplitude_for(&c, &b)?;
            let t = Instant::now();
            let e = evaluate(&c, &b, &opts)?;
            let soh = AmplitudeReport::new(c.name(), &input, &output, &e, ms(t));
            let delta = (e.amplitude.resolved() - canonical).norm();
            let r = CompareReport {
                soh,
                canonical_re: canonical.re,
                canonical_im: canonical.im,
                delta,
                agree: delta <= COMPARE_TOLERANCE,
            };
            if cli.json {
                print_json(&r);
            } else {
                print!("{}", r.text());
            }
            Ok(if r.agree { 0 } else { EXIT_MISMATCH })
        }
        Command::Rewrite { file, passes, emit } => {
            let c = load(&file)?;
            let kinds: Vec<PassKind> = match passes {
                Some(names) => names
                    .iter()
                    .map(|n| n.trim().parse())
                    .collect::<Result<_, _>>()
                    .map_err(|e: histq::rewrite::RewriteError| Failure::new(EXIT_INPUT, e.to_string()))?,
                None => DEFAULT_PASSES.to_vec(),
            };
            let out = run_passes(&c, &kinds);
            let netlist = emit_circuit(&out.circuit).map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))?;
            let r = RewriteReport {
                circuit: c.name().to_string(),
                before: CountReport::new(c.name(), Counts::of(&c)),
                after: CountReport::new(c.name(), Counts::of(&out.circuit)),
                passes: out.reports.iter().map(|p| RewriteReport::pass_line(c.name(), p)).collect(),
                merges: out
                    .merges
                    .events()
                    .iter()
                    .map(|(a, b, flip)| format!("{a}{}{b}", if *flip { "!=" } else { "=" }))
                    .collect(),
                netlist,
            };
            if let Some(path) = &emit {
                std::fs::write(path, &r.netlist).map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))?;
            }
            if cli.json {
                print_json(&r);
            } else {
                print!("{}", r.summary());
                if emit.is_none() {
                    print!("{}", r.netlist);
                }
            }
            Ok(0)
        }
        Command::Count { file } => {
            let c = load(&file)?;
            let r = CountReport::new(c.name(), Counts::of(&c));
            if cli.json {
                print_json(&r);
            } else {
                print!("{}", r.text());
            }
            Ok(0)
        }
        Command::Examples { name, output } => {
            let text = example_text(&name).expect("validated by clap");
            match output {
                Some(path) => std::fs::write(&path, text).map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))?,
                None => print!("{text}"),
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
