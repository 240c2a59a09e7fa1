//! Circuit IR and the line-oriented `.ftc` text format.
//!
//! ```text
//! # comment
//! qubits <n>                      required, first directive
//! noise auto                      expand error locations from a policy
//! stage prep|evolution|measurement
//! gate h|x|y|z <q>
//! gate cnot <control> <target>
//! gate swap <a> <b>
//! gate mode-unitary <name>
//! error <q>                       explicit location in the current stage
//! measure ideal <projector-name>
//! postselect even-parity
//! ```
//!
//! Qubits are one-based in text and zero-based in the IR. Items before the
//! first `stage` directive belong to the preparation stage.

use std::fmt;

use thiserror::Error;

use crate::statekit::{Projector, MAX_QUBITS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    Prep,
    Evolution,
    Measurement,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Prep => "prep",
            Stage::Evolution => "evolution",
            Stage::Measurement => "measurement",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "prep" => Some(Stage::Prep),
            "evolution" => Some(Stage::Evolution),
            "measurement" => Some(Stage::Measurement),
            _ => None,
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A gate application (zero-based qubits).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Op {
    H(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Cnot { control: usize, target: usize },
    Swap(usize, usize),
    /// A named full-register unitary resolved at compile time.
    ModeUnitary(String),
}

impl Op {
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Op::H(q) | Op::X(q) | Op::Y(q) | Op::Z(q) => vec![*q],
            Op::Cnot { control, target } => vec![*control, *target],
            Op::Swap(a, b) => vec![*a, *b],
            Op::ModeUnitary(_) => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Item {
    Gate(Op),
    Error { qubit: usize, stage: Stage },
    Barrier(Stage),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircuitError {
    #[error("qubit count {0} outside 1..={MAX_QUBITS}")]
    QubitCount(usize),
    #[error("qubit {qubit} out of range for {n_qubits} qubits")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("gate uses qubit {0} twice")]
    RepeatedQubit(usize),
    #[error("stage {next} cannot follow stage {current}")]
    StageOrder { current: Stage, next: Stage },
    #[error("error location tagged {tagged} inside stage {current}")]
    StageMismatch { tagged: Stage, current: Stage },
    #[error("ideal projector ({ideal} dims) and post-selection ({post} dims) differ in size")]
    MeasurementDimension { ideal: usize, post: usize },
    #[error("ideal projector is not contained in the post-selected subspace")]
    IdealOutsidePostselection,
}

/// Ordered gates, error locations and stage barriers over `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Circuit {
    n_qubits: usize,
    items: Vec<Item>,
    auto_noise: bool,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self, CircuitError> {
        if !(1..=MAX_QUBITS).contains(&n_qubits) {
            return Err(CircuitError::QubitCount(n_qubits));
        }
        Ok(Self { n_qubits, items: Vec::new(), auto_noise: false })
    }

    /// Builds and validates a circuit from raw items.
    pub fn from_items(n_qubits: usize, items: Vec<Item>, auto_noise: bool) -> Result<Self, CircuitError> {
        let mut c = Self::new(n_qubits)?;
        c.auto_noise = auto_noise;
        for item in items {
            c.push(item)?;
        }
        Ok(c)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn auto_noise(&self) -> bool {
        self.auto_noise
    }

    pub fn set_auto_noise(&mut self, on: bool) {
        self.auto_noise = on;
    }

    /// Stage in effect after the last item.
    pub fn current_stage(&self) -> Stage {
        self.items
            .iter()
            .rev()
            .find_map(|it| match it {
                Item::Barrier(s) => Some(*s),
                _ => None,
            })
            .unwrap_or(Stage::Prep)
    }

    fn check_qubit(&self, q: usize) -> Result<(), CircuitError> {
        if q < self.n_qubits {
            Ok(())
        } else {
            Err(CircuitError::QubitOutOfRange { qubit: q, n_qubits: self.n_qubits })
        }
    }

    pub fn push(&mut self, item: Item) -> Result<(), CircuitError> {
        match &item {
            Item::Gate(op) => {
                let qs = op.qubits();
                for (i, &q) in qs.iter().enumerate() {
                    self.check_qubit(q)?;
                    if qs[..i].contains(&q) {
                        return Err(CircuitError::RepeatedQubit(q));
                    }
                }
            }
            Item::Error { qubit, stage } => {
                self.check_qubit(*qubit)?;
                let current = self.current_stage();
                if *stage != current {
                    return Err(CircuitError::StageMismatch { tagged: *stage, current });
                }
            }
            Item::Barrier(next) => {
                let current = self.current_stage();
                if *next < current {
                    return Err(CircuitError::StageOrder { current, next: *next });
                }
            }
        }
        self.items.push(item);
        Ok(())
    }

    pub fn gate(&mut self, op: Op) -> Result<&mut Self, CircuitError> {
        self.push(Item::Gate(op))?;
        Ok(self)
    }

    /// Adds an error location on `qubit` in the current stage.
    pub fn error(&mut self, qubit: usize) -> Result<&mut Self, CircuitError> {
        let stage = self.current_stage();
        self.push(Item::Error { qubit, stage })?;
        Ok(self)
    }

    pub fn stage(&mut self, stage: Stage) -> Result<&mut Self, CircuitError> {
        self.push(Item::Barrier(stage))?;
        Ok(self)
    }

    /// Number of explicit error locations.
    pub fn n_locations(&self) -> usize {
        self.items.iter().filter(|it| matches!(it, Item::Error { .. })).count()
    }

    /// `(item position, qubit, stage)` for every explicit error location.
    pub fn locations(&self) -> Vec<(usize, usize, Stage)> {
        self.items
            .iter()
            .enumerate()
            .filter_map(|(i, it)| match it {
                Item::Error { qubit, stage } => Some((i, *qubit, *stage)),
                _ => None,
            })
            .collect()
    }

    /// The same circuit with all error locations removed.
    pub fn without_errors(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            items: self.items.iter().filter(|it| !matches!(it, Item::Error { .. })).cloned().collect(),
            auto_noise: self.auto_noise,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PostSelect {
    EvenParity,
}

/// Symbolic measurement declaration; names are resolved by a registry.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Measurement {
    pub ideal: Option<String>,
    pub postselect: Option<PostSelect>,
}

/// Resolved measurement: the ideal projector `N_i` is taken against and the
/// optional post-selection projector `N_t` is taken against.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSpec {
    pub ideal: Projector<f64>,
    pub postselect: Option<Projector<f64>>,
}

impl MeasurementSpec {
    pub fn new(ideal: Projector<f64>, postselect: Option<Projector<f64>>) -> Result<Self, CircuitError> {
        if let Some(post) = &postselect {
            if post.dim() != ideal.dim() {
                return Err(CircuitError::MeasurementDimension { ideal: ideal.dim(), post: post.dim() });
            }
            if !post.contains(&ideal) {
                return Err(CircuitError::IdealOutsidePostselection);
            }
        }
        Ok(Self { ideal, postselect })
    }
}

/// A parsed `.ftc` document.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Document {
    pub circuit: Circuit,
    pub measurement: Measurement,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    MissingQubits,
    DuplicateQubits,
    UnknownDirective(String),
    UnknownGate(String),
    UnknownStage(String),
    UnknownPostselect(String),
    BadInteger(String),
    Arity { directive: String, expected: usize, got: usize },
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    DuplicateMeasure,
    Circuit(CircuitError),
    NonAscii,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::MissingQubits => write!(f, "`qubits <n>` must be the first directive"),
            Self::DuplicateQubits => write!(f, "duplicate `qubits` directive"),
            Self::UnknownDirective(d) => write!(f, "unknown directive `{d}`"),
            Self::UnknownGate(g) => write!(f, "unknown gate `{g}`"),
            Self::UnknownStage(s) => write!(f, "unknown stage `{s}` (expected prep, evolution or measurement)"),
            Self::UnknownPostselect(s) => write!(f, "unknown post-selection `{s}` (expected even-parity)"),
            Self::BadInteger(t) => write!(f, "expected a positive integer, found `{t}`"),
            Self::Arity { directive, expected, got } => {
                write!(f, "`{directive}` takes {expected} argument(s), found {got}")
            }
            Self::QubitOutOfRange { qubit, n_qubits } => {
                write!(f, "qubit {qubit} out of range 1..={n_qubits}")
            }
            Self::DuplicateMeasure => write!(f, "measurement declared twice"),
            Self::Circuit(e) => write!(f, "{e}"),
            Self::NonAscii => write!(f, "non-ASCII character"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push(Token { text: &line[s..i], column: s + 1 });
                start = None;
            }
            _ => {}
        }
    }
    out
}

/// Parses an `.ftc` document.
pub fn parse_circuit(text: &str) -> Result<Document, ParseError> {
    let mut circuit: Option<Circuit> = None;
    let mut measurement = Measurement::default();
    let mut last_column = 1;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let err = |column: usize, kind| ParseError { line: line_no, column, kind };
        if let Some(col) = raw.find(|c: char| !c.is_ascii()) {
            return Err(err(col + 1, ParseErrorKind::NonAscii));
        }
        let content = raw.split('#').next().unwrap_or("");
        let tokens = tokenize(content);
        let Some(head) = tokens.first() else { continue };
        last_column = head.column;
        let args = &tokens[1..];
        let arity = |expected: usize| {
            if args.len() == expected {
                Ok(())
            } else {
                let column = args.get(expected).map_or(head.column, |t| t.column);
                Err(err(
                    column,
                    ParseErrorKind::Arity { directive: head.text.to_string(), expected, got: args.len() },
                ))
            }
        };
        let integer = |t: &Token| {
            t.text
                .parse::<usize>()
                .map_err(|_| err(t.column, ParseErrorKind::BadInteger(t.text.to_string())))
        };

        if head.text == "qubits" {
            if circuit.is_some() {
                return Err(err(head.column, ParseErrorKind::DuplicateQubits));
            }
            arity(1)?;
            let n = integer(&args[0])?;
            circuit = Some(
                Circuit::new(n).map_err(|e| err(args[0].column, ParseErrorKind::Circuit(e)))?,
            );
            continue;
        }
        let Some(c) = circuit.as_mut() else {
            return Err(err(head.column, ParseErrorKind::MissingQubits));
        };
        let n_qubits = c.n_qubits();
        let qubit = |t: &Token| {
            let q = integer(t)?;
            if q == 0 || q > n_qubits {
                Err(err(t.column, ParseErrorKind::QubitOutOfRange { qubit: q, n_qubits }))
            } else {
                Ok(q - 1)
            }
        };
        let push = |c: &mut Circuit, item: Item| {
            c.push(item).map_err(|e| err(head.column, ParseErrorKind::Circuit(e)))
        };

        match head.text {
            "noise" => {
                arity(1)?;
                if args[0].text != "auto" {
                    return Err(err(args[0].column, ParseErrorKind::UnknownDirective(format!("noise {}", args[0].text))));
                }
                c.set_auto_noise(true);
            }
            "stage" => {
                arity(1)?;
                let stage = Stage::parse(args[0].text)
                    .ok_or_else(|| err(args[0].column, ParseErrorKind::UnknownStage(args[0].text.to_string())))?;
                push(c, Item::Barrier(stage))?;
            }
            "error" => {
                arity(1)?;
                let q = qubit(&args[0])?;
                let stage = c.current_stage();
                push(c, Item::Error { qubit: q, stage })?;
            }
            "gate" => {
                let Some(kind) = args.first() else {
                    return Err(err(head.column, ParseErrorKind::Arity { directive: "gate".into(), expected: 1, got: 0 }));
                };
                let operands = &args[1..];
                let want = |n: usize| {
                    if operands.len() == n {
                        Ok(())
                    } else {
                        let column = operands.get(n).map_or(kind.column, |t| t.column);
                        Err(err(
                            column,
                            ParseErrorKind::Arity { directive: format!("gate {}", kind.text), expected: n, got: operands.len() },
                        ))
                    }
                };
                let op = match kind.text {
                    "h" | "x" | "y" | "z" => {
                        want(1)?;
                        let q = qubit(&operands[0])?;
                        match kind.text {
                            "h" => Op::H(q),
                            "x" => Op::X(q),
                            "y" => Op::Y(q),
                            _ => Op::Z(q),
                        }
                    }
                    "cnot" => {
                        want(2)?;
                        Op::Cnot { control: qubit(&operands[0])?, target: qubit(&operands[1])? }
                    }
                    "swap" => {
                        want(2)?;
                        Op::Swap(qubit(&operands[0])?, qubit(&operands[1])?)
                    }
                    "mode-unitary" => {
                        want(1)?;
                        Op::ModeUnitary(operands[0].text.to_string())
                    }
                    other => return Err(err(kind.column, ParseErrorKind::UnknownGate(other.to_string()))),
                };
                push(c, Item::Gate(op))?;
            }
            "measure" => {
                if args.first().map(|t| t.text) != Some("ideal") {
                    let column = args.first().map_or(head.column, |t| t.column);
                    return Err(err(column, ParseErrorKind::UnknownDirective(
                        format!("measure {}", args.first().map_or("", |t| t.text)),
                    )));
                }
                arity(2)?;
                if measurement.ideal.is_some() {
                    return Err(err(head.column, ParseErrorKind::DuplicateMeasure));
                }
                measurement.ideal = Some(args[1].text.to_string());
            }
            "postselect" => {
                arity(1)?;
                if args[0].text != "even-parity" {
                    return Err(err(args[0].column, ParseErrorKind::UnknownPostselect(args[0].text.to_string())));
                }
                if measurement.postselect.is_some() {
                    return Err(err(head.column, ParseErrorKind::DuplicateMeasure));
                }
                measurement.postselect = Some(PostSelect::EvenParity);
            }
            other => return Err(err(head.column, ParseErrorKind::UnknownDirective(other.to_string()))),
        }
    }

    let circuit = circuit.ok_or(ParseError {
        line: last_line.max(1),
        column: last_column,
        kind: ParseErrorKind::MissingQubits,
    })?;
    Ok(Document { circuit, measurement })
}

/// Canonical text form; `parse_circuit(render_circuit(c, m))` rebuilds `(c, m)`.
pub fn render_circuit(circuit: &Circuit, measurement: &Measurement) -> String {
    let mut out = format!("qubits {}\n", circuit.n_qubits());
    if circuit.auto_noise() {
        out.push_str("noise auto\n");
    }
    for item in circuit.items() {
        let line = match item {
            Item::Barrier(s) => format!("stage {s}"),
            Item::Error { qubit, .. } => format!("error {}", qubit + 1),
            Item::Gate(op) => match op {
                Op::H(q) => format!("gate h {}", q + 1),
                Op::X(q) => format!("gate x {}", q + 1),
                Op::Y(q) => format!("gate y {}", q + 1),
                Op::Z(q) => format!("gate z {}", q + 1),
                Op::Cnot { control, target } => format!("gate cnot {} {}", control + 1, target + 1),
                Op::Swap(a, b) => format!("gate swap {} {}", a + 1, b + 1),
                Op::ModeUnitary(name) => format!("gate mode-unitary {name}"),
            },
        };
        out.push_str(&line);
        out.push('\n');
    }
    if let Some(name) = &measurement.ideal {
        out.push_str(&format!("measure ideal {name}\n"));
    }
    if measurement.postselect.is_some() {
        out.push_str("postselect even-parity\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_bare_h2_cnot() {
        let doc = parse_circuit("qubits 2\ngate h 2\ngate cnot 2 1").unwrap();
        assert_eq!(
            doc.circuit.items(),
            &[Item::Gate(Op::H(1)), Item::Gate(Op::Cnot { control: 1, target: 0 })]
        );
    }

    #[test]
    fn empty_circuit_renders_header_only() {
        let doc = parse_circuit("qubits 1").unwrap();
        assert!(doc.circuit.items().is_empty());
        assert_eq!(render_circuit(&doc.circuit, &doc.measurement), "qubits 1\n");
    }

    #[test]
    fn comments_and_blank_lines() {
        let doc = parse_circuit("# hi\n\nqubits 3 # three\n  gate swap 1 3  # tail\n").unwrap();
        assert_eq!(doc.circuit.items(), &[Item::Gate(Op::Swap(0, 2))]);
    }

    #[test]
    fn errors_carry_stage_of_barrier() {
        let doc = parse_circuit("qubits 2\nerror 1\nstage evolution\nerror 2").unwrap();
        assert_eq!(
            doc.circuit.locations(),
            vec![(0, 0, Stage::Prep), (2, 1, Stage::Evolution)]
        );
    }

    #[test]
    fn diagnostics() {
        let e = parse_circuit("qubits 2\nqubits 2").unwrap_err();
        assert_eq!((e.line, e.column, e.kind), (2, 1, ParseErrorKind::DuplicateQubits));
        let e = parse_circuit("qubits 2\ngate t 1").unwrap_err();
        assert_eq!((e.line, e.column), (2, 6));
        assert!(matches!(e.kind, ParseErrorKind::UnknownGate(_)));
        let e = parse_circuit("qubits 2\ngate cnot 1 3").unwrap_err();
        assert_eq!((e.line, e.column), (2, 13));
        let e = parse_circuit("gate h 1").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::MissingQubits);
        let e = parse_circuit("qubits 2\nstage measurement\nstage prep").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Circuit(CircuitError::StageOrder { .. })));
        let e = parse_circuit("qubits 2\nfrobnicate").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::UnknownDirective(_)));
        let e = parse_circuit("qubits 9").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Circuit(CircuitError::QubitCount(9))));
        let e = parse_circuit("qubits 2\ngate cnot 1 1").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Circuit(CircuitError::RepeatedQubit(0))));
        let e = parse_circuit("").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::MissingQubits);
    }

    #[test]
    fn render_round_trip() {
        let text = "qubits 4\nnoise auto\nstage prep\ngate h 1\ngate cnot 1 2\nstage evolution\n\
                    gate mode-unitary Hbar2\nerror 3\nstage measurement\nmeasure ideal logical-00\n\
                    postselect even-parity\n";
        let doc = parse_circuit(text).unwrap();
        let rendered = render_circuit(&doc.circuit, &doc.measurement);
        assert_eq!(rendered, text);
        assert_eq!(parse_circuit(&rendered).unwrap(), doc);
    }
}
