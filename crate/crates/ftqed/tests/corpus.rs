use std::fs;
use std::path::{Path, PathBuf};

use ftqed::analysis::{compare_specs, find_threshold, ThresholdOptions, ThresholdStatus};
use ftqed::circuit::{parse_circuit, render_circuit, CircuitError, ParseErrorKind};
use ftqed::noise::PlacementPolicy;
use ftqed::protocols::{build_protocol, ProtocolName, ProtocolSpec, Registry};
use ftqed::statekit::Pauli;

fn corpus(kind: &str) -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus").join(kind);
    let mut files: Vec<PathBuf> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    files
}

fn bundled_sources() -> impl Iterator<Item = (String, &'static str)> {
    ProtocolName::ALL.into_iter().map(|n| (n.as_str().to_string(), n.source()))
}

#[test]
fn valid_files_round_trip() {
    let files = corpus("valid");
    assert!(files.len() >= 5);
    let sources = files
        .iter()
        .map(|f| (f.display().to_string(), fs::read_to_string(f).unwrap()))
        .chain(bundled_sources().map(|(n, s)| (n, s.to_string())));
    for (name, text) in sources {
        let doc = parse_circuit(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let canonical = render_circuit(&doc.circuit, &doc.measurement);
        let again = parse_circuit(&canonical).unwrap();
        assert_eq!(again, doc, "{name}");
        assert_eq!(render_circuit(&again.circuit, &again.measurement), canonical, "{name}");
    }
}

#[test]
fn invalid_files_report_line_and_cause() {
    let expect = |file: &str| -> (usize, fn(&ParseErrorKind) -> bool) {
        match file {
            "arity.ftc" => (2, |k| matches!(k, ParseErrorKind::Arity { .. })),
            "bad-integer.ftc" => (1, |k| matches!(k, ParseErrorKind::BadInteger(_))),
            "duplicate-measure.ftc" => (3, |k| matches!(k, ParseErrorKind::DuplicateMeasure)),
            "duplicate-qubits.ftc" => (2, |k| matches!(k, ParseErrorKind::DuplicateQubits)),
            "missing-qubits.ftc" => (1, |k| matches!(k, ParseErrorKind::MissingQubits)),
            "out-of-range.ftc" => (2, |k| matches!(k, ParseErrorKind::QubitOutOfRange { .. })),
            "repeated-qubit.ftc" => (2, |k| matches!(k, ParseErrorKind::Circuit(CircuitError::RepeatedQubit(_)))),
            "stage-order.ftc" => (3, |k| matches!(k, ParseErrorKind::Circuit(CircuitError::StageOrder { .. }))),
            "too-many-qubits.ftc" => (1, |k| matches!(k, ParseErrorKind::Circuit(CircuitError::QubitCount(9)))),
            "unknown-directive.ftc" => (2, |k| matches!(k, ParseErrorKind::UnknownDirective(_))),
            "unknown-gate.ftc" => (2, |k| matches!(k, ParseErrorKind::UnknownGate(_))),
            "unknown-postselect.ftc" => (2, |k| matches!(k, ParseErrorKind::UnknownPostselect(_))),
            "unknown-stage.ftc" => (2, |k| matches!(k, ParseErrorKind::UnknownStage(_))),
            other => panic!("no expectation for {other}"),
        }
    };
    for f in corpus("invalid") {
        let name = f.file_name().unwrap().to_str().unwrap().to_string();
        let err = parse_circuit(&fs::read_to_string(&f).unwrap()).expect_err(&name);
        let (line, kind) = expect(&name);
        assert_eq!(err.line, line, "{name}: {err}");
        assert!(kind(&err.kind), "{name}: {err}");
        assert!(err.to_string().starts_with(&format!("line {line}, column ")), "{err}");
    }
}

#[test]
fn unknown_projector_names_fail_at_resolution() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus/valid/five-qubits.ftc");
    let doc = parse_circuit(&fs::read_to_string(path).unwrap()).unwrap();
    let r = Registry::bundled();
    assert!(r.resolve_measurement(&doc.measurement, 5).is_err());
}

#[test]
fn mode_unitary_alternative_circuit_has_a_threshold() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus/valid/mode-h2.ftc");
    let r = Registry::bundled();
    let doc = parse_circuit(&fs::read_to_string(path).unwrap()).unwrap();
    let alt = ProtocolSpec::from_document("mode-h2", doc, PlacementPolicy::calibrated(), &r).unwrap();
    let bare = build_protocol(ProtocolName::BareH2, &r).unwrap();
    let cmp = compare_specs(&alt, &bare, Pauli::X, &r).unwrap();
    let t = find_threshold(&cmp, ThresholdOptions::default()).unwrap();
    assert_eq!(t.status, ThresholdStatus::Found);
    // One location per qubit after the mode unitary instead of five noisy gates.
    assert!((t.p_star.unwrap() - 0.98014).abs() < 1e-4, "{t:?}");
}

#[test]
fn transversal_x_preserves_the_code_word() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus/valid/transversal-x.ftc");
    let r = Registry::bundled();
    let doc = parse_circuit(&fs::read_to_string(path).unwrap()).unwrap();
    let spec = ProtocolSpec::from_document("x4", doc, PlacementPolicy::calibrated(), &r).unwrap();
    let program = spec.program(Pauli::Z, &r).unwrap();
    let f = ftqed::noise::evaluate_exact(&program, ftqed::noise::Strategy::Merged).unwrap().correct;
    assert!((f.eval(1.0) - 1.0).abs() < 1e-12);
}
