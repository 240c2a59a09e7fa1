use proptest::prelude::*;

use ftqed::circuit::{parse_circuit, render_circuit, Circuit, Item, Measurement, MeasurementSpec, Op, PostSelect, Stage};
use ftqed::noise::{
    channel_correct_probability, compile, evaluate_exact, EnumerationOptions, ErrorModel, NoModes, Strategy as Engine,
};
use ftqed::statekit::{Gate, Pauli, Projector, PureState};

fn op(n: usize) -> BoxedStrategy<Op> {
    let q = 0..n;
    let single = prop_oneof![
        q.clone().prop_map(Op::H),
        q.clone().prop_map(Op::X),
        q.clone().prop_map(Op::Y),
        q.prop_map(Op::Z),
    ];
    if n < 2 {
        return single.boxed();
    }
    let pair = (0..n, 1..n).prop_map(move |(a, d)| (a, (a + d) % n));
    prop_oneof![
        2 => single,
        1 => pair.clone().prop_map(|(control, target)| Op::Cnot { control, target }),
        1 => pair.prop_map(|(a, b)| Op::Swap(a, b)),
    ]
    .boxed()
}

#[derive(Debug, Clone)]
enum Step {
    Gate(Op),
    Error(usize),
    Advance,
}

fn steps(n: usize, len: usize) -> impl Strategy<Value = Vec<Step>> {
    prop::collection::vec(
        prop_oneof![
            4 => op(n).prop_map(Step::Gate),
            2 => (0..n).prop_map(Step::Error),
            1 => Just(Step::Advance),
        ],
        0..len,
    )
}

fn build(n: usize, steps: &[Step], auto: bool) -> Circuit {
    let mut c = Circuit::new(n).unwrap();
    c.set_auto_noise(auto);
    let mut stage = None;
    for s in steps {
        match s {
            Step::Gate(op) => {
                c.gate(op.clone()).unwrap();
            }
            Step::Error(q) => {
                c.error(*q).unwrap();
            }
            Step::Advance => {
                let next = match stage {
                    None => Stage::Prep,
                    Some(Stage::Prep) => Stage::Evolution,
                    Some(_) => Stage::Measurement,
                };
                stage = Some(next);
                c.stage(next).unwrap();
            }
        }
    }
    c
}

fn circuit(max_qubits: usize, len: usize) -> impl Strategy<Value = (Circuit, Measurement)> {
    (1..=max_qubits, any::<bool>(), any::<bool>(), prop::option::of("[a-z][a-z0-9+-]{0,8}"))
        .prop_flat_map(move |(n, auto, post, ideal)| {
            steps(n, len).prop_map(move |s| {
                let m = Measurement { ideal: ideal.clone(), postselect: post.then_some(PostSelect::EvenParity) };
                (build(n, &s, auto), m)
            })
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn gates_preserve_norm((n, ops) in (1..=5usize).prop_flat_map(|n| (Just(n), prop::collection::vec(op(n), 0..12)))) {
        let mut s = PureState::<f64>::uniform(n, &[0, (1 << n) - 1]).unwrap();
        for o in &ops {
            let g = match o {
                Op::H(q) => Gate::h(*q),
                Op::X(q) => Gate::x(*q),
                Op::Y(q) => Gate::y(*q),
                Op::Z(q) => Gate::z(*q),
                Op::Cnot { control, target } => Gate::cnot(*control, *target),
                Op::Swap(a, b) => Gate::swap(*a, *b),
                Op::ModeUnitary(_) => unreachable!(),
            };
            let m = g.full_matrix(n).unwrap();
            prop_assert!(m.is_unitary());
            let before = s.clone();
            s.apply(&g).unwrap();
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
            let back = s.applied(&g.inverse()).unwrap();
            prop_assert!((back.fidelity(&before).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn render_then_parse_is_identity((c, m) in circuit(5, 24)) {
        let text = render_circuit(&c, &m);
        let doc = parse_circuit(&text).unwrap();
        prop_assert_eq!(&doc.circuit, &c);
        prop_assert_eq!(&doc.measurement, &m);
        prop_assert_eq!(render_circuit(&doc.circuit, &doc.measurement), text);
    }

    #[test]
    fn parser_never_panics(text in "[ -~\n]{0,200}") {
        let _ = parse_circuit(&text);
    }

    #[test]
    fn parser_reports_a_position(lines in prop::collection::vec("(gate|error|stage|qubits|measure) [a-z0-9 ]{0,12}", 1..8)) {
        let text = lines.join("\n");
        if let Err(e) = parse_circuit(&text) {
            prop_assert!(e.line >= 1 && e.line <= lines.len().max(1) + 1);
            prop_assert!(e.column >= 1);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Pattern enumeration, merged branches and dense density matrices agree
    /// on arbitrary small circuits with explicit error locations.
    #[test]
    fn engines_agree_on_random_circuits(
        (c, _) in circuit(3, 14),
        pauli in prop_oneof![Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)],
        p in 0.05f64..1.0,
        split in 0usize..6,
    ) {
        let mut c = c;
        c.set_auto_noise(false);
        prop_assume!(c.n_locations() <= 10);
        let target = {
            let mut s = PureState::zero(c.n_qubits()).unwrap();
            for item in c.items() {
                if let Item::Gate(op) = item {
                    let g = match op {
                        Op::H(q) => Gate::h(*q),
                        Op::X(q) => Gate::x(*q),
                        Op::Y(q) => Gate::y(*q),
                        Op::Z(q) => Gate::z(*q),
                        Op::Cnot { control, target } => Gate::cnot(*control, *target),
                        Op::Swap(a, b) => Gate::swap(*a, *b),
                        Op::ModeUnitary(_) => unreachable!(),
                    };
                    s.apply(&g).unwrap();
                }
            }
            s
        };
        let even = Projector::even_parity(c.n_qubits()).unwrap();
        let post = even.contains(&Projector::onto(target.clone())).then_some(even);
        let spec = MeasurementSpec::new(Projector::onto(target), post).unwrap();
        let program = compile(&c, &spec, &ErrorModel::explicit(pauli), &NoModes).unwrap();

        let merged = evaluate_exact(&program, Engine::Merged).unwrap();
        let patterns = evaluate_exact(&program, Engine::Patterns(EnumerationOptions { split_bits: split, reverse: split % 2 == 1 })).unwrap();
        prop_assert_eq!(&merged.tallies.ideal, &patterns.tallies.ideal);
        prop_assert_eq!(&merged.tallies.accepted, &patterns.tallies.accepted);
        prop_assert_eq!(&merged.tallies.modes, &patterns.tallies.modes);
        let dense = channel_correct_probability(&program, p).unwrap();
        prop_assert!((merged.correct.eval(p) - dense).abs() < 1e-12);
        // p = 1 is the noiseless circuit.
        prop_assert!((merged.correct.eval(1.0) - 1.0).abs() < 1e-12);
    }
}
